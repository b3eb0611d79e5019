from fractions import Fraction

import pytest

from eatsim import (
    Lexicographic,
    Proportional,
    expected_payoffs,
    valuation_of,
)
from eatsim.equilibrium import (
    BudgetExceededError,
    best_response,
    certificate_to_json,
    configured_budget,
    ratio_report,
    run_profile,
    sequential_payoff_floor,
    verify_ne,
)
from eatsim.instances import GeneratorSpec, generate, random_instance
from eatsim.model import Instance
from eatsim.strategies import (
    GridProportional,
    Sequential,
    SingleMinded,
    Truthful,
    Uniform,
    single_minded,
)

from helpers import random_profile, rng_for

F = Fraction


@pytest.fixture(scope="module")
def example2():
    return generate(GeneratorSpec("example2")).instance


class TestBestResponse:
    def test_example2_single_minded_beats_truth(self, example2):
        report = best_response(
            agent=0,
            opponents=example2.truthful_profile()[1:],
            true_valuation=example2.valuations[0],
            families=[Truthful(), SingleMinded()],
        )
        assert report.best_label == "single-minded(1)"
        assert report.best_payoff == F(7, 12)
        assert report.baseline_payoff == F(5, 9)
        assert report.gain == F(7, 12) - F(5, 9) == F(1, 36)

    def test_grid_optimum_at_least_single_minded(self, example2):
        report = best_response(
            agent=0,
            opponents=example2.truthful_profile()[1:],
            true_valuation=example2.valuations[0],
            families=[GridProportional(12)],
        )
        assert report.best_payoff >= F(7, 12)

    def test_single_minded_truth_prefers_its_item(self):
        # an agent whose true valuation is concentrated on one item never
        # finds a better single-item bid than that item
        rng = rng_for("br-single-minded-truth")
        for trial in range(100):
            n, m = rng.randint(2, 5), rng.randint(2, 5)
            item = rng.randrange(m)
            truth = single_minded(item, m).report
            opponents = random_profile(rng, n - 1, m)
            report = best_response(0, opponents, truth, [SingleMinded()],
                                   collect_candidates=True)
            own = dict(report.candidates)[f"single-minded({item + 1})"]
            assert own == report.best_payoff

    def test_gain_nonnegative_when_baseline_in_family(self):
        rng = rng_for("br-gain")
        for trial in range(30):
            n, m = rng.randint(2, 4), rng.randint(2, 4)
            inst = random_instance(n, m, 10, seed=trial).instance
            report = best_response(
                0, inst.truthful_profile()[1:], inst.valuations[0],
                [Truthful(), SingleMinded(), Sequential(), Uniform()])
            assert report.gain >= 0

    def test_tie_breaking_is_canonical_regardless_of_family_order(self):
        # single agent: every candidate ties at payoff 1, so the canonical
        # enumeration (truthful first) must win in both orders
        inst = Instance(1, 2, (valuation_of(["1/2", "1/2"]),))
        for families in ([Truthful(), SingleMinded()], [SingleMinded(), Truthful()]):
            report = best_response(0, [], inst.valuations[0], families)
            assert report.best_label == "truthful"
            assert report.best_payoff == 1

    def test_budget_enforced(self, example2):
        with pytest.raises(BudgetExceededError):
            best_response(0, example2.truthful_profile()[1:], example2.valuations[0],
                          [GridProportional(12)], budget=5)

    def test_budget_env_override(self, example2, monkeypatch):
        monkeypatch.setenv("ALLOC_BUDGET", "3")
        assert configured_budget() == 3
        with pytest.raises(BudgetExceededError):
            best_response(0, example2.truthful_profile()[1:], example2.valuations[0],
                          [SingleMinded(), Truthful()])


class TestVerifyNe:
    def test_example2_truthful_refuted_with_witness(self, example2):
        cert = verify_ne(example2.truthful_profile(), example2,
                         families=[Truthful(), SingleMinded()])
        assert cert.verdict == "refuted"
        assert cert.witness.agent == 0
        assert cert.witness.best_label == "single-minded(1)"
        assert cert.witness.gain == F(1, 36)

    def test_mutually_single_minded_profile_certified(self):
        n = 3
        rows = tuple(single_minded(i, n).report for i in range(n))
        inst = Instance(n, n, rows)
        cert = verify_ne(inst.truthful_profile(), inst,
                         families=[Truthful(), SingleMinded(), Sequential(), Uniform()])
        assert cert.verdict == "certified"
        assert all(r.baseline_payoff == 1 for r in cert.reports)

    def test_opposed_bids_certified_even_against_grid(self, example2):
        profile = [Proportional(valuation_of(["1", "0"])),
                   Proportional(valuation_of(["0", "1"]))]
        cert = verify_ne(profile, example2,
                         families=[Truthful(), SingleMinded(), Sequential(),
                                   Uniform(), GridProportional(12)])
        assert cert.verdict == "certified"
        assert all(r.baseline_payoff == F(2, 3) for r in cert.reports)

    def test_certified_profiles_clear_the_quarter_rule_floor(self, example2):
        # every certified profile in this suite gets the payoff-floor check
        certified = [
            ([Proportional(valuation_of(["1", "0"])),
              Proportional(valuation_of(["0", "1"]))], example2),
        ]
        n = 3
        identity = Instance(n, n, tuple(single_minded(i, n).report for i in range(n)))
        certified.append((identity.truthful_profile(), identity))
        for profile, inst in certified:
            cert = verify_ne(profile, inst, families=[Truthful(), SingleMinded()])
            assert cert.verdict == "certified"
            trace = run_profile(inst.n, inst.m, profile)
            times = trace.consumption_times()
            sequence = sorted((j for j in range(inst.m) if times[j] <= 1),
                              key=lambda j: (times[j], j))
            payoffs = expected_payoffs(trace, inst.valuations)
            for i in range(inst.n):
                floor = sequential_payoff_floor(trace, inst.valuations[i], sequence)
                assert payoffs[i] + cert.epsilon >= floor

    def test_verdict_consistency_enforced(self, example2):
        cert = verify_ne(example2.truthful_profile(), example2,
                         families=[Truthful(), SingleMinded()])
        with pytest.raises(ValueError):
            type(cert)(
                epsilon=cert.epsilon, verdict="certified", reports=cert.reports,
                witness=cert.witness, mechanism=cert.mechanism,
                families=cert.families, budget=cert.budget)

    def test_epsilon_absorbs_small_gains(self, example2):
        cert = verify_ne(example2.truthful_profile(), example2, epsilon=F(1, 10),
                         families=[Truthful(), SingleMinded()])
        assert cert.verdict == "certified"

    def test_certificate_json_shape(self, example2):
        profile = example2.truthful_profile()
        cert = verify_ne(profile, example2, families=[Truthful(), SingleMinded()],
                         collect_candidates=True)
        doc = certificate_to_json(cert, profile)
        assert doc["verdict"] == "refuted"
        assert doc["witness"]["agent"] == 1
        assert doc["reports"][0]["candidates"]

    def test_dyadic_bad_profile_is_family_relative_equilibrium(self):
        # the welfare-gap construction's designated profile holds up against
        # single-minded and greedy sequential deviations: every gain is 0
        gen = generate(GeneratorSpec("log-m-lb", {"k": 8, "q": 4}))
        inst = gen.instance
        cert = verify_ne(list(gen.bad_profile), inst, epsilon=F(1, 100),
                         families=[SingleMinded(), Sequential()])
        assert cert.verdict == "certified"
        assert all(r.gain == 0 for r in cert.reports)
        # certified profiles must clear the quarter-rule payoff floor over
        # the items finished by time one
        trace = run_profile(inst.n, inst.m, list(gen.bad_profile))
        times = trace.consumption_times()
        early = sorted((j for j in range(inst.m) if times[j] <= 1),
                       key=lambda j: (times[j], j))
        payoffs = expected_payoffs(trace, inst.valuations)
        for i in range(inst.n):
            floor = sequential_payoff_floor(trace, inst.valuations[i], early)
            assert payoffs[i] + cert.epsilon >= floor

    def test_ordinal_mechanism_sweep(self, example2):
        # under favorite-first eating the truthful profile of this instance
        # is already a strict matching, so nothing improves
        cert = verify_ne(example2.truthful_profile(), example2,
                         families=[Truthful(), SingleMinded(), Sequential()],
                         mechanism="ps")
        assert cert.verdict == "certified"
        assert all(r.baseline_payoff == F(2, 3) for r in cert.reports)


class TestRatioReport:
    def test_example2_truthful_ratio(self, example2):
        report = ratio_report(example2, example2.truthful_profile())
        assert report.welfare == F(10, 9)
        assert report.opt == F(4, 3)
        assert report.ratio == F(6, 5)

    def test_identity_ratio_one(self):
        n = 3
        inst = Instance(n, n, tuple(single_minded(i, n).report for i in range(n)))
        report = ratio_report(inst, inst.truthful_profile())
        assert report.ratio == 1

    def test_zero_welfare_flagged_not_raised(self):
        inst = Instance(2, 2, (valuation_of(["1", "0"]), valuation_of(["0", "1"])))
        swapped = [Lexicographic((1,)), Lexicographic((0,))]
        report = ratio_report(inst, swapped)
        assert report.welfare == 0
        assert report.infinite and report.ratio is None


class TestSequentialPayoffFloor:
    def test_rejects_items_past_time_one(self):
        gen = generate(GeneratorSpec("log-m-lb", {"k": 2, "q": 2}))
        trace = run_profile(gen.instance.n, gen.instance.m, list(gen.bad_profile))
        late = [j for j in range(gen.instance.m)
                if trace.consumption_times()[j] > 1]
        with pytest.raises(ValueError):
            sequential_payoff_floor(trace, gen.instance.valuations[0], late[:1])

    def test_rejects_unsorted_sequences(self, example2):
        profile = [single_minded(0, 2), example2.truthful_profile()[1]]
        trace = run_profile(2, 2, profile)
        # item 1 (index 0) finishes first; feeding them latest-first is an error
        with pytest.raises(ValueError):
            sequential_payoff_floor(trace, example2.valuations[0], [1, 0])
