"""Best-response search, epsilon-Nash certification, and welfare ratios.

Certification is always relative to explicit finite strategy families: the
continuum of unit-sum reports is not searchable, so every certificate names
the families it swept. Candidate enumeration follows a fixed canonical order
(see :mod:`eatsim.strategies`) and the argmax keeps the first maximizer, so
the search is deterministic regardless of evaluation order.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import engine
from .model import (
    Instance,
    LOWEST_INDEX_FIRST,
    Proportional,
    Strategy,
    Valuation,
    ZeroPolicy,
    format_rational,
    strategy_to_json,
)
from .strategies import (
    StrategyFamily,
    describe_families,
    expand_families,
    family_size,
    ps_profile,
)

DEFAULT_BUDGET = 10 ** 6
BUDGET_ENV_VAR = "ALLOC_BUDGET"


class BudgetExceededError(RuntimeError):
    """The family expansion would exceed the configured engine-run budget."""


def configured_budget(budget: int | None = None) -> int:
    if budget is not None:
        return budget
    raw = os.environ.get(BUDGET_ENV_VAR)
    return int(raw) if raw else DEFAULT_BUDGET


def _mechanism_profile(profile: Sequence[Strategy], m: int, mechanism: str) -> list[Strategy]:
    if mechanism == "cps":
        return list(profile)
    if mechanism == "ps":
        return list(ps_profile(profile, m))
    raise ValueError(f"unknown eating mechanism {mechanism!r}")


def run_profile(
    n: int,
    m: int,
    profile: Sequence[Strategy],
    mechanism: str = "cps",
    policy: ZeroPolicy = LOWEST_INDEX_FIRST,
    include_segments: bool = True,
) -> engine.Trace:
    """Run a profile under the chosen eating mechanism (ordinal = converted orders)."""
    return engine.run(n, m, _mechanism_profile(profile, m, mechanism), policy,
                      include_segments)


@dataclass(frozen=True)
class DeviationReport:
    """Outcome of one agent's best-response sweep over its families."""

    agent: int
    baseline_payoff: Fraction
    best_label: str
    best_strategy: Strategy
    best_payoff: Fraction
    gain: Fraction
    families: str
    runs: int
    candidates: tuple[tuple[str, Fraction], ...] | None = None


@dataclass(frozen=True)
class EquilibriumCertificate:
    """Family-relative epsilon-Nash verdict for one profile."""

    epsilon: Fraction
    verdict: str  # "certified" | "refuted"
    reports: tuple[DeviationReport, ...]
    witness: DeviationReport | None
    mechanism: str
    families: str
    budget: int

    def __post_init__(self):
        refuted = any(r.gain > self.epsilon for r in self.reports)
        if refuted != (self.verdict == "refuted"):
            raise ValueError("verdict inconsistent with deviation gains")


def best_response(
    agent: int,
    opponents: Sequence[Strategy],
    true_valuation: Valuation,
    families: Sequence[StrategyFamily],
    mechanism: str = "cps",
    policy: ZeroPolicy = LOWEST_INDEX_FIRST,
    baseline: Strategy | None = None,
    budget: int | None = None,
    collect_candidates: bool = False,
) -> DeviationReport:
    """Exhaustively evaluate every family member and return the payoff argmax.

    ``opponents`` are the other n-1 strategies in agent-index order with the
    deviating agent removed; its candidate (and the ``baseline``, default the
    truthful report) is spliced back in at position ``agent``. Ties keep the
    first candidate in canonical enumeration order.
    """
    if not families:
        raise ValueError("need at least one strategy family")
    n = len(opponents) + 1
    m = len(true_valuation)
    budget = configured_budget(budget)
    total = sum(family_size(f, m) for f in families) + 1
    if total > budget:
        raise BudgetExceededError(
            f"family expansion needs {total} engine runs, budget is {budget}")

    def payoff_of(candidate: Strategy) -> Fraction:
        profile = list(opponents[:agent]) + [candidate] + list(opponents[agent:])
        trace = run_profile(n, m, profile, mechanism, policy, include_segments=False)
        return engine.expected_payoffs(trace, [true_valuation] * n)[agent]

    baseline = baseline if baseline is not None else Proportional(true_valuation)
    baseline_payoff = payoff_of(baseline)
    best_label = None
    best_strategy = None
    best_payoff = None
    runs = 1
    collected: list[tuple[str, Fraction]] = []
    for label, candidate in expand_families(families, true_valuation, m):
        value = payoff_of(candidate)
        runs += 1
        if collect_candidates:
            collected.append((label, value))
        if best_payoff is None or value > best_payoff:
            best_label, best_strategy, best_payoff = label, candidate, value
    return DeviationReport(
        agent=agent,
        baseline_payoff=baseline_payoff,
        best_label=best_label,
        best_strategy=best_strategy,
        best_payoff=best_payoff,
        gain=best_payoff - baseline_payoff,
        families=describe_families(families, m),
        runs=runs,
        candidates=tuple(collected) if collect_candidates else None,
    )


def verify_ne(
    profile: Sequence[Strategy],
    instance: Instance,
    epsilon: Fraction = Fraction(0),
    families: Sequence[StrategyFamily] = (),
    mechanism: str = "cps",
    policy: ZeroPolicy = LOWEST_INDEX_FIRST,
    budget: int | None = None,
    collect_candidates: bool = False,
) -> EquilibriumCertificate:
    """Run best_response for every agent; certify or return the refutation.

    The verdict is an epsilon-Nash statement *within the given families*: it
    is a refutation whenever some agent gains more than epsilon, and a
    certificate otherwise.
    """
    if not families:
        raise ValueError("need at least one strategy family")
    n, m = instance.n, instance.m
    budget = configured_budget(budget)
    per_agent = sum(family_size(f, m) for f in families) + 1
    if n * per_agent > budget:
        raise BudgetExceededError(
            f"verification needs {n * per_agent} engine runs, budget is {budget}")
    reports = []
    witness = None
    for agent in range(n):
        opponents = list(profile[:agent]) + list(profile[agent + 1:])
        report = best_response(
            agent, opponents, instance.valuations[agent], families,
            mechanism=mechanism, policy=policy, baseline=profile[agent],
            budget=budget, collect_candidates=collect_candidates)
        reports.append(report)
        if witness is None and report.gain > epsilon:
            witness = report
    return EquilibriumCertificate(
        epsilon=epsilon,
        verdict="refuted" if witness is not None else "certified",
        reports=tuple(reports),
        witness=witness,
        mechanism=mechanism,
        families=describe_families(families, m),
        budget=budget,
    )


@dataclass(frozen=True)
class RatioReport:
    welfare: Fraction
    opt: Fraction
    ratio: Fraction | None  # None means infinite (zero welfare)

    @property
    def infinite(self) -> bool:
        return self.ratio is None


def ratio_report(
    instance: Instance,
    profile: Sequence[Strategy],
    mechanism: str = "cps",
    policy: ZeroPolicy = LOWEST_INDEX_FIRST,
) -> RatioReport:
    """Welfare of the profile, the optimal welfare, and their ratio.

    Zero welfare (possible when every agent's shares sit on items it does not
    value) is flagged as an infinite ratio rather than raised.
    """
    from .lotteries import opt as opt_welfare

    trace = run_profile(instance.n, instance.m, profile, mechanism, policy,
                        include_segments=False)
    total = engine.welfare(trace, instance.valuations)
    best, _ = opt_welfare(instance)
    return RatioReport(
        welfare=total,
        opt=best,
        ratio=(best / total) if total > 0 else None,
    )


def sequential_payoff_floor(
    trace: engine.Trace,
    true_valuation: Valuation,
    items: Sequence[int],
) -> Fraction:
    """The quarter-rule payoff floor a sequential deviation guarantees.

    Given a trace and an item sequence ordered by increasing consumption
    time (all times at most 1), returns
    (1/4) * sum_l (t_{x_l} - t_{x_{l-1}}) * v'(x_l) with t_{x_0} = 0.
    A certified equilibrium payoff must clear this floor up to epsilon.
    """
    times = trace.consumption_times()
    previous = Fraction(0)
    floor = Fraction(0)
    for x in items:
        t = times[x]
        if t > 1:
            raise ValueError("floor only applies to items consumed by time 1")
        if t < previous:
            raise ValueError("items must be ordered by increasing consumption time")
        floor += (t - previous) * true_valuation[x]
        previous = t
    return floor / 4


def deviation_report_to_json(report: DeviationReport) -> dict:
    doc = {
        "agent": report.agent + 1,
        "baseline_payoff": format_rational(report.baseline_payoff),
        "best_label": report.best_label,
        "best_strategy": strategy_to_json(report.best_strategy),
        "best_payoff": format_rational(report.best_payoff),
        "gain": format_rational(report.gain),
        "families": report.families,
        "engine_runs": report.runs,
    }
    if report.candidates is not None:
        doc["candidates"] = [
            {"label": label, "payoff": format_rational(p)} for label, p in report.candidates
        ]
    return doc


def certificate_to_json(cert: EquilibriumCertificate, profile: Sequence[Strategy]) -> dict:
    return {
        "epsilon": format_rational(cert.epsilon),
        "verdict": cert.verdict,
        "mechanism": cert.mechanism,
        "families": cert.families,
        "budget": cert.budget,
        "profile": [strategy_to_json(s) for s in profile],
        "reports": [deviation_report_to_json(r) for r in cert.reports],
        "witness": deviation_report_to_json(cert.witness) if cert.witness else None,
    }
