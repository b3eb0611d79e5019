import json
from fractions import Fraction

import pytest

from eatsim.cli import (
    EXIT_BUDGET,
    EXIT_INVALID,
    EXIT_OK,
    EXIT_PARSE,
    EXIT_REFUTED,
    EXIT_USAGE,
    ExperimentConfig,
    POA_CSV_COLUMNS,
    config_from_argv,
    execute,
    main,
)
from eatsim.model import instance_from_json, profile_from_json

F = Fraction


def run_cli(argv):
    return execute(config_from_argv(argv))


class TestUsage:
    def test_empty_args_exit_64(self, capsys):
        assert main([]) == EXIT_USAGE
        assert "usage" in capsys.readouterr().err

    def test_unknown_family_exit_64(self, capsys):
        code = main(["verify-ne", "--generator", "example2",
                     "--families", "mystery"])
        assert code == EXIT_USAGE

    def test_instance_and_generator_conflict(self, capsys):
        assert main(["simulate", "--instance", "x.json",
                     "--generator", "example1"]) == EXIT_USAGE

    def test_bad_fixed_policy_exit_64(self, capsys):
        assert main(["simulate", "--generator", "example1",
                     "--zero-policy", "fixed:1,1,2"]) == EXIT_USAGE


class TestSimulate:
    def test_prints_exact_times_and_shares(self):
        result = run_cli(["simulate", "--generator", "example1", "--mechanism", "cps"])
        assert result.exit_code == EXIT_OK
        assert "t1 = 2/3" in result.stdout
        assert "t2 = 460/501" in result.stdout
        assert "t3 = 1" in result.stdout
        assert "514/835" in result.stdout and "~0.615569" in result.stdout

    def test_truthful_payoffs_on_two_agent_instance(self):
        result = run_cli(["simulate", "--generator", "example2",
                          "--profile", "truthful"])
        assert result.stdout.count("5/9") == 2

    def test_trace_file_written(self, tmp_path):
        out = tmp_path / "trace.json"
        result = run_cli(["simulate", "--generator", "example1",
                          "--out", str(out)])
        text = result.files[str(out)]
        doc = json.loads(text)
        assert doc["depletion_events"][0] == {"time": "2/3", "item": 2}
        assert doc["decimal_approx"]["note"].startswith("approximate")

    def test_fixed_policy_accepted(self):
        result = run_cli(["simulate", "--generator", "example1",
                          "--zero-policy", "fixed:3,1,2"])
        assert result.exit_code == EXIT_OK

    def test_ordinal_mechanism_golden(self):
        # favorite-first eating on the three-agent instance: two agents
        # swarm item 2, so it finishes at 1/2
        result = run_cli(["simulate", "--generator", "example1",
                          "--mechanism", "ps"])
        assert "t1 = 1/2" in result.stdout and "item 2" in result.stdout

    def test_parse_error_missing_file(self):
        result = run_cli(["simulate", "--instance", "does-not-exist.json"])
        assert result.exit_code == EXIT_PARSE

    def test_invalid_instance_lists_defects(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(
            {"n": 1, "m": 2, "valuations": [["1/2", "1/3"]]}))
        result = run_cli(["simulate", "--instance", str(path)])
        assert result.exit_code == EXIT_INVALID
        assert "agent 1" in result.stdout

    def test_malformed_json_is_parse_error(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        result = run_cli(["simulate", "--instance", str(path)])
        assert result.exit_code == EXIT_PARSE


class TestOpt:
    def test_example1(self):
        result = run_cli(["opt", "--generator", "example1"])
        assert "8/5" in result.stdout


class TestPoa:
    def test_csv_header_is_stable(self):
        result = run_cli(["poa", "--generator", "example2", "--profile", "truthful"])
        header = result.stdout.splitlines()[0]
        assert header == ",".join(POA_CSV_COLUMNS)
        assert header == ("n,m,mechanism,welfare,welfare_approx,"
                          "opt,opt_approx,ratio,ratio_approx")

    def test_log_m_row(self):
        result = run_cli(["poa", "--generator", "log-m-lb", "--k", "8", "--q", "4"])
        row = result.stdout.splitlines()[1].split(",")
        assert row[:3] == ["12", "31", "cps"]
        assert F(row[3]) <= 4
        assert F(row[5]) == 5
        assert F(row[7]) >= F(5, 4)

    def test_both_mechanisms_two_rows(self):
        result = run_cli(["poa", "--generator", "ps-beats-cps", "--n", "16",
                          "--mechanism", "both", "--profile", "truthful"])
        lines = result.stdout.strip().splitlines()
        assert len(lines) == 3
        cps_row, ps_row = lines[1].split(","), lines[2].split(",")
        assert cps_row[2] == "cps" and F(cps_row[3]) == F(8, 5)
        assert ps_row[2] == "ps" and F(ps_row[3]) == 4

    def test_rp_row_uses_exact_enumeration(self):
        result = run_cli(["poa", "--generator", "rp-lb", "--n", "4",
                          "--eps", "1/100", "--mechanism", "rp"])
        row = result.stdout.splitlines()[1].split(",")
        assert row[2] == "rp"
        assert F(row[3]) == 1 and F(row[5]) == F(99, 25)

    def test_rrp_row_is_seeded(self):
        argv = ["poa", "--generator", "log-m-lb", "--k", "4", "--q", "3",
                "--mechanism", "rrp", "--samples", "400", "--seed", "9"]
        first, second = run_cli(argv), run_cli(argv)
        assert first.stdout == second.stdout
        assert first.stdout.splitlines()[1].split(",")[2] == "rrp"

    def test_uses_designated_bad_profile_by_default(self):
        result = run_cli(["poa", "--generator", "sqrt-n-lb", "--n", "16",
                          "--eps", "1/4096"])
        row = result.stdout.splitlines()[1].split(",")
        assert F(row[3]) <= 3 and F(row[5]) >= 4

    def test_zero_welfare_renders_inf(self, tmp_path):
        inst_path = tmp_path / "inst.json"
        inst_path.write_text(json.dumps(
            {"n": 2, "m": 2, "valuations": [["1", "0"], ["0", "1"]]}))
        prof_path = tmp_path / "prof.json"
        prof_path.write_text(json.dumps([
            {"kind": "lexicographic", "order": [2]},
            {"kind": "lexicographic", "order": [1]},
        ]))
        result = run_cli(["poa", "--instance", str(inst_path),
                          "--profile", str(prof_path)])
        row = result.stdout.splitlines()[1].split(",")
        assert row[3] == "0" and row[7] == "inf" and row[8] == "inf"


class TestVerifyAndBestResponse:
    def test_example2_truthful_refuted_exit_3(self):
        result = run_cli(["verify-ne", "--generator", "example2",
                          "--profile", "truthful",
                          "--families", "truthful,single-minded"])
        assert result.exit_code == EXIT_REFUTED
        assert "single-minded(1)" in result.stdout
        assert "1/36" in result.stdout

    def test_certificate_file(self, tmp_path):
        out = tmp_path / "cert.json"
        result = run_cli(["verify-ne", "--generator", "example2",
                          "--profile", "truthful", "--out", str(out),
                          "--dump-candidates"])
        doc = json.loads(result.files[str(out)])
        assert doc["verdict"] == "refuted"
        assert doc["reports"][0]["candidates"]

    def test_budget_exceeded_exit_4(self, monkeypatch):
        monkeypatch.setenv("ALLOC_BUDGET", "2")
        result = run_cli(["verify-ne", "--generator", "example2",
                          "--profile", "truthful"])
        assert result.exit_code == EXIT_BUDGET

    def test_certified_profile_exit_0(self, tmp_path):
        # mutually single-minded agents: nobody can improve on payoff 1
        inst_path = tmp_path / "identity.json"
        inst_path.write_text(json.dumps({
            "n": 3, "m": 3,
            "valuations": [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]],
        }))
        result = run_cli(["verify-ne", "--instance", str(inst_path),
                          "--profile", "truthful"])
        assert result.exit_code == EXIT_OK
        assert "verdict: certified" in result.stdout

    def test_dyadic_bad_profile_certified_with_default_families(self):
        result = run_cli(["verify-ne", "--generator", "log-m-lb",
                          "--k", "4", "--q", "3", "--profile", "bad"])
        assert result.exit_code == EXIT_OK
        assert "verdict: certified" in result.stdout

    def test_best_response_report(self):
        result = run_cli(["best-response", "--generator", "example2",
                          "--profile", "truthful", "--agent", "1",
                          "--families", "truthful,single-minded,grid:12",
                          "--dump-candidates"])
        assert result.exit_code == EXIT_OK
        assert "best: single-minded(1) payoff 7/12" in result.stdout
        assert "candidate grid(" in result.stdout


class TestLotteryCommands:
    def test_rp_exact(self):
        result = run_cli(["rp", "--generator", "rp-lb", "--n", "4",
                          "--eps", "1/100"])
        assert "exact-enumeration" in result.stdout
        assert "expected welfare: 1 (~1)" in result.stdout

    def test_rp_exact_refused_for_large_n(self):
        result = run_cli(["rp", "--generator", "random", "--n", "9", "--m", "9",
                          "--seed", "0", "--profile", "truthful"])
        assert result.exit_code == EXIT_BUDGET

    def test_rrp_reports_stderr_and_seed(self, tmp_path):
        out = tmp_path / "rrp.json"
        result = run_cli(["rrp", "--generator", "log-m-lb", "--k", "4", "--q", "3",
                          "--samples", "500", "--seed", "7", "--out", str(out)])
        doc = json.loads(result.files[str(out)])
        assert doc["samples"] == 500 and doc["seed"] == 7
        assert "stderr" in doc


class TestGenerateAndSample:
    def test_generate_writes_instance_and_profile(self, tmp_path):
        inst_path = tmp_path / "inst.json"
        prof_path = tmp_path / "prof.json"
        result = run_cli(["generate", "--generator", "log-m-lb", "--k", "2", "--q", "2",
                          "--out", str(inst_path), "--profile-out", str(prof_path)])
        inst = instance_from_json(json.loads(result.files[str(inst_path)]))
        assert (inst.n, inst.m) == (4, 7)
        profile = profile_from_json(json.loads(result.files[str(prof_path)]),
                                    inst.n, inst.m)
        assert len(profile) == 4

    def test_generator_domain_error_exit_2(self):
        result = run_cli(["generate", "--generator", "sqrt-n-lb", "--n", "10"])
        assert result.exit_code == EXIT_INVALID

    def test_sample_deterministic(self):
        argv = ["sample", "--generator", "example1", "--seed", "42"]
        assert run_cli(argv).stdout == run_cli(argv).stdout


class TestConfigRoundTrip:
    @pytest.mark.parametrize("argv", [
        ["simulate", "--generator", "example1", "--out", "trace.json"],
        ["poa", "--generator", "log-m-lb", "--k", "4", "--q", "3",
         "--mechanism", "both", "--out", "poa.csv"],
        ["rrp", "--generator", "log-m-lb", "--k", "4", "--q", "3",
         "--samples", "300", "--seed", "5", "--out", "rrp.json"],
        ["verify-ne", "--generator", "example2", "--profile", "truthful",
         "--out", "cert.json"],
        ["sample", "--generator", "example1", "--seed", "3", "--out", "alloc.json"],
    ], ids=lambda a: a[0])
    def test_rerun_from_serialized_config_is_bit_identical(self, argv):
        config = config_from_argv(argv)
        reloaded = ExperimentConfig.from_json(json.loads(json.dumps(config.to_json())))
        first = execute(config)
        second = execute(reloaded)
        assert first.exit_code == second.exit_code
        assert first.stdout == second.stdout
        assert first.files == second.files
