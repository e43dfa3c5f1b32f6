import json
import subprocess
import sys

import pytest

RUN = [sys.executable, "-m", "tailbalance"]


def run_cli(*args, check=None):
    result = subprocess.run(RUN + list(args), capture_output=True, text=True)
    if check is not None:
        assert result.returncode == check, result.stderr
    return result


def csv_rows(stdout):
    lines = [ln for ln in stdout.splitlines() if ln and not ln.startswith("#")]
    header, data = lines[0], lines[1:]
    return header.split(","), [ln.split(",") for ln in data]


def header_spec(stdout):
    first = stdout.splitlines()[0]
    assert first.startswith("# tailbalance ")
    payload = first.split(" ", 3)
    return payload[2], json.loads(payload[3])


class TestSolveCommand:
    def test_csv_shape_and_endpoints(self):
        result = run_cli("solve", "--a", "0.8", "--grid", "11", check=0)
        columns, rows = csv_rows(result.stdout)
        assert columns == ["t", "H"]
        assert len(rows) == 11
        assert float(rows[0][0]) == -1.0
        assert float(rows[0][1]) == 0.0
        assert float(rows[-1][0]) == 1.0
        assert float(rows[-1][1]) == 1.0

    def test_header_echoes_resolved_spec(self):
        result = run_cli("solve", "--a", "0.8", "--grid", "11", check=0)
        version, spec = header_spec(result.stdout)
        assert spec["subcommand"] == "solve"
        assert spec["params"]["grid"] == 11
        assert spec["params"]["alpha"]["a"] == 0.8
        assert spec["params"]["theta"] == 0.5

    def test_json_format_carries_no_timestamps(self):
        result = run_cli("solve", "--a", "0.8", "--grid", "5",
                         "--format", "json", check=0)
        doc = json.loads(result.stdout)
        assert set(doc) == {"columns", "metadata", "rows"}
        assert set(doc["metadata"]) == {"spec", "version"}
        assert len(doc["rows"]) == 5

    def test_solver_keywords_agree(self):
        outputs = []
        for keyword in ("odds", "balanced", "closed-form", "decomposition"):
            result = run_cli("solve", "--a", "0.5", "--grid", "21",
                             "--h", keyword, check=0)
            _, rows = csv_rows(result.stdout)
            outputs.append([float(r[1]) for r in rows])
        for other in outputs[1:]:
            assert all(abs(x - y) <= 1e-12 for x, y in zip(outputs[0], other))

    def test_degenerate_ability_exits_two(self):
        result = run_cli("solve", "--a", "0")
        assert result.returncode == 2
        assert result.stderr.strip()

    def test_uniform_limit_opt_in(self):
        result = run_cli("solve", "--a", "0", "--allow-uniform-limit",
                         "--grid", "5", check=0)
        _, rows = csv_rows(result.stdout)
        assert [float(r[1]) for r in rows] == [0.0, 0.25, 0.5, 0.75, 1.0]

    def test_missing_ability_exits_one(self):
        result = run_cli("solve")
        assert result.returncode == 1
        assert "--a" in result.stderr

    def test_config_file_supplies_defaults(self, tmp_path):
        cfg = tmp_path / "alpha.json"
        cfg.write_text(json.dumps({"kind": "linear", "theta": 0.4, "a": 0.7}))
        via_config = run_cli("solve", "--config", str(cfg), "--grid", "11",
                             check=0)
        via_flags = run_cli("solve", "--theta", "0.4", "--a", "0.7",
                            "--grid", "11", check=0)
        assert via_config.stdout == via_flags.stdout

    def test_flags_override_config(self, tmp_path):
        cfg = tmp_path / "alpha.json"
        cfg.write_text(json.dumps({"a": 0.7}))
        overridden = run_cli("solve", "--config", str(cfg), "--a", "0.3",
                             "--grid", "11", check=0)
        direct = run_cli("solve", "--a", "0.3", "--grid", "11", check=0)
        assert overridden.stdout == direct.stdout


class TestVerifyCommand:
    def test_solver_output_verifies_cleanly(self):
        result = run_cli("verify", "--a", "0.6", "--h", "closed-form",
                         "--grid", "101", check=0)
        columns, rows = csv_rows(result.stdout)
        assert columns == ["t", "H", "alpha", "residual"]
        assert len(rows) == 101
        assert max(float(r[3]) for r in rows) <= 1e-12
        assert "# max_residual" in result.stdout

    def test_round_trip_through_table_file(self, tmp_path):
        table = tmp_path / "h.csv"
        solved = run_cli("solve", "--theta", "0.4", "--a", "0.7",
                         "--grid", "2001", check=0)
        table.write_text(solved.stdout)
        result = run_cli("verify", "--theta", "0.4", "--a", "0.7",
                         "--h", str(table), "--grid", "1001",
                         "--tol", "1e-6", check=0)
        assert result.returncode == 0

    def test_tolerance_failure_exits_two(self, tmp_path):
        table = tmp_path / "h.csv"
        solved = run_cli("solve", "--a", "0.7", "--grid", "51", check=0)
        table.write_text(solved.stdout)
        result = run_cli("verify", "--a", "0.9", "--h", str(table),
                         "--grid", "101", "--tol", "1e-10")
        assert result.returncode == 2
        assert "verification failed" in result.stderr

    def test_json_metadata_reports_max_residual(self):
        result = run_cli("verify", "--a", "0.6", "--h", "closed-form",
                         "--grid", "11", "--format", "json", check=0)
        doc = json.loads(result.stdout)
        assert "max_residual" in doc["metadata"]
        assert doc["metadata"]["max_residual"] <= 1e-12

    def test_unreadable_table_exits_one(self):
        result = run_cli("verify", "--a", "0.6", "--h", "/nonexistent/h.csv")
        assert result.returncode == 1


class TestSampleCommand:
    def test_deterministic_rows(self):
        first = run_cli("sample", "--a", "0.5", "--n", "50", "--seed", "9",
                        check=0)
        second = run_cli("sample", "--a", "0.5", "--n", "50", "--seed", "9",
                         check=0)
        assert first.stdout == second.stdout
        _, rows = csv_rows(first.stdout)
        assert len(rows) == 50
        assert all(-1.0 <= float(r[1]) <= 1.0 for r in rows)

    def test_different_seeds_differ(self):
        one = run_cli("sample", "--a", "0.5", "--n", "50", "--seed", "1",
                      check=0)
        two = run_cli("sample", "--a", "0.5", "--n", "50", "--seed", "2",
                      check=0)
        assert one.stdout != two.stdout

    def test_state_b_flag(self):
        result = run_cli("sample", "--a", "1.0", "--state", "B", "--n", "40",
                         "--seed", "4", check=0)
        _, rows = csv_rows(result.stdout)
        draws = [float(r[1]) for r in rows]
        # ability-1 state-B signals lean negative
        assert sum(d < 0 for d in draws) > len(draws) // 2


class TestPosteriorCommand:
    def test_single_signal_row(self):
        result = run_cli("posterior", "--a", "0.5", "--s", "0.5", check=0)
        _, rows = csv_rows(result.stdout)
        assert len(rows) == 1
        assert float(rows[0][1]) == pytest.approx(0.625, abs=1e-15)

    def test_grid_output_is_monotone(self):
        result = run_cli("posterior", "--a", "0.8", "--grid", "41", check=0)
        _, rows = csv_rows(result.stdout)
        ps = [float(r[1]) for r in rows]
        assert len(ps) == 41
        assert all(b > a for a, b in zip(ps, ps[1:]))

    def test_prior_flag_shifts_posterior(self):
        result = run_cli("posterior", "--a", "0.5", "--s", "0", "--theta",
                         "0.3", check=0)
        _, rows = csv_rows(result.stdout)
        assert float(rows[0][1]) == pytest.approx(0.3, abs=1e-15)


class TestJuryCommands:
    def test_exact_known_value(self):
        result = run_cli("exact", "--abilities", "1.0", check=0)
        _, rows = csv_rows(result.stdout)
        assert rows[0][0] == "1"
        assert float(rows[0][1]) == 0.75
        assert rows[0][2] == "exact"
        assert float(rows[0][3]) == 0.0

    def test_simulate_deterministic_and_near_exact(self):
        args = ("simulate", "--abilities", "0.5,0.9,0.1", "--trials", "20000",
                "--seed", "11")
        first = run_cli(*args, check=0)
        second = run_cli(*args, check=0)
        assert first.stdout == second.stdout
        _, rows = csv_rows(first.stdout)
        p_hat, stderr = float(rows[0][1]), float(rows[0][3])
        exact = run_cli("exact", "--abilities", "0.5,0.9,0.1", check=0)
        _, exact_rows = csv_rows(exact.stdout)
        assert abs(p_hat - float(exact_rows[0][1])) <= 3.0 * stderr
        assert rows[0][2] == "monte_carlo"

    def test_even_jury_exits_one(self):
        result = run_cli("exact", "--abilities", "0.5,0.5")
        assert result.returncode == 1
        assert "odd" in result.stderr

    def test_config_file_for_jury(self, tmp_path):
        cfg = tmp_path / "jury.json"
        cfg.write_text(json.dumps({"abilities": [0.5, 0.9, 0.1],
                                   "theta": 0.5}))
        via_config = run_cli("exact", "--config", str(cfg), check=0)
        via_flags = run_cli("exact", "--abilities", "0.5,0.9,0.1", check=0)
        _, config_rows = csv_rows(via_config.stdout)
        _, flag_rows = csv_rows(via_flags.stdout)
        assert config_rows == flag_rows

    def test_order_scan_lists_every_permutation(self):
        result = run_cli("order-scan", "--abilities", "0.9,0.5,0.1", check=0)
        _, rows = csv_rows(result.stdout)
        assert len(rows) == 6
        assert rows[0][0] == "0.5;0.90000000000000002;0.10000000000000001"
        probs = [float(r[1]) for r in rows]
        assert probs == sorted(probs, reverse=True)

    def test_malformed_abilities_exit_one(self):
        result = run_cli("exact", "--abilities", "0.5,high,0.1")
        assert result.returncode == 1


class TestCondorcetCommand:
    def test_known_prefix(self):
        result = run_cli("condorcet", "--p", "0.6", "--n-max", "5", check=0)
        _, rows = csv_rows(result.stdout)
        assert [int(r[0]) for r in rows] == [1, 3, 5]
        values = [float(r[1]) for r in rows]
        assert values[0] == pytest.approx(0.6, abs=1e-12)
        assert values[1] == pytest.approx(0.648, abs=1e-12)
        assert values[2] == pytest.approx(0.68256, abs=1e-12)

    def test_rejects_half_p(self):
        result = run_cli("condorcet", "--p", "0.5", "--n-max", "5")
        assert result.returncode == 1


class TestEntryPoint:
    def test_version_flag(self):
        result = run_cli("--version", check=0)
        assert "tailbalance" in result.stdout

    def test_unknown_command_exits_one(self):
        result = run_cli("frobnicate")
        assert result.returncode != 0

    def test_help_lists_subcommands(self):
        result = run_cli("--help", check=0)
        for name in ("solve", "verify", "sample", "posterior", "simulate",
                     "exact", "order-scan", "condorcet"):
            assert name in result.stdout
