"""End-to-end command-line behavior: exit codes, files, determinism."""

import json

import pytest

from lifelinesim import cli


def run_cli(*argv):
    return cli.main(list(argv))


def read_bytes(path):
    with open(path, "rb") as fh:
        return fh.read()


class TestValidateAndTestbed:
    def test_builtin_is_valid(self, capsys):
        assert run_cli("validate", "--network", "builtin:simple") == 0
        assert "OK: network is valid" in capsys.readouterr().out

    def test_make_testbed_round_trip(self, tmp_path, capsys):
        assert run_cli("make-testbed", "--out", str(tmp_path)) == 0
        path = tmp_path / "simple_testbed.json"
        assert path.exists()
        assert run_cli("validate", "--network", str(path)) == 0
        assert "OK" in capsys.readouterr().out

    def test_invalid_network_lists_violations(self, tmp_path, capsys):
        run_cli("make-testbed", "--out", str(tmp_path))
        path = tmp_path / "simple_testbed.json"
        doc = json.loads(path.read_text())
        doc["dependencies"][0]["target"] = "GHOST"
        path.write_text(json.dumps(doc))
        assert run_cli("validate", "--network", str(path)) == 1
        out = capsys.readouterr().out
        assert "GHOST" in out
        assert "INVALID" in out

    def test_missing_file_is_stage_error(self, tmp_path):
        assert run_cli("validate", "--network", str(tmp_path / "nope.json")) == 1


class TestRun:
    def test_run_writes_three_files(self, tmp_path):
        out = tmp_path / "results"
        code = run_cli(
            "run", "--hazard", "random", "--count", "2", "--seed", "7",
            "--out", str(out),
        )
        assert code == 0
        for name in ("event_table.csv", "performance.csv", "report.json"):
            assert (out / name).exists()
        report = json.loads((out / "report.json").read_text())
        assert report["schema_version"] == 1
        assert report["seed"] == 7
        assert report["strategy"] == "max_flow"
        assert len(report["failures"]) == report["n_events"] // 3
        assert set(report["eoh_hours"]) == {
            "water_pcs", "water_ecs", "power_pcs", "power_ecs", "weighted_pcs",
        }

    def test_no_hazard_means_no_outage(self, tmp_path):
        out = tmp_path / "calm"
        code = run_cli(
            "run", "--hazard", "random", "--count", "3", "--p-hazard", "0.0",
            "--seed", "1", "--sim-horizon", "3600", "--out", str(out),
        )
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        assert report["failures"] == []
        assert all(v == 0.0 for v in report["eoh_hours"].values())
        table = (out / "event_table.csv").read_text().splitlines()
        assert table == ["time_s,component_id,action,crew_id"]

    def test_rerun_is_byte_identical(self, tmp_path):
        args = ("run", "--hazard", "random", "--count", "3", "--seed", "11")
        run_cli(*args, "--out", str(tmp_path / "a"))
        run_cli(*args, "--out", str(tmp_path / "b"))
        for name in ("event_table.csv", "performance.csv", "report.json"):
            assert read_bytes(tmp_path / "a" / name) == read_bytes(tmp_path / "b" / name)

    def test_point_hazard_needs_geometry(self, tmp_path):
        with pytest.raises(SystemExit) as err:
            run_cli("run", "--hazard", "point", "--seed", "1", "--out", str(tmp_path))
        assert err.value.code == 2

    def test_unknown_strategy_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as err:
            run_cli(
                "run", "--hazard", "random", "--count", "1", "--seed", "1",
                "--strategy", "vibes", "--out", str(tmp_path),
            )
        assert err.value.code == 2

    def test_seed_is_required(self, tmp_path):
        with pytest.raises(SystemExit) as err:
            run_cli("run", "--hazard", "random", "--count", "1", "--out", str(tmp_path))
        assert err.value.code == 2


class TestBatch:
    BASE = (
        "batch", "--hazard", "random", "--count", "2", "--seed", "42",
        "--scenarios", "2", "--strategy", "max_flow,zone",
    )

    def test_smoke(self, tmp_path):
        assert run_cli(*self.BASE, "--out", str(tmp_path)) == 0
        lines = (tmp_path / "batch_summary.csv").read_text().splitlines()
        assert lines[0] == (
            "scenario_index,seed,strategy,n_failures,eoh_water,eoh_power,eoh_weighted"
        )
        assert len(lines) == 1 + 2 * 2  # scenarios x strategies
        stats = json.loads((tmp_path / "stats.json").read_text())
        assert stats["schema_version"] == 1
        assert stats["seeds"] == [42, 43]
        assert stats["strategies"] == ["max_flow", "zone"]
        assert stats["failed_scenarios"] == []
        for family in ("water", "power", "weighted"):
            block = stats["networks"][family]
            assert len(block["matrix"]) == 2
            assert block["anova"] is not None
            assert len(block["posthoc"]) == 1
            assert block["posthoc"][0]["strategy_a"] == "max_flow"

    def test_parallel_matches_serial(self, tmp_path):
        run_cli(*self.BASE, "--jobs", "1", "--out", str(tmp_path / "serial"))
        run_cli(*self.BASE, "--jobs", "2", "--out", str(tmp_path / "parallel"))
        for name in ("batch_summary.csv", "stats.json"):
            assert read_bytes(tmp_path / "serial" / name) == read_bytes(
                tmp_path / "parallel" / name
            )

    def test_unknown_strategy_rejected(self, tmp_path):
        with pytest.raises(SystemExit) as err:
            run_cli(
                "batch", "--hazard", "random", "--count", "1", "--seed", "1",
                "--strategy", "max_flow,vibes", "--out", str(tmp_path),
            )
        assert err.value.code == 2

    def test_scenarios_must_be_positive(self, tmp_path):
        with pytest.raises(SystemExit) as err:
            run_cli(
                "batch", "--hazard", "random", "--count", "1", "--seed", "1",
                "--scenarios", "0", "--out", str(tmp_path),
            )
        assert err.value.code == 2
