import json
import subprocess
import sys

import pytest

from korovkin_lab.cli import main, run, validate_config
from korovkin_lab.scenarios import REGISTRY

ALL_SCENARIOS = sorted(REGISTRY)


class TestValidation:
    def test_missing_scenario(self):
        cfg, errors = validate_config({})
        assert cfg is None
        assert "scenario: required" in errors

    def test_unknown_scenario_lists_registry(self):
        _, errors = validate_config({"scenario": "lebesgue"})
        assert any("bernstein-classical" in e for e in errors)

    def test_negative_tau(self):
        _, errors = validate_config({"scenario": "bernstein-classical",
                                     "tau": -1})
        assert "tau: must be positive" in errors

    def test_errors_are_aggregated(self):
        _, errors = validate_config({"tau": -1, "N": 3, "seed": "x"})
        assert len(errors) >= 4  # scenario, tau, N, seed

    def test_unknown_field_flagged(self):
        _, errors = validate_config({"scenario": "bernstein-classical",
                                     "verbosity": 3})
        assert "verbosity: unknown field" in errors

    def test_minimal_config_gets_defaults(self):
        cfg, errors = validate_config({"scenario": "bernstein-classical"})
        assert errors == []
        assert cfg.N == 200 and cfg.tau == 0.02 and cfg.grid_m == 200
        assert cfg.seed == 0 and cfg.n0 == 0

    def test_overrides_survive(self):
        cfg, errors = validate_config({"scenario": "statistical-counterexample",
                                       "N": 500, "epsilon": 0.25})
        assert errors == []
        assert cfg.N == 500 and cfg.epsilon == 0.25

    def test_bad_method_spec_reported_with_path(self):
        _, errors = validate_config({"scenario": "bernstein-classical",
                                     "method": {"kind": "banach"}})
        assert any(e.startswith("method:") for e in errors)


def run_scenario(name, tmp_path, **overrides):
    cfg, errors = validate_config({"scenario": name,
                                   "output_dir": str(tmp_path / name),
                                   **overrides})
    assert errors == [], errors
    return run(cfg), tmp_path / name


class TestScenarioRuns:
    @pytest.mark.parametrize("name", ALL_SCENARIOS)
    def test_default_run_exits_zero(self, name, tmp_path):
        code, out = run_scenario(name, tmp_path)
        assert code == 0
        assert (out / "report.json").exists()
        assert (out / "summary.txt").exists()
        report = json.loads((out / "report.json").read_text())
        assert report["matched"] is True
        assert report["verdicts"] == report["expected"]

    def test_counterexample_report_content(self, tmp_path):
        code, out = run_scenario("statistical-counterexample", tmp_path, N=2000)
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        detail = report["detail"]
        assert detail["statistical_residuals"]["e0"] == 44 / 2000
        assert detail["norm_verdicts"]["e0"] == "inconsistent"
        csv = (out / "squares_e0.csv").read_text().splitlines()
        assert csv[0] == "n,residual"
        assert csv[1].startswith("1,")

    def test_regularity_mismatch_exits_two(self, tmp_path, capsys):
        cfg, _ = validate_config({"scenario": "regularity-audit",
                                  "operator": "doubled-cesaro",
                                  "output_dir": str(tmp_path / "reg")})
        assert run(cfg) == 2
        summary = (tmp_path / "reg" / "summary.txt").read_text()
        assert "condition (iii)" in summary
        assert "doubled-cesaro" in summary

    def test_unknown_matrix_is_config_error(self, tmp_path):
        cfg, _ = validate_config({"scenario": "regularity-audit",
                                  "operator": "hilbert",
                                  "output_dir": str(tmp_path / "reg")})
        assert run(cfg) == 1

    def test_deterministic_outputs(self, tmp_path):
        _, out_a = run_scenario("cesaro-matrix", tmp_path / "a")
        _, out_b = run_scenario("cesaro-matrix", tmp_path / "b")
        rep_a = json.loads((out_a / "report.json").read_text())
        rep_b = json.loads((out_b / "report.json").read_text())
        rep_a["config"]["output_dir"] = rep_b["config"]["output_dir"]
        assert json.dumps(rep_a, sort_keys=True) == json.dumps(rep_b, sort_keys=True)
        assert (out_a / "matrix_mean.csv").read_bytes() == \
            (out_b / "matrix_mean.csv").read_bytes()

    def test_same_config_same_bytes(self, tmp_path):
        _, out_a = run_scenario("almost-alternating", tmp_path / "x")
        first = (out_a / "report.json").read_bytes()
        code, _ = run_scenario("almost-alternating", tmp_path / "x")
        assert code == 0
        assert (out_a / "report.json").read_bytes() == first


class TestCliEntryPoints:
    def _write(self, tmp_path, payload):
        p = tmp_path / "config.json"
        p.write_text(json.dumps(payload))
        return str(p)

    def test_list_scenarios(self, capsys):
        assert main(["list-scenarios"]) == 0
        text = capsys.readouterr().out
        for name in ALL_SCENARIOS:
            assert name in text

    def test_validate_prints_normalized(self, tmp_path, capsys):
        cfgfile = self._write(tmp_path, {"scenario": "cesaro-matrix"})
        assert main(["validate", "--config", cfgfile]) == 0
        normalized = json.loads(capsys.readouterr().out)
        assert normalized["N"] == 500 and normalized["tau"] == 0.01

    def test_validate_rejects(self, tmp_path, capsys):
        cfgfile = self._write(tmp_path, {"scenario": "cesaro-matrix", "tau": -2})
        assert main(["validate", "--config", cfgfile]) == 1
        assert "tau: must be positive" in capsys.readouterr().err

    def test_run_with_output_dir_flag(self, tmp_path):
        cfgfile = self._write(tmp_path, {"scenario": "regularity-audit"})
        out = tmp_path / "flagged"
        assert main(["run", "--config", cfgfile,
                     "--output-dir", str(out)]) == 0
        assert (out / "report.json").exists()

    def test_missing_config_file(self, tmp_path, capsys):
        assert main(["run", "--config", str(tmp_path / "nope.json")]) == 1
        assert "cannot read" in capsys.readouterr().err

    def test_invalid_json(self, tmp_path, capsys):
        p = tmp_path / "broken.json"
        p.write_text("{not json")
        assert main(["validate", "--config", str(p)]) == 1
        assert "invalid JSON" in capsys.readouterr().err

    def test_threads_env_validated(self, tmp_path, monkeypatch, capsys):
        cfgfile = self._write(tmp_path, {"scenario": "regularity-audit",
                                         "output_dir": str(tmp_path / "o")})
        monkeypatch.setenv("KOROVKIN_LAB_THREADS", "-3")
        assert main(["run", "--config", cfgfile]) == 1
        monkeypatch.setenv("KOROVKIN_LAB_THREADS", "4")
        assert main(["run", "--config", cfgfile]) == 0
        report = json.loads((tmp_path / "o" / "report.json").read_text())
        assert report["threads"] == 4

    def test_console_script_installed(self):
        proc = subprocess.run([sys.executable, "-m", "korovkin_lab.cli",
                               "list-scenarios"], capture_output=True, text=True)
        assert proc.returncode == 0
        assert "fejer-trig" in proc.stdout
