import json
import math

import numpy as np
import pandas as pd
import pytest

from pipelines import compare_pipeline
from registries.standards.model_standards import (
    col_p_e_mean,
    col_p_e_stderr,
    col_p_plus_mean,
    col_p_plus_stderr,
    col_shots,
    col_time,
)


class TestRunCommand:
    def test_preset_run_writes_scan_and_sidecar(self, cli, tmp_path):
        assert cli("run", "--preset", "fast-constructive") == 0
        frame = pd.read_csv(tmp_path / "fast-constructive.csv", float_precision="round_trip")
        assert list(frame.columns) == [col_time, col_p_e_mean, col_p_e_stderr, col_shots]
        assert len(frame) == 241
        assert frame[col_p_e_mean].between(0.0, 1.0).all()
        metadata = json.loads((tmp_path / "fast-constructive.meta.json").read_text())
        assert metadata["config"]["preset"] == "fast-constructive"
        assert metadata["config"]["amplitude"] == 13.3
        assert "code_version" in metadata

    def test_both_bases(self, cli, tmp_path, small_run_flags):
        assert cli("run", *small_run_flags, "--basis", "both", "--out", "both.csv") == 0
        frame = pd.read_csv(tmp_path / "both.csv", float_precision="round_trip")
        assert list(frame.columns) == [
            col_time, col_p_e_mean, col_p_plus_mean, col_p_e_stderr, col_p_plus_stderr, col_shots,
        ]

    def test_misspelled_config_key(self, cli, tmp_path, capsys):
        (tmp_path / "run.json").write_text(json.dumps({"g_bare": 120.0, "amplitud": 13.3, "mod_freq_hz": 200.0}))
        assert cli("run", "--config", "run.json") == 2
        assert "amplitud" in capsys.readouterr().err

    def test_missing_drive_parameters(self, cli):
        assert cli("run", "--amplitude", 13.3) == 2

    def test_unknown_preset(self, cli):
        assert cli("run", "--preset", "nope") == 2

    def test_output_independent_of_jobs(self, cli, tmp_path, small_run_flags):
        noisy = [*small_run_flags, "--noise", "--shots-per-point", 2, "--atoms-per-shot", 500, "--seed", 4]
        assert cli("run", *noisy, "--jobs", 1, "--out", "serial.csv") == 0
        assert cli("run", *noisy, "--jobs", 2, "--out", "parallel.csv") == 0
        assert (tmp_path / "serial.csv").read_bytes() == (tmp_path / "parallel.csv").read_bytes()
        assert (tmp_path / "serial.meta.json").read_bytes() == (tmp_path / "parallel.meta.json").read_bytes()

    def test_environment_seed(self, cli, tmp_path, small_run_flags, monkeypatch):
        monkeypatch.setenv("LZRO_SEED", "11")
        assert cli("run", *small_run_flags, "--out", "env.csv") == 0
        assert json.loads((tmp_path / "env.meta.json").read_text())["seed"] == 11

    def test_rerun_from_sidecar(self, cli, tmp_path, small_run_flags):
        noisy = [*small_run_flags, "--noise", "--atoms-per-shot", 1000, "--seed", 3]
        assert cli("run", *noisy, "--out", "first.csv") == 0
        assert cli("run", "--from-sidecar", "first.meta.json", "--out", "again.csv") == 0
        assert (tmp_path / "first.csv").read_bytes() == (tmp_path / "again.csv").read_bytes()

    def test_json_output(self, cli, tmp_path, small_run_flags):
        assert cli("run", *small_run_flags, "--format", "json", "--out", "scan.json") == 0
        document = json.loads((tmp_path / "scan.json").read_text())
        assert len(document["rows"]) == 21


class TestOtherCommands:
    def test_presets_listing(self, cli, capsys):
        assert cli("presets") == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 7
        assert lines[0].startswith("fast-constructive:")

    def test_fit_round_trip(self, cli, tmp_path, capsys):
        t = np.linspace(0.5, 9.5, 10)
        pd.DataFrame({"t": t, "contrast": 0.1 + 0.8 * np.exp(-t / 3.0)}).to_csv(tmp_path / "c.csv", index=False)
        assert cli("fit", "c.csv", "--model", "exponential") == 0
        report = json.loads((tmp_path / "c.fit.json").read_text())
        assert report["params"]["v"] == pytest.approx(3.0, rel=1e-6)
        assert json.loads(capsys.readouterr().out)["model"] == "exponential"

    def test_fit_of_empty_file(self, cli, tmp_path):
        (tmp_path / "empty.csv").write_text("")
        assert cli("fit", "empty.csv", "--model", "linear") == 2

    def test_flat_amplitude_sweep(self, cli, tmp_path, small_run_flags, capsys):
        flags = [f if f != 120 else 0 for f in small_run_flags]
        assert cli("sweep", *flags, "--axis", "amplitude", "--start", 10, "--stop", 11, "--count", 3,
                   "--out", "sweep.csv") == 0
        report = json.loads(capsys.readouterr().out.rsplit("}", 1)[0] + "}")
        assert report["grid_extrema"] == []
        assert len(pd.read_csv(tmp_path / "sweep.csv", float_precision="round_trip")) == 3


@pytest.mark.slow
def test_driving_suppresses_contrast_decay(tmp_path):
    report = compare_pipeline.compare(seed=0, out_dir=str(tmp_path))
    for name in ("rabi-320", "rabi-400"):
        fit = report[name]["fit"]
        assert fit["converged"]
        assert all(math.isfinite(v) for v in fit["stderr"].values())
    assert report["rabi-400"]["fit"]["params"]["v"] < report["rabi-320"]["fit"]["params"]["v"]
    for pair in report["pairs"]:
        assert pair["nondriven_fit_converged"]
        assert 3 * abs(pair["driven_slope"]) <= pair["nondriven_initial_rate"]
        assert pair["suppression"] >= 3
    assert (tmp_path / "comparison.json").exists()
    assert (tmp_path / "contrast_rabi-320.csv").exists()
