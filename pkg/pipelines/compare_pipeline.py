"""
Fringe-contrast comparison of nondriven Rabi oscillation and slow-passage
destructive interference under the same thermal ensemble and laser noise.
"""
import logging
import math
from pathlib import Path
from typing import Dict, Optional

import numpy as np

import control
from analysis.fringe_analysis import ContrastSeries, FitResult, fit_exponential, fit_linear, fringe_contrast
from clients.experiment_client import Scenario, run_scenario
from models.drive_model import DriveParams
from models.errors import FitDiverged
from pipelines.run_pipeline import write_json
from propagators.propagator import Trace
from registries import preset_registries
from registries.standards.model_standards import code_version, col_p_e_mean, csv_float_format

# (nondriven preset, driven preset) pairs sharing one coupling
COMPARISON_PAIRS = (("rabi-320", "slow-destructive"), ("rabi-400", "slow-destructive-400"))
COMPARISON_BINS = control.COUPLING_BINS
COMPARISON_SAMPLES_PER_PERIOD = 24
# nondriven contrast is taken per Rabi period so the fast thermal decay is resolved
RABI_SAMPLES_PER_WINDOW = 24
# contrast is read to about 1e-2, far above this target
COMPARISON_ACCURACY = 1e-4


def contrast_window(drive: DriveParams) -> float:
    """Driving period for driven presets, bare Rabi period otherwise."""
    return drive.period if drive.is_driven else 1.0 / drive.g_bare


def comparison_times(drive: DriveParams) -> tuple:
    """Whole contrast windows covering SLOW_PERIODS driving periods."""
    if drive.is_driven:
        return preset_registries.detection_times(
            drive.mod_freq_hz, preset_registries.SLOW_PERIODS, COMPARISON_SAMPLES_PER_PERIOD
        )
    window = contrast_window(drive)
    n_windows = int(math.floor(preset_registries.SLOW_PERIODS * drive.period / window + 1e-9))
    return tuple(np.linspace(0.0, n_windows * window, n_windows * RABI_SAMPLES_PER_WINDOW + 1))


def comparison_scenario(name: str, seed: int, coupling_bins: int, jobs: int) -> Scenario:
    """Preset with thermal ensemble, laser noise and projection noise switched on."""
    base = preset_registries.preset(name)
    return base.replace(
        scan_points=comparison_times(base.drive),
        accuracy_target=COMPARISON_ACCURACY,
        noise_enabled=True,
        atoms_per_shot=control.ATOMS_PER_SHOT,
        single_mode=False,
        coupling_bins=coupling_bins,
        seed=seed,
        jobs=jobs,
    )


def contrast_of(scenario: Scenario) -> ContrastSeries:
    """Contrast per contrast_window, times in driving periods."""
    result = run_scenario(scenario)
    p_e = result.frame[col_p_e_mean].to_numpy()
    trace = Trace(times=result.axis_values, p_e=p_e, p_plus=p_e)
    return fringe_contrast(trace, contrast_window(scenario.drive)).scaled(scenario.drive.period)


def initial_decay_rate(result: FitResult) -> float:
    """|d contrast/dt| at t = 0 of offset + D exp(-t/v), per driving period."""
    return abs(result.params["D"]) / result.params["v"]


def compare(
    seed: int = 0,
    coupling_bins: int = COMPARISON_BINS,
    jobs: int = 1,
    out_dir: Optional[str] = None,
) -> Dict[str, dict]:
    """
    Runs each pair, fits the nondriven contrast exponentially and the driven
    contrast linearly, and reports both decay rates per driving period.

    Returns:
        Dict[str, dict]: Report keyed by preset name plus a 'pairs' summary.
    """
    report: Dict[str, dict] = {"code_version": code_version, "seed": seed, "coupling_bins": coupling_bins}
    pairs = []
    for rabi_name, driven_name in COMPARISON_PAIRS:
        rabi_series = contrast_of(comparison_scenario(rabi_name, seed, coupling_bins, jobs))
        driven_series = contrast_of(comparison_scenario(driven_name, seed, coupling_bins, jobs))
        try:
            rabi_fit = fit_exponential(rabi_series)
            rabi_report = rabi_fit.to_dict()
            rabi_rate = initial_decay_rate(rabi_fit)
        except FitDiverged as e:
            logging.warning(f"compare: exponential fit of {rabi_name} diverged: {e}")
            rabi_report, rabi_rate = {"error": str(e)}, math.nan
        driven_fit = fit_linear(driven_series)

        report[rabi_name] = {"contrast": rabi_series.points, "fit": rabi_report}
        report[driven_name] = {"contrast": driven_series.points, "fit": driven_fit.to_dict()}
        pairs.append({
            "nondriven": rabi_name,
            "driven": driven_name,
            "nondriven_initial_rate": rabi_rate,
            "nondriven_fit_converged": bool(rabi_report.get("converged", False)),
            "driven_slope": driven_fit.params["slope"],
            "suppression": rabi_rate / abs(driven_fit.params["slope"]) if driven_fit.params["slope"] else math.inf,
        })
        if out_dir is not None:
            directory = Path(out_dir)
            directory.mkdir(parents=True, exist_ok=True)
            for name, series in ((rabi_name, rabi_series), (driven_name, driven_series)):
                series.to_frame().to_csv(directory / f"contrast_{name}.csv", index=False, float_format=csv_float_format)
    report["pairs"] = pairs
    if out_dir is not None:
        write_json(Path(out_dir) / "comparison.json", report)
    logging.info(f"compare: {len(pairs)} pairs, suppression {[p['suppression'] for p in pairs]}")
    return report
