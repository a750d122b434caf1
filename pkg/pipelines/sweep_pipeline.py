import logging
import math
from pathlib import Path
from typing import List, Tuple

import numpy as np
import pandas as pd

from clients.experiment_client import run_scenario
from models.errors import NoCrossing
from pipelines.run_config import RunConfig
from pipelines.run_pipeline import sidecar_path, write_json, write_table
from propagators.transfer_matrix_propagator import interference_extrema, period_transfer
from registries.standards.model_standards import (
    axis_detection_time,
    axis_detuning,
    code_version,
    col_final_p_e,
    col_p_e_mean,
    col_period_transfer,
    col_sweep_value,
    kind_constructive,
    kind_destructive,
    sweep_amplitude,
    sweep_detuning,
)

SWEEP_AXES = (sweep_amplitude, sweep_detuning)


def grid_extrema(values: np.ndarray, response: np.ndarray) -> List[Tuple[float, str]]:
    """Interior local maxima (constructive) and minima (destructive) of a sampled response."""
    extrema = []
    for i in range(1, len(values) - 1):
        before, here, after = response[i - 1], response[i], response[i + 1]
        if np.isnan(before) or np.isnan(here) or np.isnan(after):
            continue
        if here > before and here >= after:
            extrema.append((float(values[i]), kind_constructive))
        elif here < before and here <= after:
            extrema.append((float(values[i]), kind_destructive))
    return extrema


def _period_transfer(drive, coupling) -> float:
    try:
        return period_transfer(drive, coupling)
    except NoCrossing:
        return math.nan


def sweep(config: RunConfig, axis: str, start: float, stop: float, count: int) -> Tuple[pd.DataFrame, dict]:
    """
    One row per sweep value: final-time p_e from the full scenario and the
    one-period transfer of the adiabatic-impulse model.

    The final time is the last detection time of the configured scan (or its
    detection_time for detuning scans). Amplitude sweeps also report the
    refined extrema from interference_extrema next to the grid extrema.

    Returns:
        Tuple[pd.DataFrame, dict]: Summary table and report.
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"axis must be one of {SWEEP_AXES}, got {axis!r}")
    if count < 2 or not stop > start:
        raise ValueError(f"Need count >= 2 and stop > start, got [{start}, {stop}] x {count}")
    scenario = config.to_scenario()
    values = np.linspace(start, stop, count)
    if scenario.scan_axis == axis_detection_time:
        final_time = scenario.scan_points[-1]
    else:
        final_time = scenario.detection_time

    final_p_e, transfer = [], []
    if axis == sweep_amplitude:
        if start < 0:
            raise ValueError(f"Amplitudes must be >= 0, got start={start}")
        for amplitude in values:
            drive = scenario.drive.replace(amplitude=float(amplitude))
            point = scenario.replace(drive=drive, scan_axis=axis_detection_time, scan_points=(final_time,))
            final_p_e.append(float(run_scenario(point).frame[col_p_e_mean].iloc[0]))
            transfer.append(_period_transfer(drive, drive.g_bare))
    else:
        scan = scenario.replace(scan_axis=axis_detuning, scan_points=tuple(values), detection_time=final_time)
        final_p_e = run_scenario(scan).frame[col_p_e_mean].tolist()
        for detuning in values:
            shifted = scenario.drive.replace(static_detuning=float(detuning))
            transfer.append(_period_transfer(shifted, shifted.g_bare))

    frame = pd.DataFrame({
        col_sweep_value: values,
        col_final_p_e: final_p_e,
        col_period_transfer: transfer,
    })
    report = {
        "axis": axis,
        "range": [float(start), float(stop)],
        "count": int(count),
        "final_time_s": final_time,
        "grid_extrema": grid_extrema(values, np.asarray(transfer, dtype=float)),
        "final_p_e_extrema": grid_extrema(values, np.asarray(final_p_e, dtype=float)),
    }
    if axis == sweep_amplitude and start > 0:
        drive = scenario.drive
        report["analytic_extrema"] = interference_extrema(
            drive.g_bare, drive.mod_freq, drive.static_detuning, (float(start), float(stop)),
            initial_phase=drive.initial_phase,
        )
    logging.info(f"sweep: {count} {axis} values, grid extrema {report['grid_extrema']}")
    return frame, report


def run_sweep(config: RunConfig, axis: str, start: float, stop: float, count: int) -> Tuple[pd.DataFrame, dict, Path]:
    """Runs sweep and writes the table plus a sidecar holding the report."""
    frame, report = sweep(config, axis, start, stop, count)
    data_path = Path(config.out or f"sweep_{axis}.{config.format}")
    metadata = {"config": config.to_dict(), "code_version": code_version, "sweep": report}
    write_table(frame, data_path, config.format, metadata)
    write_json(sidecar_path(data_path), metadata)
    return frame, report, data_path
