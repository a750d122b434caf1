import json
import logging
from pathlib import Path
from typing import Tuple

import pandas as pd

from clients.experiment_client import ScanResult, run_scenario
from pipelines.run_config import RunConfig
from registries.standards.model_standards import (
    basis_adiabatic,
    basis_diabatic,
    code_version,
    col_p_e_mean,
    col_p_e_stderr,
    col_p_plus_mean,
    col_p_plus_stderr,
    col_shots,
    csv_float_format,
    format_json,
)

SIDECAR_SUFFIX = ".meta.json"


def output_columns(axis_column: str, basis: str) -> list:
    """Fixed column order of the data file for an output basis."""
    if basis == basis_diabatic:
        return [axis_column, col_p_e_mean, col_p_e_stderr, col_shots]
    if basis == basis_adiabatic:
        return [axis_column, col_p_plus_mean, col_p_plus_stderr, col_shots]
    return [axis_column, col_p_e_mean, col_p_plus_mean, col_p_e_stderr, col_p_plus_stderr, col_shots]


def sidecar_path(data_path) -> Path:
    data_path = Path(data_path)
    return data_path.with_name(data_path.stem + SIDECAR_SUFFIX)


def write_json(path, record: dict) -> None:
    Path(path).write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")


def write_table(frame: pd.DataFrame, path, output_format: str, metadata: dict) -> None:
    """CSV with 17 significant digits, or JSON rows plus metadata."""
    path = Path(path)
    if output_format == format_json:
        write_json(path, {"metadata": metadata, "columns": list(frame.columns), "rows": frame.values.tolist()})
    else:
        frame.to_csv(path, index=False, float_format=csv_float_format)


def run(config: RunConfig) -> Tuple[ScanResult, Path, Path]:
    """
    Runs the configured scenario and writes the data file and its sidecar.

    The sidecar echoes the resolved configuration; passing it back through
    --from-sidecar repeats the run exactly.

    Returns:
        Tuple[ScanResult, Path, Path]: Result, data path, sidecar path.
    """
    scenario = config.to_scenario()
    result = run_scenario(scenario)
    data_path = Path(config.out or f"{scenario.name}.{config.format}")
    frame = result.frame[output_columns(scenario.axis_column, config.basis)]

    metadata = {
        "config": config.to_dict(),
        "scenario": result.metadata["scenario"],
        "seed": config.seed,
        "code_version": code_version,
        "columns": list(frame.columns),
        "coupling_bins": result.metadata["coupling_bins"],
        "steps_s": result.metadata["steps_s"],
    }
    write_table(frame, data_path, config.format, metadata)
    meta_path = sidecar_path(data_path)
    write_json(meta_path, metadata)
    logging.info(f"run: wrote {len(frame)} rows to {data_path} and metadata to {meta_path}")
    return result, data_path, meta_path
