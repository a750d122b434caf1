"""
Flat key-value run configuration shared by every subcommand.

Values are resolved with the precedence flag > environment > file > preset > defaults.
Every key below is also a command-line flag (underscores become dashes).
"""
import dataclasses
import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

import numpy as np

import control
from clients.experiment_client import BASES, SCAN_AXES, Scenario
from ensembles.lattice_ensemble import LatticeConfig
from models.drive_model import DriveParams
from models.errors import ConfigError
from noise.drift_noise import DriftModel
from registries import preset_registries
from registries.standards.model_standards import (
    axis_detection_time,
    axis_detuning,
    basis_diabatic,
    format_csv,
    format_json,
)

ENV_SEED = "LZRO_SEED"
ENV_JOBS = "LZRO_JOBS"
FORMATS = (format_csv, format_json)

DEFAULT_PERIODS = 4
DEFAULT_SAMPLES_PER_PERIOD = 40

# key -> (type, help); list means a list of floats
FIELDS: Dict[str, tuple] = {
    "preset": (str, "Compiled-in scenario to start from"),
    "g_bare": (float, "Bare Rabi coupling g in Hz"),
    "amplitude": (float, "Modulation index A"),
    "mod_freq_hz": (float, "Modulation frequency f_s in Hz"),
    "static_detuning": (float, "Clock laser detuning in Hz"),
    "initial_phase": (float, "Drive phase at t = 0 in rad"),
    "eta_z": (float, "Longitudinal Lamb-Dicke parameter"),
    "eta_x": (float, "Transverse Lamb-Dicke parameter"),
    "temp_z": (float, "Axial temperature in K"),
    "temp_x": (float, "Radial temperature in K"),
    "trap_freq_z": (float, "Axial trap frequency in Hz"),
    "trap_freq_x": (float, "Radial trap frequency in Hz"),
    "n_max_z": (int, "Initial axial ladder truncation"),
    "n_max_x": (int, "Initial radial ladder truncation"),
    "linear_rate": (float, "Laser drift rate in Hz/s"),
    "compensation_rate": (float, "Drift compensation rate in Hz/s"),
    "compensation_step_period": (float, "Seconds between compensation updates"),
    "quadratic_residual": (float, "Non-linear drift in Hz/s^2"),
    "shot_jitter_sigma": (float, "Per-shot frequency jitter in Hz"),
    "scan_axis": (str, "detection_time or detuning"),
    "scan_points": (list, "Explicit scan points (s or Hz)"),
    "n_periods": (int, "Detection-time grid length in driving periods"),
    "samples_per_period": (int, "Detection-time samples per driving period"),
    "scan_start": (float, "First detuning of a detuning scan in Hz"),
    "scan_stop": (float, "Last detuning of a detuning scan in Hz"),
    "scan_count": (int, "Number of detunings in a detuning scan"),
    "detection_time": (float, "Interrogation time of detuning scans in s"),
    "shots_per_point": (int, "Shots per scan point"),
    "atoms_per_shot": (int, "Atoms per shot for projection noise (omit for the exact mean)"),
    "basis": (str, "diabatic, adiabatic or both"),
    "noise": (bool, "Apply laser drift and jitter"),
    "single_mode": (bool, "Evolve only the (0, 0) motional mode"),
    "cycle_duration": (float, "Wall-clock seconds per shot"),
    "seed": (int, "Seed of every random stream"),
    "jobs": (int, "Worker processes"),
    "coupling_bins": (int, "Coupling bins of the thermal ensemble (0 = every mode)"),
    "accuracy_target": (float, "Propagator self-convergence target"),
    "out": (str, "Output data file"),
    "format": (str, "csv or json"),
}

# keys not echoed into output metadata, so outputs do not depend on them
EXECUTION_KEYS = ("jobs", "out")


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved configuration. Build it with resolve_config."""
    g_bare: float
    amplitude: float
    mod_freq_hz: float
    scan_points: tuple
    static_detuning: float = 0.0
    initial_phase: float = 0.0
    preset: Optional[str] = None
    eta_z: float = LatticeConfig.eta_z
    eta_x: float = LatticeConfig.eta_x
    temp_z: float = LatticeConfig.temp_z
    temp_x: float = LatticeConfig.temp_x
    trap_freq_z: float = LatticeConfig.trap_freq_z
    trap_freq_x: float = LatticeConfig.trap_freq_x
    n_max_z: int = LatticeConfig.n_max_z
    n_max_x: int = LatticeConfig.n_max_x
    linear_rate: float = DriftModel.linear_rate
    compensation_rate: float = DriftModel.compensation_rate
    compensation_step_period: float = DriftModel.compensation_step_period
    quadratic_residual: float = DriftModel.quadratic_residual
    shot_jitter_sigma: float = DriftModel.shot_jitter_sigma
    scan_axis: str = axis_detection_time
    detection_time: Optional[float] = None
    shots_per_point: int = 1
    atoms_per_shot: Optional[int] = None
    basis: str = basis_diabatic
    noise: bool = False
    single_mode: bool = False
    cycle_duration: float = control.CYCLE_DURATION
    seed: int = 0
    jobs: int = control.JOBS
    coupling_bins: int = control.COUPLING_BINS
    accuracy_target: float = control.ACCURACY_TARGET
    out: Optional[str] = None
    format: str = format_csv

    def to_scenario(self) -> Scenario:
        """
        Raises:
            ConfigError: If a value is rejected by the model types.
        """
        try:
            return Scenario(
                drive=DriveParams.from_hz(
                    self.g_bare, self.amplitude, self.mod_freq_hz, self.static_detuning, self.initial_phase
                ),
                lattice=LatticeConfig(
                    eta_z=self.eta_z, eta_x=self.eta_x, temp_z=self.temp_z, temp_x=self.temp_x,
                    trap_freq_z=self.trap_freq_z, trap_freq_x=self.trap_freq_x,
                    n_max_z=self.n_max_z, n_max_x=self.n_max_x,
                ),
                drift=DriftModel(
                    linear_rate=self.linear_rate,
                    compensation_rate=self.compensation_rate,
                    compensation_step_period=self.compensation_step_period,
                    quadratic_residual=self.quadratic_residual,
                    shot_jitter_sigma=self.shot_jitter_sigma,
                    seed=self.seed,
                ),
                scan_axis=self.scan_axis,
                scan_points=self.scan_points,
                shots_per_point=self.shots_per_point,
                atoms_per_shot=self.atoms_per_shot,
                basis_out=self.basis,
                detection_time=self.detection_time,
                noise_enabled=self.noise,
                single_mode=self.single_mode,
                cycle_duration=self.cycle_duration,
                seed=self.seed,
                jobs=self.jobs,
                coupling_bins=self.coupling_bins,
                accuracy_target=self.accuracy_target,
                name=self.preset or "custom",
            )
        except ValueError as e:
            raise ConfigError(str(e)) from e

    def to_dict(self, include_execution: bool = False) -> dict:
        values = dataclasses.asdict(self)
        values["scan_points"] = list(self.scan_points)
        if not include_execution:
            for key in EXECUTION_KEYS:
                values.pop(key, None)
        return values


def _scenario_values(scenario: Scenario) -> dict:
    drive, lattice, drift = scenario.drive, scenario.lattice, scenario.drift
    return {
        "g_bare": drive.g_bare,
        "amplitude": drive.amplitude,
        "mod_freq_hz": drive.mod_freq_hz,
        "static_detuning": drive.static_detuning,
        "initial_phase": drive.initial_phase,
        **lattice.to_dict(),
        "linear_rate": drift.linear_rate,
        "compensation_rate": drift.compensation_rate,
        "compensation_step_period": drift.compensation_step_period,
        "quadratic_residual": drift.quadratic_residual,
        "shot_jitter_sigma": drift.shot_jitter_sigma,
        "scan_axis": scenario.scan_axis,
        "scan_points": scenario.scan_points,
        "detection_time": scenario.detection_time,
        "shots_per_point": scenario.shots_per_point,
        "atoms_per_shot": scenario.atoms_per_shot,
        "basis": scenario.basis_out,
        "noise": scenario.noise_enabled,
        "single_mode": scenario.single_mode,
        "cycle_duration": scenario.cycle_duration,
        "coupling_bins": scenario.coupling_bins,
        "accuracy_target": scenario.accuracy_target,
    }


def _check_value(key: str, value: Any) -> Any:
    if key not in FIELDS:
        raise ConfigError("unknown configuration key", field=key)
    kind = FIELDS[key][0]
    if value is None and key in ("atoms_per_shot", "detection_time", "out", "preset"):
        return None
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"expected true/false, got {value!r}", field=key)
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"expected an integer, got {value!r}", field=key)
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"expected a number, got {value!r}", field=key)
        return float(value)
    if kind is list:
        if not isinstance(value, (list, tuple)) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
        ):
            raise ConfigError("expected a list of numbers", field=key)
        return tuple(float(v) for v in value)
    if not isinstance(value, str):
        raise ConfigError(f"expected a string, got {value!r}", field=key)
    return value


def validate_values(values: Mapping[str, Any]) -> Dict[str, Any]:
    """Type-checks a flat mapping; unknown keys are rejected."""
    return {key: _check_value(key, value) for key, value in values.items()}


def load_config_file(path) -> Dict[str, Any]:
    """
    Reads a flat JSON object.

    Raises:
        ConfigError: On unreadable files, syntax errors (with line number),
            non-object documents and unknown keys.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e.strerror}") from e
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON: {e.msg}", line=e.lineno) from e
    if not isinstance(document, dict):
        raise ConfigError("config file must hold a JSON object")
    return validate_values(document)


def load_sidecar(path) -> Dict[str, Any]:
    """Resolved configuration echoed by a previous run."""
    path = Path(path)
    try:
        document = json.loads(path.read_text())
    except OSError as e:
        raise ConfigError(f"cannot read sidecar {path}: {e.strerror}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON: {e.msg}", line=e.lineno) from e
    if not isinstance(document, dict) or not isinstance(document.get("config"), dict):
        raise ConfigError("sidecar has no 'config' record", field="config")
    return validate_values(document["config"])


def env_overrides(environ: Optional[Mapping[str, str]] = None) -> Dict[str, Any]:
    """seed and jobs from LZRO_SEED / LZRO_JOBS when set."""
    environ = os.environ if environ is None else environ
    values = {}
    for variable, key in ((ENV_SEED, "seed"), (ENV_JOBS, "jobs")):
        raw = environ.get(variable)
        if raw is None or raw == "":
            continue
        try:
            values[key] = int(raw)
        except ValueError:
            raise ConfigError(f"{variable} must be an integer, got {raw!r}", field=key) from None
    return values


def _scan_points(merged: Dict[str, Any], base: Dict[str, Any]) -> tuple:
    if "scan_points" in merged:
        return merged["scan_points"]
    axis = merged.get("scan_axis", base.get("scan_axis", axis_detection_time))
    if axis == axis_detuning:
        if all(k in merged for k in ("scan_start", "scan_stop", "scan_count")):
            if merged["scan_count"] < 1:
                raise ConfigError("must be >= 1", field="scan_count")
            return tuple(np.linspace(merged["scan_start"], merged["scan_stop"], merged["scan_count"]))
        if base.get("scan_axis") == axis_detuning and "scan_points" in base:
            return base["scan_points"]
        raise ConfigError("detuning scans need scan_points or scan_start/scan_stop/scan_count", field="scan_points")
    regrid = any(k in merged for k in ("n_periods", "samples_per_period", "mod_freq_hz"))
    if "scan_points" in base and base.get("scan_axis") == axis_detection_time and not regrid:
        return base["scan_points"]
    n_periods = merged.get("n_periods", DEFAULT_PERIODS)
    samples = merged.get("samples_per_period", DEFAULT_SAMPLES_PER_PERIOD)
    if n_periods < 1:
        raise ConfigError("must be >= 1", field="n_periods")
    if samples < 1:
        raise ConfigError("must be >= 1", field="samples_per_period")
    mod_freq_hz = merged.get("mod_freq_hz", base.get("mod_freq_hz"))
    return preset_registries.detection_times(mod_freq_hz, n_periods, samples)


def resolve_config(
    file_values: Optional[Mapping[str, Any]] = None,
    env_values: Optional[Mapping[str, Any]] = None,
    flag_values: Optional[Mapping[str, Any]] = None,
) -> RunConfig:
    """
    Merges the layers (flag > env > file > preset > defaults) into a RunConfig.

    Raises:
        ConfigError: On unknown keys, bad values or missing drive parameters.
        UnknownPreset: If the preset name is not registered.
    """
    merged: Dict[str, Any] = {}
    for layer in (file_values, env_values, flag_values):
        if layer:
            merged.update(validate_values({k: v for k, v in layer.items() if v is not None}))

    base: Dict[str, Any] = {}
    if merged.get("preset"):
        base = _scenario_values(preset_registries.preset(merged["preset"]))

    for key in ("g_bare", "amplitude", "mod_freq_hz"):
        if key not in merged and key not in base:
            raise ConfigError("required without a preset", field=key)
    if merged.get("scan_axis", axis_detection_time) not in SCAN_AXES:
        raise ConfigError(f"must be one of {SCAN_AXES}", field="scan_axis")
    if merged.get("basis", basis_diabatic) not in BASES:
        raise ConfigError(f"must be one of {BASES}", field="basis")
    if merged.get("format", format_csv) not in FORMATS:
        raise ConfigError(f"must be one of {FORMATS}", field="format")

    values = {**base, **merged}
    values["scan_points"] = _scan_points(merged, base)
    for key in ("n_periods", "samples_per_period", "scan_start", "scan_stop", "scan_count"):
        values.pop(key, None)
    config = RunConfig(**values)
    logging.info(f"resolved config: preset={config.preset}, {len(config.scan_points)} scan points")
    return config


def config_keys() -> List[str]:
    return list(FIELDS)
