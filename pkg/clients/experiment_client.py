import dataclasses
import logging
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

import control
from ensembles.lattice_ensemble import (
    CouplingBin,
    LatticeConfig,
    bin_modes,
    ensemble_average,
    ground_mode,
    thermal_weights,
)
from models.drive_model import DriveParams, QubitState, eigen_frame
from noise.drift_noise import DriftModel, projection_noise_sample, sample_shot_offset
from propagators.midpoint_propagator import choose_step
from propagators.propagator import constant_offset
from registries import propagator_registries
from registries.standards.model_standards import (
    axis_detection_time,
    axis_detuning,
    basis_adiabatic,
    basis_both,
    basis_diabatic,
    code_version,
    col_detuning,
    col_p_e_mean,
    col_p_e_stderr,
    col_p_plus_mean,
    col_p_plus_stderr,
    col_shots,
    col_time,
)

SCAN_AXES = (axis_detection_time, axis_detuning)
BASES = (basis_diabatic, basis_adiabatic, basis_both)


@dataclass(frozen=True)
class Scenario:
    """
    One simulated measurement: a scan over detection time or laser detuning.

    Attributes:
        drive (DriveParams): Drive parameters; drive.static_detuning is the
            detuning of detection-time scans.
        lattice (LatticeConfig): Motional ensemble.
        drift (DriftModel): Laser drift and jitter, used when noise_enabled.
        scan_axis (str): axis_detection_time or axis_detuning.
        scan_points (tuple): Detection times in s or detunings in Hz, strictly increasing.
        shots_per_point (int): Repetitions per scan point.
        atoms_per_shot (int, optional): Atoms for projection noise; None gives the noise-free mean.
        basis_out (str): basis_diabatic, basis_adiabatic or basis_both.
        detection_time (float, optional): Interrogation time of detuning scans.
        noise_enabled (bool): Apply drift and jitter offsets per shot.
        single_mode (bool): Use only the (0, 0) motional mode.
        cycle_duration (float): Wall-clock seconds per shot.
        seed (int): Seed of every random stream of the run.
        jobs (int): Worker processes.
        coupling_bins (int): Bins for the thermal ensemble; 0 evolves every mode.
        accuracy_target (float): Propagator self-convergence target.
        name (str): Preset name or "custom".
    """
    drive: DriveParams
    lattice: LatticeConfig = field(default_factory=LatticeConfig)
    drift: DriftModel = field(default_factory=DriftModel)
    scan_axis: str = axis_detection_time
    scan_points: Tuple[float, ...] = ()
    shots_per_point: int = 1
    atoms_per_shot: Optional[int] = None
    basis_out: str = basis_diabatic
    detection_time: Optional[float] = None
    noise_enabled: bool = False
    single_mode: bool = False
    cycle_duration: float = control.CYCLE_DURATION
    seed: int = 0
    jobs: int = control.JOBS
    coupling_bins: int = control.COUPLING_BINS
    accuracy_target: float = control.ACCURACY_TARGET
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "scan_points", tuple(float(p) for p in self.scan_points))
        if self.scan_axis not in SCAN_AXES:
            raise ValueError(f"scan_axis must be one of {SCAN_AXES}, got {self.scan_axis!r}")
        if self.basis_out not in BASES:
            raise ValueError(f"basis_out must be one of {BASES}, got {self.basis_out!r}")
        if not self.scan_points:
            raise ValueError("scan_points must not be empty")
        if any(b <= a for a, b in zip(self.scan_points, self.scan_points[1:])):
            raise ValueError("scan_points must be strictly increasing")
        if self.scan_axis == axis_detection_time and self.scan_points[0] < 0:
            raise ValueError("Detection times must be >= 0")
        if self.scan_axis == axis_detuning and (self.detection_time is None or self.detection_time <= 0):
            raise ValueError("Detuning scans need a detection_time > 0")
        if self.shots_per_point < 1:
            raise ValueError(f"shots_per_point must be >= 1, got {self.shots_per_point}")
        if self.atoms_per_shot is not None and self.atoms_per_shot < 1:
            raise ValueError(f"atoms_per_shot must be >= 1 or None, got {self.atoms_per_shot}")
        if self.cycle_duration <= 0:
            raise ValueError(f"cycle_duration must be > 0, got {self.cycle_duration}")
        if self.jobs < 1:
            raise ValueError(f"jobs must be >= 1, got {self.jobs}")

    def replace(self, **changes) -> "Scenario":
        return dataclasses.replace(self, **changes)

    @property
    def axis_column(self) -> str:
        return col_time if self.scan_axis == axis_detection_time else col_detuning

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "drive": self.drive.to_dict(),
            "lattice": self.lattice.to_dict(),
            "drift": self.drift.to_dict(),
            "scan_axis": self.scan_axis,
            "scan_points": list(self.scan_points),
            "shots_per_point": self.shots_per_point,
            "atoms_per_shot": self.atoms_per_shot,
            "basis_out": self.basis_out,
            "detection_time": self.detection_time,
            "noise_enabled": self.noise_enabled,
            "single_mode": self.single_mode,
            "cycle_duration": self.cycle_duration,
            "seed": self.seed,
            "coupling_bins": self.coupling_bins,
            "accuracy_target": self.accuracy_target,
        }


@dataclass
class ScanResult:
    """Per-point shot statistics of a scenario plus the metadata that reproduces it."""
    frame: pd.DataFrame
    metadata: dict

    @property
    def axis_values(self) -> np.ndarray:
        return self.frame.iloc[:, 0].to_numpy()

    @property
    def p_e_mean(self) -> np.ndarray:
        return self.frame[col_p_e_mean].to_numpy()

    @property
    def p_plus_mean(self) -> np.ndarray:
        return self.frame[col_p_plus_mean].to_numpy()

    @property
    def p_e_stderr(self) -> np.ndarray:
        return self.frame[col_p_e_stderr].to_numpy()


@dataclass(frozen=True)
class _Task:
    drive: DriveParams
    times: Tuple[float, ...]
    offset: float
    bins: Tuple[CouplingBin, ...]
    steps: Tuple[float, ...]


def to_adiabatic(
    state_or_p_e: Union[QubitState, np.ndarray, float],
    drive: DriveParams,
    coupling: float,
    t: float,
    extra_offset: float = 0.0,
) -> Tuple[float, float]:
    """
    Adiabatic populations (p_minus, p_plus) at time t.

    A QubitState or amplitude vector is projected coherently. A bare excited
    population is treated as an incoherent mixture of |g> and |e>.

    Raises:
        DegenerateFrame: If coupling and detuning both vanish at t.
    """
    frame = eigen_frame(t, drive, abs(coupling), extra_offset)
    if isinstance(state_or_p_e, QubitState):
        vector = state_or_p_e.as_vector()
    elif np.ndim(state_or_p_e) == 0:
        p_e = float(state_or_p_e)
        if not 0 <= p_e <= 1:
            raise ValueError(f"p_e must be in [0, 1], got {p_e}")
        weight_e = np.cos(0.5 * frame.mixing_angle) ** 2
        p_plus = p_e * weight_e + (1.0 - p_e) * (1.0 - weight_e)
        return 1.0 - p_plus, p_plus
    else:
        vector = np.asarray(state_or_p_e, dtype=complex)
        norm = float(np.vdot(vector, vector).real)
        if abs(norm - 1.0) > QubitState.NORM_TOLERANCE:
            raise ValueError(f"State is not normalized (|psi|^2 = {norm})")
    p_plus = float(abs(frame.upper_vector() @ vector) ** 2)
    return 1.0 - p_plus, p_plus


def scenario_bins(scenario: Scenario) -> List[CouplingBin]:
    """Couplings evolved for the scenario's ensemble, with their weights."""
    g_bare = scenario.drive.g_bare
    if scenario.single_mode:
        modes = ground_mode(scenario.lattice, g_bare)
    else:
        modes = thermal_weights(scenario.lattice, g_bare)
    bins = bin_modes(modes, scenario.coupling_bins)
    logging.info(f"scenario {scenario.name}: {len(modes)} motional modes in {len(bins)} coupling bins")
    return bins


def _evaluate(task: _Task) -> Tuple[np.ndarray, np.ndarray]:
    """Ensemble-mean (p_e, p_plus) at task.times under a constant offset."""
    offset_fn = constant_offset(task.offset)
    traces = []
    for bin_, dt in zip(task.bins, task.steps):
        propagator = propagator_registries.trace_propagator_class(dt=dt)
        traces.append((bin_.weight, propagator.run_trace(task.drive, bin_.coupling, task.times, offset_fn)))
    mean = ensemble_average(traces)
    return mean.p_e, mean.p_plus


def _map(tasks: List[_Task], jobs: int) -> list:
    if jobs > 1 and len(tasks) > 1:
        with Pool(processes=min(jobs, len(tasks))) as pool:
            return pool.map(_evaluate, tasks)
    return [_evaluate(task) for task in tasks]


def _step_sizes(scenario: Scenario, bins: Sequence[CouplingBin], horizon: float) -> Tuple[float, ...]:
    steps = []
    cache = {}
    for bin_ in bins:
        if bin_.coupling not in cache:
            cache[bin_.coupling] = choose_step(
                scenario.drive, bin_.coupling, scenario.accuracy_target, horizon=horizon
            )
        steps.append(cache[bin_.coupling])
    return tuple(steps)


def _shot_offsets(scenario: Scenario) -> np.ndarray:
    """Offset in Hz of every (point, shot), acquired point by point from t_wall = 0."""
    n_points, n_shots = len(scenario.scan_points), scenario.shots_per_point
    offsets = np.zeros((n_points, n_shots))
    if not scenario.noise_enabled:
        return offsets
    drift = dataclasses.replace(scenario.drift, seed=scenario.seed)
    for k in range(n_points):
        for s in range(n_shots):
            shot_index = k * n_shots + s
            offsets[k, s] = sample_shot_offset(shot_index, shot_index * scenario.cycle_duration, drift)
    return offsets


def _build_tasks(scenario, bins, steps, offsets) -> Tuple[List[_Task], list]:
    """Tasks plus, for each (point, shot), the (task index, position in task.times) of its value."""
    tasks, lookup = [], []
    drive = scenario.drive
    points = scenario.scan_points
    bins, steps = tuple(bins), tuple(steps)

    if scenario.scan_axis == axis_detection_time:
        if not scenario.noise_enabled:
            tasks.append(_Task(drive, points, 0.0, bins, steps))
            lookup = [[(0, k)] * scenario.shots_per_point for k in range(len(points))]
            return tasks, lookup
        for k, t in enumerate(points):
            row = []
            for offset in offsets[k]:
                row.append((len(tasks), 0))
                tasks.append(_Task(drive, (t,), float(offset), bins, steps))
            lookup.append(row)
        return tasks, lookup

    for k, detuning in enumerate(points):
        shifted = drive.replace(static_detuning=detuning)
        if not scenario.noise_enabled:
            lookup.append([(len(tasks), 0)] * scenario.shots_per_point)
            tasks.append(_Task(shifted, (scenario.detection_time,), 0.0, bins, steps))
            continue
        row = []
        for offset in offsets[k]:
            row.append((len(tasks), 0))
            tasks.append(_Task(shifted, (scenario.detection_time,), float(offset), bins, steps))
        lookup.append(row)
    return tasks, lookup


def _stderr(values: np.ndarray) -> float:
    if values.size < 2:
        return 0.0
    return float(np.std(values, ddof=1) / np.sqrt(values.size))


def run_scenario(scenario: Scenario) -> ScanResult:
    """
    Simulates every shot of the scan and aggregates them point by point.

    Each shot starts in |g>, gets its detuning offset (drift at its wall-clock
    time plus jitter) when noise is enabled, evolves every coupling bin of the
    ensemble and averages them. With atoms_per_shot set, the mean is then
    binomially sampled. Work items run on scenario.jobs processes and are
    reduced in (point, shot) order.

    Args:
        scenario (Scenario): Scenario to run.

    Returns:
        ScanResult: One row per scan point.
    """
    bins = scenario_bins(scenario)
    if scenario.scan_axis == axis_detection_time:
        horizon = scenario.scan_points[-1]
        # drive.static_detuning is fixed along a time scan
        steps = _step_sizes(scenario, bins, horizon if horizon > 0 else scenario.drive.period)
    else:
        widest = max(scenario.scan_points, key=abs)
        widest_scenario = scenario.replace(drive=scenario.drive.replace(static_detuning=widest))
        steps = _step_sizes(widest_scenario, bins, scenario.detection_time)

    offsets = _shot_offsets(scenario)
    tasks, lookup = _build_tasks(scenario, bins, steps, offsets)
    logging.info(f"scenario {scenario.name}: {len(tasks)} evolutions on {scenario.jobs} job(s)")
    results = _map(tasks, scenario.jobs)

    rows = []
    for k, point in enumerate(scenario.scan_points):
        p_e = np.empty(scenario.shots_per_point)
        p_plus = np.empty(scenario.shots_per_point)
        for s, (task_index, position) in enumerate(lookup[k]):
            p_e[s] = results[task_index][0][position]
            p_plus[s] = results[task_index][1][position]
            if scenario.atoms_per_shot is not None:
                shot_index = k * scenario.shots_per_point + s
                p_e[s] = projection_noise_sample(p_e[s], scenario.atoms_per_shot, shot_index, scenario.seed, 2 * k)
                p_plus[s] = projection_noise_sample(
                    p_plus[s], scenario.atoms_per_shot, shot_index, scenario.seed, 2 * k + 1
                )
        rows.append({
            scenario.axis_column: point,
            col_p_e_mean: float(np.mean(p_e)),
            col_p_plus_mean: float(np.mean(p_plus)),
            col_p_e_stderr: _stderr(p_e),
            col_p_plus_stderr: _stderr(p_plus),
            col_shots: scenario.shots_per_point,
        })

    frame = pd.DataFrame(rows, columns=[
        scenario.axis_column, col_p_e_mean, col_p_plus_mean, col_p_e_stderr, col_p_plus_stderr, col_shots,
    ])
    metadata = {
        "scenario": scenario.to_dict(),
        "seed": scenario.seed,
        "code_version": code_version,
        "coupling_bins": [dataclasses.asdict(b) for b in bins],
        "steps_s": list(steps),
    }
    return ScanResult(frame=frame, metadata=metadata)
