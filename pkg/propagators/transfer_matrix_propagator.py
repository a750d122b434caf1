import logging
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy import optimize

from models.drive_model import DriveParams, crossing_times, detuning_slope, eigen_frame
from models.errors import NoCrossing
from propagators.lzsm_analytic import adiabatic_phase, p_lz, stokes_phase, sweep_rate
from propagators.propagator import DetuningOffsetFn, Propagator, Trace, no_offset
from registries.standards.model_standards import kind_constructive, kind_destructive

GRID_STEP = 0.05
AMPLITUDE_RESOLUTION = 1e-3
TRANSFER_THRESHOLD = 1e-6


@dataclass(frozen=True)
class CrossingEvent:
    """One passage through the avoided crossing and the phase gathered until the next one."""
    time: float
    sweep_rate: float
    p_lz: float
    stokes_phase: float
    adiabatic_phase_to_next: float
    upward: bool = True

    def __post_init__(self):
        if self.sweep_rate <= 0:
            raise ValueError(f"sweep_rate must be > 0, got {self.sweep_rate}")
        if not 0 < self.p_lz <= 1:
            raise ValueError(f"p_lz must be in (0, 1], got {self.p_lz}")
        if not (math.isfinite(self.stokes_phase) and math.isfinite(self.adiabatic_phase_to_next)):
            raise ValueError("CrossingEvent phases must be finite")


def lz_transfer_matrix(survival: float, stokes: float, upward: bool) -> np.ndarray:
    """
    Crossing matrix in the adiabatic basis ordered (|+>, |->).

    survival is the diabatic survival probability P_LZ. An upward sweep (detuning
    increasing) maps |+> onto |-> with amplitude sqrt(P_LZ); a downward sweep is
    the transpose. The diagonal carries exp(-/+ i stokes).
    """
    stay = math.sqrt(max(0.0, 1.0 - survival))
    hop = math.sqrt(survival)
    phase = stokes
    matrix = np.array(
        [[stay * np.exp(-1j * phase), -hop], [hop, stay * np.exp(1j * phase)]],
        dtype=complex,
    )
    return matrix if upward else matrix.T


def phase_matrix(zeta: float) -> np.ndarray:
    """Adiabatic evolution between crossings: |+> gains exp(-i zeta), |-> gains exp(+i zeta)."""
    return np.diag([np.exp(-1j * zeta), np.exp(1j * zeta)])


def crossing_events(
    drive: DriveParams,
    coupling: float,
    t_end: float,
    extra_offset: float = 0.0,
) -> List[CrossingEvent]:
    """
    Crossings in [0, t_end). adiabatic_phase_to_next runs to the following
    crossing, or to t_end for the last one.

    Raises:
        NoCrossing: If the detuning never vanishes.
    """
    coupling = abs(coupling)
    times = [t for t in crossing_times(drive, (0.0, t_end), extra_offset) if t < t_end]
    events = []
    for k, t in enumerate(times):
        rate = sweep_rate(drive, t, extra_offset)
        following = times[k + 1] if k + 1 < len(times) else t_end
        events.append(
            CrossingEvent(
                time=t,
                sweep_rate=rate,
                p_lz=p_lz(coupling, rate),
                stokes_phase=stokes_phase(coupling, rate),
                adiabatic_phase_to_next=adiabatic_phase(t, following, drive, coupling, extra_offset),
                upward=bool(detuning_slope(t, drive) > 0),
            )
        )
    return events


def _crossing_matrix(drive: DriveParams, coupling: float, t: float, extra_offset: float) -> np.ndarray:
    rate = sweep_rate(drive, t, extra_offset)
    return lz_transfer_matrix(p_lz(coupling, rate), stokes_phase(coupling, rate), bool(detuning_slope(t, drive) > 0))


def composed_matrix(
    drive: DriveParams,
    coupling: float,
    t_start: float,
    t_end: float,
    extra_offset: float = 0.0,
) -> np.ndarray:
    """Adiabatic-basis evolution from t_start to t_end, composed crossing by crossing."""
    coupling = abs(coupling)
    times = [t for t in crossing_times(drive, (t_start, t_end), extra_offset) if t < t_end]
    total = np.eye(2, dtype=complex)
    previous = t_start
    for t in times:
        total = phase_matrix(adiabatic_phase(previous, t, drive, coupling, extra_offset)) @ total
        total = _crossing_matrix(drive, coupling, t, extra_offset) @ total
        previous = t
    return phase_matrix(adiabatic_phase(previous, t_end, drive, coupling, extra_offset)) @ total


def composed_period_matrix(drive: DriveParams, coupling: float, t_start: float = 0.0) -> np.ndarray:
    return composed_matrix(drive, coupling, t_start, t_start + drive.period)


def period_transfer(drive: DriveParams, coupling: float, extra_offset: float = 0.0) -> float:
    """
    Excited-state population after one modulation period starting from |g> at t = 0.

    Equals 1 - |<g|U(T)|g>|^2, the probability of leaving the initial state.
    """
    coupling = abs(coupling)
    matrix = composed_matrix(drive, coupling, 0.0, drive.period, extra_offset)
    start = eigen_frame(0.0, drive, coupling, extra_offset).basis()
    end = eigen_frame(drive.period, drive, coupling, extra_offset).basis()
    vector = end @ matrix @ start.T @ np.array([1.0, 0.0], dtype=complex)
    return float(min(1.0, abs(vector[1]) ** 2))


def transfer_matrix_trace(
    drive: DriveParams,
    coupling: float,
    n_periods: int,
    extra_offset: float = 0.0,
) -> Trace:
    """
    Adiabatic-impulse evolution of |g> over n_periods, sampled mid-plateau.

    Args:
        drive (DriveParams): Drive parameters.
        coupling (float): Rabi coupling in Hz.
        n_periods (int): Number of modulation periods, >= 1.
        extra_offset (float): Constant extra detuning in Hz.

    Returns:
        Trace: p_e and p_plus at the midpoints between consecutive crossings.

    Raises:
        NoCrossing: If the detuning never vanishes.
    """
    if n_periods < 1:
        raise ValueError(f"n_periods must be >= 1, got {n_periods}")
    coupling = abs(coupling)
    t_end = n_periods * drive.period
    crossings = [t for t in crossing_times(drive, (0.0, t_end), extra_offset) if t < t_end]

    amplitudes = eigen_frame(0.0, drive, coupling, extra_offset).basis().T @ np.array([1.0, 0.0], dtype=complex)
    previous = 0.0
    times, p_e, p_plus, diabatic = [], [], [], []
    for k, t in enumerate(crossings):
        amplitudes = phase_matrix(adiabatic_phase(previous, t, drive, coupling, extra_offset)) @ amplitudes
        amplitudes = _crossing_matrix(drive, coupling, t, extra_offset) @ amplitudes
        previous = t
        if k + 1 == len(crossings):
            break
        middle = 0.5 * (t + crossings[k + 1])
        amplitudes = phase_matrix(adiabatic_phase(t, middle, drive, coupling, extra_offset)) @ amplitudes
        previous = middle
        vector = eigen_frame(middle, drive, coupling, extra_offset).basis() @ amplitudes
        times.append(middle)
        p_e.append(abs(vector[1]) ** 2)
        p_plus.append(abs(amplitudes[0]) ** 2)
        diabatic.append(vector)

    return Trace(
        times=np.array(times),
        p_e=np.array(p_e),
        p_plus=np.array(p_plus),
        amplitudes=np.array(diabatic, dtype=complex).reshape(-1, 2),
    )


def _transfer_at(amplitude, coupling, mod_freq, static_detuning, initial_phase) -> float:
    drive = DriveParams(
        g_bare=abs(coupling),
        amplitude=float(amplitude),
        mod_freq=mod_freq,
        static_detuning=static_detuning,
        initial_phase=initial_phase,
    )
    try:
        return period_transfer(drive, coupling)
    except NoCrossing:
        return math.nan


def _refine(objective, left: float, middle: float, right: float) -> float:
    # golden tolerance is relative to |x|
    xtol = AMPLITUDE_RESOLUTION / (2.0 * max(abs(right), 1.0))
    try:
        result = optimize.minimize_scalar(
            objective, bracket=(left, middle, right), method="golden", options={"xtol": xtol}
        )
    except ValueError:
        return middle
    if not left <= result.x <= right:
        return middle
    return float(result.x)


def interference_extrema(
    coupling: float,
    mod_freq: float,
    static_detuning: float,
    amplitude_range: Tuple[float, float],
    initial_phase: float = 0.0,
    grid_step: float = GRID_STEP,
    threshold: float = TRANSFER_THRESHOLD,
) -> List[Tuple[float, str]]:
    """
    Locates maxima (constructive) and minima (destructive) of the one-period
    transfer versus modulation index A.

    Args:
        coupling (float): Rabi coupling in Hz.
        mod_freq (float): Angular modulation frequency in rad/s.
        static_detuning (float): Laser detuning in Hz.
        amplitude_range (Tuple[float, float]): Closed interval of A to scan.
        grid_step (float): Coarse grid spacing, at most 0.05.
        threshold (float): Scans whose largest transfer stays below this return [].

    Returns:
        List[Tuple[float, str]]: (A, kind) sorted by A.
    """
    low, high = amplitude_range
    if not (math.isfinite(low) and math.isfinite(high)) or low <= 0 or high <= low:
        raise ValueError(f"amplitude_range must be a positive finite interval, got {amplitude_range}")
    if not 0 < grid_step <= GRID_STEP:
        raise ValueError(f"grid_step must be in (0, {GRID_STEP}], got {grid_step}")

    n_points = math.ceil((high - low) / grid_step) + 1
    grid = np.linspace(low, high, n_points)
    values = np.array([_transfer_at(a, coupling, mod_freq, static_detuning, initial_phase) for a in grid])
    if np.all(np.isnan(values)) or np.nanmax(values) < threshold:
        logging.info(f"interference_extrema: transfer below {threshold:g} over A in [{low}, {high}]")
        return []

    def _value(a):
        return _transfer_at(a, coupling, mod_freq, static_detuning, initial_phase)

    extrema = []
    for i in range(1, n_points - 1):
        before, here, after = values[i - 1], values[i], values[i + 1]
        if np.isnan(before) or np.isnan(here) or np.isnan(after):
            continue
        if here > before and here >= after:
            a = _refine(lambda x: -_value(x), grid[i - 1], grid[i], grid[i + 1])
            extrema.append((a, kind_constructive))
        elif here < before and here <= after:
            a = _refine(_value, grid[i - 1], grid[i], grid[i + 1])
            extrema.append((a, kind_destructive))
    logging.info(f"interference_extrema: {len(extrema)} extrema for g={coupling} Hz in A=[{low}, {high}]")
    return sorted(extrema)


class TransferMatrixPropagator(Propagator):
    """
    Adiabatic-impulse model: LZ matrices at each crossing, adiabatic phases between.
    Samples only plateau midpoints, so sample_times fixes the number of periods.
    """

    def get_propagator_name(self) -> str:
        return "transfer_matrix"

    def run_trace(
        self,
        drive: DriveParams,
        coupling: float,
        sample_times: Sequence[float],
        detuning_offset_fn: DetuningOffsetFn = no_offset,
    ) -> Trace:
        times = Propagator.validate_sample_times(sample_times)
        n_periods = max(1, math.ceil(float(times[-1]) / drive.period - 1e-9))
        offset = float(np.asarray(detuning_offset_fn(np.zeros(1)), dtype=float).ravel()[0])
        return transfer_matrix_trace(drive, coupling, n_periods, extra_offset=offset)
