import logging
import math
from typing import Optional, Sequence

import numpy as np

import control
from models.drive_model import TWO_PI, DriveParams, EigenFrame, QubitState, eigen_frame
from models.errors import DegenerateFrame, StepTooCoarse
from propagators.propagator import DetuningOffsetFn, Propagator, Trace, constant_value, no_offset

# upper bound on steps multiplied in one vectorized block
CHUNK_STEPS = 1 << 15
# largest dt allowed is this fraction of the shortest dynamical timescale
STEP_FRACTION = 1.0 / 50.0
CHECK_SAMPLES = 20
MAX_ACCURACY_TARGET = 1e-3
# share of the accuracy target one halving may use
CONVERGENCE_MARGIN = 0.5


def _offsets(detuning_offset_fn: DetuningOffsetFn, t: np.ndarray) -> np.ndarray:
    values = np.asarray(detuning_offset_fn(t), dtype=float)
    return np.broadcast_to(values, np.shape(t))


def step_unitaries(
    t_mid: np.ndarray,
    dt,
    drive: DriveParams,
    coupling: float,
    offsets: np.ndarray,
) -> np.ndarray:
    """
    Exact exponentials exp(-i H(t_mid) dt) for an array of midpoints.

    Uses exp(-i phi n.sigma) = cos(phi) - i sin(phi) n.sigma with phi = gap*dt/2.

    Returns:
        np.ndarray: Shape (n, 2, 2), complex.
    """
    t_mid = np.asarray(t_mid, dtype=float)
    detuning = TWO_PI * (drive.static_detuning + offsets) + drive.amplitude * drive.mod_freq * np.cos(
        drive.mod_freq * t_mid + drive.initial_phase
    )
    rabi = TWO_PI * coupling
    gap = np.hypot(detuning, rabi)
    half_angle = 0.5 * gap * dt
    cos_part = np.cos(half_angle)
    # sin(phi)/gap, finite as gap -> 0
    sin_over_gap = np.where(gap > 0, np.sin(half_angle) / np.where(gap > 0, gap, 1.0), 0.5 * dt)

    unitaries = np.empty(t_mid.shape + (2, 2), dtype=complex)
    unitaries[..., 0, 0] = cos_part + 1j * sin_over_gap * detuning
    unitaries[..., 1, 1] = cos_part - 1j * sin_over_gap * detuning
    unitaries[..., 0, 1] = -1j * sin_over_gap * rabi
    unitaries[..., 1, 0] = unitaries[..., 0, 1]
    return unitaries


def step_unitary(t: float, dt: float, drive: DriveParams, coupling: float, offset_hz: float = 0.0) -> np.ndarray:
    """Midpoint-exponential propagator for one step starting at t."""
    return step_unitaries(np.array([t + 0.5 * dt]), dt, drive, coupling, np.array([offset_hz]))[0]


def ordered_product(unitaries: np.ndarray) -> np.ndarray:
    """Time-ordered product U[n-1] ... U[1] U[0] by pairwise reduction."""
    mats = unitaries
    if mats.shape[0] == 0:
        return np.eye(2, dtype=complex)
    while mats.shape[0] > 1:
        if mats.shape[0] % 2:
            mats = np.concatenate([mats, np.eye(2, dtype=complex)[None]], axis=0)
        mats = mats[1::2] @ mats[0::2]
    return mats[0]


def evolve_unitary(
    drive: DriveParams,
    coupling: float,
    t_start: float,
    t_stop: float,
    dt: float,
    detuning_offset_fn: DetuningOffsetFn = no_offset,
) -> np.ndarray:
    """
    Propagator from t_start to t_stop with steps no longer than dt.

    Under a constant offset an undriven Hamiltonian is exponentiated in one
    step, and a driven one is stepped over at most one period plus the
    remainder, then raised to the number of whole periods.
    """
    span = t_stop - t_start
    if span < 0:
        raise ValueError(f"t_stop ({t_stop}) precedes t_start ({t_start})")
    if span == 0:
        return np.eye(2, dtype=complex)
    offset = constant_value(detuning_offset_fn)
    if offset is not None and not drive.is_driven:
        # time-independent Hamiltonian: one exact exponential
        return step_unitaries(np.array([t_start + 0.5 * span]), span, drive, coupling, np.array([offset]))[0]
    if offset is not None and span >= 2 * drive.period:
        # U(t0 -> t0 + n T + tau) = U(t0 -> t0 + tau) U(t0 -> t0 + T)^n
        n_periods = int(span // drive.period)
        remainder = max(0.0, span - n_periods * drive.period)
        head = _stepped_unitary(drive, coupling, t_start, remainder, dt, detuning_offset_fn)
        tail = _stepped_unitary(drive, coupling, t_start + remainder, drive.period - remainder, dt, detuning_offset_fn)
        return head @ np.linalg.matrix_power(tail @ head, n_periods)
    return _stepped_unitary(drive, coupling, t_start, span, dt, detuning_offset_fn)


def _stepped_unitary(drive, coupling, t_start, span, dt, detuning_offset_fn) -> np.ndarray:
    if span <= 0:
        return np.eye(2, dtype=complex)
    n_steps = max(1, math.ceil(span / dt - 1e-9))
    h = span / n_steps
    total = np.eye(2, dtype=complex)
    for first in range(0, n_steps, CHUNK_STEPS):
        index = np.arange(first, min(first + CHUNK_STEPS, n_steps))
        t_mid = t_start + (index + 0.5) * h
        block = step_unitaries(t_mid, h, drive, coupling, _offsets(detuning_offset_fn, t_mid))
        total = ordered_product(block) @ total
    return total


def step(
    state: QubitState,
    t: float,
    dt: float,
    drive: DriveParams,
    coupling: float,
    offset_hz: float = 0.0,
) -> QubitState:
    """
    Advances a state by dt with the midpoint Hamiltonian. Norm-preserving up to round-off.
    """
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    vector = step_unitary(t, dt, drive, coupling, offset_hz) @ state.as_vector()
    return QubitState.from_vector(vector)


def adiabatic_populations(vector: np.ndarray, frame: EigenFrame) -> tuple:
    """(p_minus, p_plus) of a diabatic amplitude vector in the given eigenframe."""
    p_plus = float(abs(frame.upper_vector() @ vector) ** 2)
    p_minus = float(abs(frame.lower_vector() @ vector) ** 2)
    return p_minus, p_plus


def upper_population(vector: np.ndarray, t: float, drive: DriveParams, coupling: float, offset_hz: float) -> float:
    try:
        frame = eigen_frame(t, drive, coupling, offset_hz)
    except DegenerateFrame:
        # no splitting: |+> is taken as |e>, the limit of the positive-detuning branch
        return float(abs(vector[1]) ** 2)
    return adiabatic_populations(vector, frame)[1]


def _max_gap(drive: DriveParams, coupling: float, offset_hz: float = 0.0) -> float:
    sweep = abs(TWO_PI * (drive.static_detuning + offset_hz)) + drive.amplitude * drive.mod_freq
    return math.hypot(sweep, TWO_PI * coupling)


def step_bound(drive: DriveParams, coupling: float) -> float:
    """Largest admissible step: a fiftieth of the drive period or of 1/(max gap in rad/s)."""
    gap = _max_gap(drive, coupling)
    scales = [drive.period]
    if gap > 0:
        scales.append(1.0 / gap)
    return STEP_FRACTION * min(scales)


def _sampled_populations(drive, coupling, dt, check_times, offset_fn) -> np.ndarray:
    vector = np.array([1.0, 0.0], dtype=complex)
    populations = []
    previous = 0.0
    for t in check_times:
        vector = evolve_unitary(drive, coupling, previous, t, dt, offset_fn) @ vector
        populations.append(abs(vector[1]) ** 2)
        previous = t
    return np.array(populations)


def choose_step(
    drive: DriveParams,
    coupling: float,
    accuracy_target: float = control.ACCURACY_TARGET,
    horizon: Optional[float] = None,
    detuning_offset_fn: DetuningOffsetFn = no_offset,
    min_step: float = control.MIN_STEP,
) -> float:
    """
    Picks a step so that halving it moves sampled populations by less than accuracy_target.

    Starts from step_bound and halves until an evolution over one
    characteristic period converges. The tolerance is CONVERGENCE_MARGIN
    times the target, scaled by evolved span / horizon as the error grows
    linearly with evolution time.

    Args:
        drive (DriveParams): Drive parameters.
        coupling (float): Rabi coupling in Hz.
        accuracy_target (float): Tolerance in (0, 1e-3].
        horizon (float, optional): Total evolution time the step must serve.

    Raises:
        ValueError: If accuracy_target is outside (0, 1e-3].
        StepTooCoarse: If the target is not met above min_step.
    """
    if not 0 < accuracy_target <= MAX_ACCURACY_TARGET:
        raise ValueError(f"accuracy_target must be in (0, {MAX_ACCURACY_TARGET}], got {accuracy_target}")
    coupling = abs(coupling)
    dt = step_bound(drive, coupling)

    gap = _max_gap(drive, coupling)
    if drive.is_driven or gap == 0:
        check_span = drive.period
    else:
        check_span = TWO_PI / gap
    if horizon is not None and horizon > 0:
        check_span = min(check_span, horizon)
        tolerance = CONVERGENCE_MARGIN * accuracy_target * check_span / max(horizon, check_span)
    else:
        tolerance = CONVERGENCE_MARGIN * accuracy_target
    check_times = np.linspace(check_span / CHECK_SAMPLES, check_span, CHECK_SAMPLES)

    coarse = _sampled_populations(drive, coupling, dt, check_times, detuning_offset_fn)
    while dt >= min_step:
        fine = _sampled_populations(drive, coupling, 0.5 * dt, check_times, detuning_offset_fn)
        change = float(np.max(np.abs(fine - coarse)))
        if change < tolerance:
            logging.info(f"choose_step: dt={dt:.3e} s (halving changes populations by {change:.2e})")
            return dt
        dt *= 0.5
        coarse = fine
    raise StepTooCoarse(
        f"Accuracy {accuracy_target:g} not reached above the minimum step {min_step:g} s "
        f"(g={coupling} Hz, A={drive.amplitude})"
    )


def evolve_trace(
    initial: QubitState,
    drive: DriveParams,
    coupling: float,
    detuning_offset_fn: DetuningOffsetFn,
    sample_times: Sequence[float],
    accuracy_target: float = control.ACCURACY_TARGET,
    dt: Optional[float] = None,
) -> Trace:
    """
    Integrates from t = 0 and records p_e and p_plus at every sample time.

    Args:
        initial (QubitState): State at t = 0.
        drive (DriveParams): Drive parameters.
        coupling (float): Rabi coupling in Hz. The sign is irrelevant for
            populations, so |coupling| is evolved.
        detuning_offset_fn (callable): Extra detuning in Hz versus time.
        sample_times (Sequence[float]): Sorted, finite, >= 0.
        accuracy_target (float): Passed to choose_step when dt is not given.
        dt (float, optional): Fixed step; skips step selection.

    Returns:
        Trace: Populations and amplitudes at the sample times.

    Raises:
        StepTooCoarse: If choose_step cannot meet the accuracy target.
    """
    times = Propagator.validate_sample_times(sample_times)
    coupling = abs(coupling)
    if dt is None:
        dt = choose_step(drive, coupling, accuracy_target, horizon=float(times[-1]),
                         detuning_offset_fn=detuning_offset_fn)
    elif dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")

    vector = initial.as_vector()
    amplitudes = np.empty((times.size, 2), dtype=complex)
    p_plus = np.empty(times.size)
    sample_offsets = _offsets(detuning_offset_fn, times)
    previous = 0.0
    for k, t in enumerate(times):
        vector = evolve_unitary(drive, coupling, previous, float(t), dt, detuning_offset_fn) @ vector
        amplitudes[k] = vector
        p_plus[k] = upper_population(vector, float(t), drive, coupling, float(sample_offsets[k]))
        previous = float(t)
    p_e = np.abs(amplitudes[:, 1]) ** 2
    return Trace(times=times, p_e=p_e, p_plus=p_plus, amplitudes=amplitudes)


class MidpointExponentialPropagator(Propagator):
    """Numerically exact stepping with the closed-form 2x2 exponential of the midpoint Hamiltonian."""

    def __init__(self, accuracy_target: float = control.ACCURACY_TARGET, dt: Optional[float] = None):
        self.accuracy_target = accuracy_target
        self.dt = dt

    def get_propagator_name(self) -> str:
        return "midpoint_exponential"

    def run_trace(self, drive, coupling, sample_times, detuning_offset_fn=no_offset) -> Trace:
        return evolve_trace(
            QubitState.ground(), drive, coupling, detuning_offset_fn, sample_times,
            accuracy_target=self.accuracy_target, dt=self.dt,
        )
