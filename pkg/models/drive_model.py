import math
from dataclasses import dataclass
from typing import List, Tuple, Union

import numpy as np

from models.errors import DegenerateFrame, NoCrossing

ArrayLike = Union[float, np.ndarray]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class DriveParams:
    """
    Parameters of the frequency-modulated clock Hamiltonian.

    H/hbar = 1/2 [ -D(t) sz' + W sx ] in the (|g>, |e>) basis, with
    D(t) = 2*pi*static_detuning + amplitude*mod_freq*cos(mod_freq*t + initial_phase)
    and W = 2*pi*coupling.

    Attributes:
        g_bare (float): Bare Rabi coupling in Hz.
        amplitude (float): Dimensionless modulation index A.
        mod_freq (float): Angular modulation frequency in rad/s.
        static_detuning (float): Clock laser detuning in Hz.
        initial_phase (float): Phase of the cosine drive at t = 0, radians.
    """
    g_bare: float
    amplitude: float
    mod_freq: float
    static_detuning: float = 0.0
    initial_phase: float = 0.0

    def __post_init__(self):
        if self.g_bare < 0:
            raise ValueError(f"g_bare must be >= 0, got {self.g_bare}")
        if self.mod_freq <= 0:
            raise ValueError(f"mod_freq must be > 0, got {self.mod_freq}")
        if self.amplitude < 0:
            raise ValueError(f"amplitude must be >= 0, got {self.amplitude}")

    @classmethod
    def from_hz(
        cls,
        g_bare: float,
        amplitude: float,
        mod_freq_hz: float,
        static_detuning: float = 0.0,
        initial_phase: float = 0.0,
    ) -> "DriveParams":
        """Build drive parameters from a modulation frequency given in Hz."""
        return cls(
            g_bare=float(g_bare),
            amplitude=float(amplitude),
            mod_freq=TWO_PI * float(mod_freq_hz),
            static_detuning=float(static_detuning),
            initial_phase=float(initial_phase),
        )

    @property
    def mod_freq_hz(self) -> float:
        return self.mod_freq / TWO_PI

    @property
    def period(self) -> float:
        return TWO_PI / self.mod_freq

    @property
    def is_driven(self) -> bool:
        return self.amplitude > 0

    def replace(self, **changes) -> "DriveParams":
        values = {
            "g_bare": self.g_bare,
            "amplitude": self.amplitude,
            "mod_freq": self.mod_freq,
            "static_detuning": self.static_detuning,
            "initial_phase": self.initial_phase,
        }
        values.update(changes)
        return DriveParams(**values)

    def to_dict(self) -> dict:
        return {
            "g_bare": self.g_bare,
            "amplitude": self.amplitude,
            "mod_freq_hz": self.mod_freq_hz,
            "static_detuning": self.static_detuning,
            "initial_phase": self.initial_phase,
        }


@dataclass(frozen=True)
class QubitState:
    """Normalized clock-state amplitudes in the diabatic basis."""
    amp_g: complex
    amp_e: complex

    NORM_TOLERANCE = 1e-9

    def __post_init__(self):
        norm = abs(self.amp_g) ** 2 + abs(self.amp_e) ** 2
        if abs(norm - 1.0) > self.NORM_TOLERANCE:
            raise ValueError(f"QubitState is not normalized (|psi|^2 = {norm})")

    @classmethod
    def ground(cls) -> "QubitState":
        return cls(1.0 + 0j, 0j)

    @classmethod
    def excited(cls) -> "QubitState":
        return cls(0j, 1.0 + 0j)

    @classmethod
    def from_vector(cls, vector: np.ndarray) -> "QubitState":
        return cls(complex(vector[0]), complex(vector[1]))

    def as_vector(self) -> np.ndarray:
        return np.array([self.amp_g, self.amp_e], dtype=complex)

    @property
    def p_e(self) -> float:
        return abs(self.amp_e) ** 2

    @property
    def p_g(self) -> float:
        return abs(self.amp_g) ** 2

    @property
    def norm_deviation(self) -> float:
        return abs(abs(self.amp_g) ** 2 + abs(self.amp_e) ** 2 - 1.0)


@dataclass(frozen=True)
class EigenFrame:
    """
    Instantaneous eigenbasis of the Hamiltonian.

    mixing_angle is atan2(coupling, detuning) in [0, pi]; gap is the angular
    splitting between the upper |+> and lower |-> eigenstates.
    """
    mixing_angle: float
    gap: float

    def upper_vector(self) -> np.ndarray:
        half = 0.5 * self.mixing_angle
        return np.array([math.sin(half), math.cos(half)])

    def lower_vector(self) -> np.ndarray:
        half = 0.5 * self.mixing_angle
        return np.array([math.cos(half), -math.sin(half)])

    def basis(self) -> np.ndarray:
        """Real orthogonal matrix whose columns are |+> and |-> in the (|g>, |e>) basis."""
        return np.column_stack([self.upper_vector(), self.lower_vector()])


def effective_detuning(t: ArrayLike, drive: DriveParams, extra_offset: ArrayLike = 0.0) -> ArrayLike:
    """
    Angular detuning 2*pi*(delta + offset) + A*ws*cos(ws*t + phi0) in rad/s.
    Accepts scalars or numpy arrays for t and extra_offset.
    """
    static = TWO_PI * (drive.static_detuning + extra_offset)
    return static + drive.amplitude * drive.mod_freq * np.cos(drive.mod_freq * t + drive.initial_phase)


def detuning_slope(t: ArrayLike, drive: DriveParams) -> ArrayLike:
    """Time derivative of the angular detuning, rad/s^2."""
    return -drive.amplitude * drive.mod_freq ** 2 * np.sin(drive.mod_freq * t + drive.initial_phase)


def crossing_times(
    drive: DriveParams,
    window: Tuple[float, float],
    extra_offset: float = 0.0,
) -> List[float]:
    """
    Times in window where the effective detuning vanishes.

    The cosine is inverted analytically, then each root gets one Newton step
    on effective_detuning.

    Raises:
        NoCrossing: If A = 0 or |2*pi*delta| >= A*ws.
    """
    start, stop = window
    if stop < start:
        raise ValueError(f"Invalid window {window}: end precedes start")
    sweep_scale = drive.amplitude * drive.mod_freq
    static = TWO_PI * (drive.static_detuning + extra_offset)
    if sweep_scale == 0 or abs(static) >= sweep_scale:
        raise NoCrossing(
            f"No avoided crossing: |2*pi*delta| = {abs(static):.6g} rad/s, A*ws = {sweep_scale:.6g} rad/s"
        )

    root = math.acos(-static / sweep_scale)
    omega, phase = drive.mod_freq, drive.initial_phase
    k_first = math.floor((omega * start + phase - root) / TWO_PI) - 1
    k_last = math.ceil((omega * stop + phase + root) / TWO_PI) + 1

    times = []
    for k in range(k_first, k_last + 1):
        for x in (root + TWO_PI * k, -root + TWO_PI * k):
            t = (x - phase) / omega
            slope = detuning_slope(t, drive)
            if slope != 0:
                t -= effective_detuning(t, drive, extra_offset) / slope
            if start <= t <= stop:
                times.append(float(t))
    times.sort()
    # a root exactly at +/-pi appears twice when |cos| touches 1; keep one copy
    unique = [t for i, t in enumerate(times) if i == 0 or t - times[i - 1] > 1e-12]
    return unique


def eigen_frame(t: float, drive: DriveParams, coupling: float, extra_offset: float = 0.0) -> EigenFrame:
    """
    Mixing angle and gap of the Hamiltonian at time t.

    Raises:
        DegenerateFrame: If coupling and detuning are both zero.
    """
    if coupling < 0:
        raise ValueError(f"coupling must be >= 0, got {coupling}")
    detuning = float(effective_detuning(t, drive, extra_offset))
    rabi = TWO_PI * coupling
    if rabi == 0 and detuning == 0:
        raise DegenerateFrame(f"Eigenbasis undefined at t={t}: coupling and detuning both vanish")
    return EigenFrame(mixing_angle=math.atan2(rabi, detuning), gap=math.hypot(detuning, rabi))


def hamiltonian(t: float, drive: DriveParams, coupling: float, extra_offset: float = 0.0) -> np.ndarray:
    """Hamiltonian over hbar in rad/s, basis (|g>, |e>)."""
    detuning = float(effective_detuning(t, drive, extra_offset))
    rabi = TWO_PI * coupling
    return 0.5 * np.array([[-detuning, rabi], [rabi, detuning]], dtype=complex)
