"""
Closed-form Landau-Zener quantities for a single avoided crossing of the
cosine-modulated clock Hamiltonian, plus the adiabatic phase between crossings.
"""
import math

from scipy import integrate, special

from models.drive_model import TWO_PI, DriveParams, effective_detuning
from models.errors import NotACrossing

# |detuning| at a crossing may deviate from zero by this fraction of A*ws
CROSSING_TOLERANCE = 1e-6
PHASE_TOLERANCE = 1e-8


def sweep_rate(drive: DriveParams, crossing_time: float, extra_offset: float = 0.0) -> float:
    """
    |d(angular detuning)/dt| at a crossing: A*ws^2*|sin(ws*t + phi0)|, in rad/s^2.

    Raises:
        NotACrossing: If the detuning at crossing_time is not zero within tolerance.
    """
    scale = drive.amplitude * drive.mod_freq
    detuning = float(effective_detuning(crossing_time, drive, extra_offset))
    if scale == 0 or abs(detuning) > CROSSING_TOLERANCE * scale:
        raise NotACrossing(f"t={crossing_time} s is not a crossing (detuning {detuning:.6g} rad/s)")
    return scale * drive.mod_freq * abs(math.sin(drive.mod_freq * crossing_time + drive.initial_phase))


def adiabaticity(coupling: float, sweep_rate: float) -> float:
    """delta_a = (2*pi*g)^2 / (4 v); P_LZ = exp(-2*pi*delta_a)."""
    if sweep_rate <= 0:
        raise ValueError(f"sweep_rate must be > 0, got {sweep_rate}")
    return (TWO_PI * coupling) ** 2 / (4.0 * sweep_rate)


def p_lz(coupling: float, sweep_rate: float) -> float:
    """Probability of staying in the initial diabatic state after one sweep."""
    if sweep_rate <= 0:
        raise ValueError(f"sweep_rate must be > 0, got {sweep_rate}")
    return math.exp(-math.pi * (TWO_PI * coupling) ** 2 / (2.0 * sweep_rate))


def stokes_phase(coupling: float, sweep_rate: float) -> float:
    """
    pi/4 + d(ln d - 1) + arg Gamma(1 - i d) with d the adiabaticity parameter.
    Tends to pi/4 for fast passage and to 0 for slow passage.
    """
    delta = adiabaticity(coupling, sweep_rate)
    if delta == 0:
        return math.pi / 4
    return math.pi / 4 + delta * (math.log(delta) - 1.0) + special.loggamma(1.0 - 1j * delta).imag


def adiabatic_phase(
    t1: float,
    t2: float,
    drive: DriveParams,
    coupling: float,
    extra_offset: float = 0.0,
) -> float:
    """Half the time integral of the instantaneous gap over [t1, t2], radians."""
    if t2 < t1:
        raise ValueError(f"t1 ({t1}) must not exceed t2 ({t2})")
    if t2 == t1:
        return 0.0
    rabi = TWO_PI * coupling

    def _gap(t):
        return math.hypot(float(effective_detuning(t, drive, extra_offset)), rabi)

    value, _ = integrate.quad(_gap, t1, t2, epsabs=2 * PHASE_TOLERANCE, epsrel=1e-12, limit=500)
    return 0.5 * value
