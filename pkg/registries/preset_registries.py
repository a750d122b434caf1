from typing import Callable, Dict, List

import numpy as np

from clients.experiment_client import Scenario
from ensembles.lattice_ensemble import LatticeConfig
from models.drive_model import DriveParams
from models.errors import UnknownPreset
from noise.drift_noise import DriftModel
from registries.standards.model_standards import axis_detection_time, basis_both, basis_diabatic

# Presets are the measured configurations. Names on the left are the public contract.

FAST_COUPLING = 120.0
FAST_MOD_FREQ_HZ = 200.0
FAST_PERIODS = 6
SLOW_COUPLING = 320.0
SLOW_MOD_FREQ_HZ = 62.5
SLOW_PERIODS = 4
SAMPLES_PER_PERIOD = 40
RABI_SAMPLES_PER_PERIOD = 160


def detection_times(mod_freq_hz: float, n_periods: int, samples_per_period: int) -> tuple:
    """Uniform grid from 0 to n_periods driving periods, inclusive."""
    period = 1.0 / mod_freq_hz
    return tuple(np.linspace(0.0, n_periods * period, n_periods * samples_per_period + 1))


def _lz_preset(name, coupling, amplitude, mod_freq_hz, n_periods, basis_out) -> Scenario:
    return Scenario(
        drive=DriveParams.from_hz(coupling, amplitude, mod_freq_hz),
        lattice=LatticeConfig(),
        drift=DriftModel(),
        scan_axis=axis_detection_time,
        scan_points=detection_times(mod_freq_hz, n_periods, SAMPLES_PER_PERIOD),
        basis_out=basis_out,
        single_mode=True,
        name=name,
    )


def _rabi_preset(name, coupling) -> Scenario:
    # A = 0; the modulation frequency only sets the time unit shared with the slow presets
    return Scenario(
        drive=DriveParams.from_hz(coupling, 0.0, SLOW_MOD_FREQ_HZ),
        lattice=LatticeConfig(),
        drift=DriftModel(),
        scan_axis=axis_detection_time,
        scan_points=detection_times(SLOW_MOD_FREQ_HZ, SLOW_PERIODS, RABI_SAMPLES_PER_PERIOD),
        basis_out=basis_diabatic,
        single_mode=False,
        name=name,
    )


_PRESETS: Dict[str, Callable[[], Scenario]] = {
    "fast-constructive": lambda: _lz_preset(
        "fast-constructive", FAST_COUPLING, 13.3, FAST_MOD_FREQ_HZ, FAST_PERIODS, basis_diabatic
    ),
    "fast-destructive": lambda: _lz_preset(
        "fast-destructive", FAST_COUPLING, 11.55, FAST_MOD_FREQ_HZ, FAST_PERIODS, basis_diabatic
    ),
    "slow-constructive": lambda: _lz_preset(
        "slow-constructive", SLOW_COUPLING, 22.2, SLOW_MOD_FREQ_HZ, SLOW_PERIODS, basis_both
    ),
    "slow-destructive": lambda: _lz_preset(
        "slow-destructive", SLOW_COUPLING, 20.6, SLOW_MOD_FREQ_HZ, SLOW_PERIODS, basis_both
    ),
    "slow-destructive-400": lambda: _lz_preset(
        "slow-destructive-400", 400.0, 21.4, SLOW_MOD_FREQ_HZ, SLOW_PERIODS, basis_both
    ),
    "rabi-320": lambda: _rabi_preset("rabi-320", 320.0),
    "rabi-400": lambda: _rabi_preset("rabi-400", 400.0),
}


def list_presets() -> List[str]:
    return list(_PRESETS)


def preset(name: str) -> Scenario:
    """
    Returns the compiled-in scenario registered under name.

    Raises:
        UnknownPreset: If name is not registered.
    """
    try:
        factory = _PRESETS[name]
    except KeyError:
        raise UnknownPreset(f"Unknown preset {name!r}; available: {', '.join(_PRESETS)}") from None
    return factory()
