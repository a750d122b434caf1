import math
from dataclasses import dataclass

import numpy as np

# independent random streams drawn from one seed
STREAM_JITTER = 1
STREAM_PROJECTION = 2


@dataclass(frozen=True)
class DriftModel:
    """
    Clock-laser frequency offset versus wall-clock time.

    A linear drift is cancelled by a compensation ramp applied in steps of
    compensation_step_period; quadratic_residual models the non-linear part left
    over. Each shot also gets a Gaussian jitter of shot_jitter_sigma.

    Attributes:
        linear_rate (float): Hz/s.
        compensation_rate (float): Hz/s.
        compensation_step_period (float): Seconds between compensation updates.
        quadratic_residual (float): Hz/s^2.
        shot_jitter_sigma (float): Hz.
        seed (int): Key of the counter-based generator.
    """
    linear_rate: float = 0.0684
    compensation_rate: float = 0.0684
    compensation_step_period: float = 10.0
    quadratic_residual: float = 2e-5
    shot_jitter_sigma: float = 1.5
    seed: int = 0

    def __post_init__(self):
        if self.shot_jitter_sigma < 0:
            raise ValueError(f"shot_jitter_sigma must be >= 0, got {self.shot_jitter_sigma}")
        if self.compensation_step_period <= 0:
            raise ValueError(f"compensation_step_period must be > 0, got {self.compensation_step_period}")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    def to_dict(self) -> dict:
        return {
            "linear_rate": self.linear_rate,
            "compensation_rate": self.compensation_rate,
            "compensation_step_period": self.compensation_step_period,
            "quadratic_residual": self.quadratic_residual,
            "shot_jitter_sigma": self.shot_jitter_sigma,
            "seed": self.seed,
        }


def shot_generator(seed: int, stream: int, shot_index: int, sample_index: int = 0) -> np.random.Generator:
    """Philox generator keyed on seed whose counter encodes (sample, stream, shot)."""
    if shot_index < 0 or sample_index < 0:
        raise ValueError(f"shot_index and sample_index must be >= 0, got {shot_index}, {sample_index}")
    return np.random.Generator(np.random.Philox(key=seed, counter=[sample_index, stream, shot_index, 0]))


def drift_offset(t_wall: float, model: DriftModel) -> float:
    """
    linear_rate*t - compensation_rate*step*floor(t/step) + quadratic_residual*t^2, in Hz.
    """
    if t_wall < 0:
        raise ValueError(f"t_wall must be >= 0, got {t_wall}")
    step = model.compensation_step_period
    compensated = model.compensation_rate * step * math.floor(t_wall / step)
    return model.linear_rate * t_wall - compensated + model.quadratic_residual * t_wall ** 2


def sample_shot_offset(shot_index: int, t_wall: float, model: DriftModel) -> float:
    """Drift at t_wall plus a reproducible Gaussian jitter for this shot."""
    offset = drift_offset(t_wall, model)
    if model.shot_jitter_sigma == 0:
        return offset
    rng = shot_generator(model.seed, STREAM_JITTER, shot_index)
    return offset + float(rng.normal(0.0, model.shot_jitter_sigma))


def projection_noise_sample(
    probability: float,
    n_atoms: int,
    shot_index: int,
    seed: int,
    sample_index: int = 0,
) -> float:
    """Excitation fraction of n_atoms atoms measured at the given probability."""
    if n_atoms <= 0:
        raise ValueError(f"n_atoms must be > 0, got {n_atoms}")
    probability = min(1.0, max(0.0, float(probability)))
    rng = shot_generator(seed, STREAM_PROJECTION, shot_index, sample_index)
    return float(rng.binomial(n_atoms, probability)) / n_atoms
