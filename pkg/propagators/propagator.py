from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from models.drive_model import DriveParams
from registries.standards.model_standards import col_p_e, col_p_e_std, col_p_plus, col_p_plus_std, col_time

DetuningOffsetFn = Callable[[np.ndarray], np.ndarray]

# probabilities may leave [0, 1] by round-off only
PROBABILITY_SLACK = 1e-12


def no_offset(t: np.ndarray) -> np.ndarray:
    return np.zeros_like(np.asarray(t, dtype=float))


@dataclass(frozen=True)
class ConstantOffset:
    """Quasi-static detuning offset in Hz held for a whole interrogation."""
    offset_hz: float

    def __call__(self, t: np.ndarray) -> np.ndarray:
        return np.full_like(np.asarray(t, dtype=float), self.offset_hz)


def constant_offset(offset_hz: float) -> DetuningOffsetFn:
    return ConstantOffset(float(offset_hz))


def constant_value(detuning_offset_fn: DetuningOffsetFn) -> Optional[float]:
    """Offset in Hz if the function is known to be time-independent, else None."""
    if detuning_offset_fn is no_offset:
        return 0.0
    if isinstance(detuning_offset_fn, ConstantOffset):
        return detuning_offset_fn.offset_hz
    return None


@dataclass
class Trace:
    """
    Sampled populations of one evolution (or an ensemble mean of several).

    p_e is the diabatic excited population, p_plus the population of the upper
    adiabatic state. The *_std arrays are only set for ensemble means.
    """
    times: np.ndarray
    p_e: np.ndarray
    p_plus: np.ndarray
    p_e_std: Optional[np.ndarray] = None
    p_plus_std: Optional[np.ndarray] = None
    amplitudes: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.p_e = self._clip(self.p_e)
        self.p_plus = self._clip(self.p_plus)
        if not (self.times.shape == self.p_e.shape == self.p_plus.shape):
            raise ValueError("Trace arrays must share one shape")
        if self.times.size > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("Trace times must be strictly increasing")

    @staticmethod
    def _clip(values) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        if values.size and (values.min() < -PROBABILITY_SLACK or values.max() > 1 + PROBABILITY_SLACK):
            raise ValueError(f"Probabilities outside [0, 1]: [{values.min()}, {values.max()}]")
        return np.clip(values, 0.0, 1.0)

    @property
    def samples(self) -> List[Tuple[float, float, float]]:
        return list(zip(self.times.tolist(), self.p_e.tolist(), self.p_plus.tolist()))

    def __len__(self):
        return self.times.size

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({col_time: self.times, col_p_e: self.p_e, col_p_plus: self.p_plus})
        if self.p_e_std is not None:
            frame[col_p_e_std] = self.p_e_std
        if self.p_plus_std is not None:
            frame[col_p_plus_std] = self.p_plus_std
        return frame


class Propagator(ABC):
    """
    Abstract base class for trace propagators.

    Each propagator must implement:
    1. get_propagator_name: identifier in snake_case
    2. run_trace: evolve |g> under a drive and return a Trace
    """

    @abstractmethod
    def get_propagator_name(self) -> str:
        """
        Returns:
            str: Propagator identifier in snake_case (e.g., 'midpoint_exponential')
        """
        pass

    @abstractmethod
    def run_trace(
        self,
        drive: DriveParams,
        coupling: float,
        sample_times: Sequence[float],
        detuning_offset_fn: DetuningOffsetFn = no_offset,
    ) -> Trace:
        """
        Evolves the ground state and samples populations.

        Args:
            drive (DriveParams): Drive parameters.
            coupling (float): Rabi coupling in Hz.
            sample_times (Sequence[float]): Sorted sample times in seconds.
            detuning_offset_fn (callable): Extra detuning in Hz as a function of time.

        Returns:
            Trace: Populations at the sample times. Propagators that only resolve
            plateaus may choose their own sample times.
        """
        pass

    @staticmethod
    def validate_sample_times(sample_times: Sequence[float]) -> np.ndarray:
        times = np.asarray(sample_times, dtype=float)
        if times.ndim != 1 or times.size == 0:
            raise ValueError("sample_times must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(times)):
            raise ValueError("sample_times must be finite")
        if np.any(times < 0):
            raise ValueError("sample_times must be >= 0 (evolution starts at t = 0)")
        if np.any(np.diff(times) <= 0):
            raise ValueError("sample_times must be strictly increasing")
        return times
