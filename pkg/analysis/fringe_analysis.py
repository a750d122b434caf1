import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from models.errors import FitDiverged, TooSparse
from propagators.propagator import Trace
from registries.standards.model_standards import col_contrast, col_time

MIN_SAMPLES_PER_WINDOW = 20
MAX_ITERATIONS = 200
PARAM_TOLERANCE = 1e-9
INITIAL_DAMPING = 1e-3
MAX_DAMPING = 1e16
# JtJ condition number beyond which a parameter counts as unidentifiable
MAX_CONDITION = 1e12


@dataclass
class ContrastSeries:
    """Fringe contrast per window, reported at the window centers."""
    times: np.ndarray
    contrast: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.contrast = np.asarray(self.contrast, dtype=float)
        if self.times.shape != self.contrast.shape or self.times.ndim != 1:
            raise ValueError("times and contrast must be 1-D arrays of one length")
        if self.times.size > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("ContrastSeries times must be strictly increasing")

    def __len__(self):
        return self.times.size

    @property
    def points(self) -> List[tuple]:
        return list(zip(self.times.tolist(), self.contrast.tolist()))

    def scaled(self, time_unit: float) -> "ContrastSeries":
        """Same series with times expressed in units of time_unit."""
        if time_unit <= 0:
            raise ValueError(f"time_unit must be > 0, got {time_unit}")
        return ContrastSeries(self.times / time_unit, self.contrast.copy())

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({col_time: self.times, col_contrast: self.contrast})

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> "ContrastSeries":
        """First column is time, second the value."""
        if frame.shape[1] < 2:
            raise ValueError("Need at least two columns (time, value)")
        return cls(frame.iloc[:, 0].to_numpy(dtype=float), frame.iloc[:, 1].to_numpy(dtype=float))


@dataclass
class FitResult:
    """
    Least-squares fit outcome. covariance rows/columns follow param_names;
    entries are inf for unidentifiable fits. residual_history holds the rms
    residual of the start and of every accepted iteration.
    """
    model: str
    params: Dict[str, float]
    residual_rms: float
    covariance: np.ndarray = field(repr=False)
    iterations: int = 0
    converged: bool = True
    residual_history: List[float] = field(default_factory=list, repr=False)

    @property
    def param_names(self) -> List[str]:
        return list(self.params)

    @property
    def identifiable(self) -> bool:
        return bool(np.all(np.isfinite(self.covariance)))

    @property
    def stderr(self) -> Dict[str, float]:
        diag = np.diag(self.covariance)
        return {name: float(math.sqrt(v)) if v >= 0 else math.nan for name, v in zip(self.params, diag)}

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "params": dict(self.params),
            "stderr": self.stderr,
            "residual_rms": self.residual_rms,
            "covariance": [[float(v) for v in row] for row in self.covariance],
            "iterations": self.iterations,
            "converged": self.converged,
        }


def fringe_contrast(trace: Trace, period: float) -> ContrastSeries:
    """
    Peak-to-peak p_e in consecutive windows of one period starting at the first sample.

    Raises:
        TooSparse: If the trace spans less than one period or a window holds
            fewer than MIN_SAMPLES_PER_WINDOW samples.
    """
    if period <= 0:
        raise ValueError(f"period must be > 0, got {period}")
    times, p_e = trace.times, trace.p_e
    start = float(times[0]) if times.size else 0.0
    span = float(times[-1]) - start if times.size else 0.0
    # tolerate round-off in the grid end
    n_windows = int(math.floor(span / period + 1e-9))
    if n_windows < 1:
        raise TooSparse(f"Trace spans {span:.6g} s, less than one period of {period:.6g} s")

    centers, contrast = [], []
    for k in range(n_windows):
        left, right = start + k * period, start + (k + 1) * period
        tol = 1e-9 * period
        if k == n_windows - 1:
            mask = (times >= left - tol) & (times <= right + tol)
        else:
            mask = (times >= left - tol) & (times < right - tol)
        if mask.sum() < MIN_SAMPLES_PER_WINDOW:
            raise TooSparse(
                f"Window {k} holds {int(mask.sum())} samples, need {MIN_SAMPLES_PER_WINDOW}"
            )
        window = p_e[mask]
        centers.append(left + 0.5 * period)
        contrast.append(float(window.max() - window.min()))
    return ContrastSeries(np.array(centers), np.clip(contrast, 0.0, 1.0))


def _exponential(t, params):
    offset, amplitude, decay = params
    return offset + amplitude * np.exp(-t / decay)


def _exponential_jacobian(t, params):
    _, amplitude, decay = params
    decay_term = np.exp(-t / decay)
    return np.column_stack([np.ones_like(t), decay_term, amplitude * decay_term * t / decay ** 2])


def _covariance(jacobian: np.ndarray, cost: float, n_points: int) -> np.ndarray:
    n_params = jacobian.shape[1]
    normal = jacobian.T @ jacobian
    if not np.all(np.isfinite(normal)) or np.linalg.cond(normal) > MAX_CONDITION:
        logging.warning("fit: normal matrix is singular, parameters are unidentifiable")
        return np.full((n_params, n_params), np.inf)
    dof = n_points - n_params
    variance = cost / dof if dof > 0 else 0.0
    covariance = variance * np.linalg.inv(normal)
    return 0.5 * (covariance + covariance.T)


def fit_exponential(series: ContrastSeries) -> FitResult:
    """
    Fits contrast = offset + D exp(-t / v) by Gauss-Newton with Levenberg damping.

    Starts from offset = min, D = max - min, v = span / 2 and stops when the
    relative parameter change drops below PARAM_TOLERANCE or after MAX_ITERATIONS.

    Args:
        series (ContrastSeries): At least 4 points.

    Returns:
        FitResult: params offset, D, v.

    Raises:
        FitDiverged: If no damped step ever lowers the residual of an imperfect start.
    """
    t, y = series.times, series.contrast
    if t.size < 4:
        raise ValueError(f"fit_exponential needs >= 4 points, got {t.size}")
    span = float(t[-1] - t[0])
    params = np.array([y.min(), y.max() - y.min(), span / 2 if span > 0 else 1.0])

    residual = y - _exponential(t, params)
    cost = float(residual @ residual)
    damping = INITIAL_DAMPING
    accepted = 0
    iterations = 0
    converged = cost == 0
    history = [math.sqrt(cost / t.size)]
    while iterations < MAX_ITERATIONS and cost > 0:
        iterations += 1
        jacobian = _exponential_jacobian(t, params)
        normal = jacobian.T @ jacobian
        gradient = jacobian.T @ residual
        scale = np.maximum(np.diag(normal), 1e-12 * max(float(np.max(np.diag(normal))), 1e-300))

        improved = False
        while damping <= MAX_DAMPING:
            try:
                delta = np.linalg.solve(normal + damping * np.diag(scale), gradient)
            except np.linalg.LinAlgError:
                damping *= 10
                continue
            trial = params + delta
            if trial[2] > 0 and np.all(np.isfinite(trial)):
                trial_residual = y - _exponential(t, trial)
                trial_cost = float(trial_residual @ trial_residual)
                if trial_cost < cost:
                    improved = True
                    break
            damping *= 10
        if not improved:
            if accepted == 0 and cost > 1e-28 * t.size:
                raise FitDiverged(f"Exponential fit: damping exhausted at cost {cost:.6g} without decrease")
            # residual cannot decrease further in floating point
            converged = True
            break

        change = float(np.max(np.abs(delta) / np.maximum(np.abs(params), 1e-300)))
        params, residual, cost = trial, trial_residual, trial_cost
        accepted += 1
        history.append(math.sqrt(cost / t.size))
        damping = max(damping / 10, 1e-12)
        if change < PARAM_TOLERANCE:
            converged = True
            break

    converged = converged or cost == 0
    if not converged:
        logging.warning(f"fit_exponential: stopped after {MAX_ITERATIONS} iterations")
    covariance = _covariance(_exponential_jacobian(t, params), cost, t.size)
    return FitResult(
        model="exponential",
        params={"offset": float(params[0]), "D": float(params[1]), "v": float(params[2])},
        residual_rms=math.sqrt(cost / t.size),
        covariance=covariance,
        iterations=iterations,
        converged=converged,
        residual_history=history,
    )


def fit_linear(series: ContrastSeries) -> FitResult:
    """Ordinary least squares contrast = slope * t + intercept."""
    t, y = series.times, series.contrast
    if t.size < 2:
        raise ValueError(f"fit_linear needs >= 2 points, got {t.size}")
    t_mean, y_mean = float(t.mean()), float(y.mean())
    sxx = float(((t - t_mean) ** 2).sum())
    if sxx == 0:
        raise ValueError("fit_linear needs at least two distinct times")
    slope = float(((t - t_mean) * (y - y_mean)).sum() / sxx)
    intercept = y_mean - slope * t_mean
    residual = y - (slope * t + intercept)
    cost = float(residual @ residual)
    design = np.column_stack([t, np.ones_like(t)])
    return FitResult(
        model="linear",
        params={"slope": slope, "intercept": intercept},
        residual_rms=math.sqrt(cost / t.size),
        covariance=_covariance(design, cost, t.size),
    )


def coarse_grain(trace: Trace, window: float) -> Trace:
    """Centered moving average of p_e and p_plus over a time window."""
    if window <= 0:
        raise ValueError(f"window must be > 0, got {window}")
    times = trace.times
    left = np.searchsorted(times, times - 0.5 * window, side="left")
    right = np.searchsorted(times, times + 0.5 * window, side="right")
    counts = right - left

    def _mean(values):
        cumulative = np.concatenate([[0.0], np.cumsum(values)])
        return (cumulative[right] - cumulative[left]) / counts

    return Trace(times=times.copy(), p_e=_mean(trace.p_e), p_plus=_mean(trace.p_plus))


@dataclass(frozen=True)
class LineAsymmetry:
    """Largest mismatch between p_e at +delta and -delta, and its significance in standard errors."""
    max_difference: float
    max_significance: float
    n_pairs: int


def estimate_line_center(detunings: np.ndarray, p_e: np.ndarray) -> float:
    """Population-weighted mean detuning; biased for asymmetric (driven) lines."""
    detunings = np.asarray(detunings, dtype=float)
    p_e = np.asarray(p_e, dtype=float)
    total = float(p_e.sum())
    if total <= 0:
        raise ValueError("Line has no excitation to locate")
    return float(detunings @ p_e / total)


def line_asymmetry(
    detunings: np.ndarray,
    p_e: np.ndarray,
    stderr: Optional[np.ndarray] = None,
) -> LineAsymmetry:
    """Compares p_e at mirrored detunings +d and -d (d > 0) present in the scan."""
    detunings = np.asarray(detunings, dtype=float)
    p_e = np.asarray(p_e, dtype=float)
    scale = max(float(np.max(np.abs(detunings))), 1.0)
    differences, significances = [], []
    for i, d in enumerate(detunings):
        if d <= 0:
            continue
        matches = np.flatnonzero(np.abs(detunings + d) <= 1e-9 * scale)
        if matches.size == 0:
            continue
        j = matches[0]
        difference = abs(p_e[i] - p_e[j])
        differences.append(difference)
        if stderr is not None:
            combined = math.hypot(stderr[i], stderr[j])
            significances.append(difference / combined if combined > 0 else (math.inf if difference > 0 else 0.0))
    if not differences:
        raise ValueError("Scan holds no mirrored detuning pairs")
    return LineAsymmetry(
        max_difference=float(max(differences)),
        max_significance=float(max(significances)) if significances else math.nan,
        n_pairs=len(differences),
    )
