import logging
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from models.errors import MismatchedGrids, TruncationTooSmall
from propagators.propagator import Trace
from registries.standards.model_standards import (
    BOLTZMANN_COVERAGE,
    LADDER_EXTENSION_STEP,
    MAX_LADDER_LEVEL,
    boltzmann_k,
    planck_h,
)

WEIGHT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class LatticeConfig:
    """
    Motional parameters of atoms in the 1-D optical lattice.

    Attributes:
        eta_z (float): Longitudinal Lamb-Dicke parameter.
        eta_x (float): Transverse Lamb-Dicke parameter.
        temp_z (float): Axial temperature in kelvin.
        temp_x (float): Radial temperature in kelvin.
        trap_freq_z (float): Axial trap frequency in Hz.
        trap_freq_x (float): Radial trap frequency in Hz.
        n_max_z (int): Initial axial ladder truncation.
        n_max_x (int): Initial radial ladder truncation.
    """
    eta_z: float = 0.25
    eta_x: float = 0.022
    temp_z: float = 4.7e-6
    temp_x: float = 6.3e-6
    trap_freq_z: float = 65e3
    trap_freq_x: float = 450.0
    n_max_z: int = 10
    n_max_x: int = 10

    def __post_init__(self):
        for name in ("eta_z", "eta_x"):
            value = getattr(self, name)
            if not 0 <= value < 1:
                raise ValueError(f"{name} must be in [0, 1), got {value}")
        for name in ("temp_z", "temp_x", "trap_freq_z", "trap_freq_x"):
            value = getattr(self, name)
            if value <= 0:
                raise ValueError(f"{name} must be > 0, got {value}")
        for name in ("n_max_z", "n_max_x"):
            value = getattr(self, name)
            if not 0 <= value <= MAX_LADDER_LEVEL:
                raise ValueError(f"{name} must be in [0, {MAX_LADDER_LEVEL}], got {value}")

    def to_dict(self) -> dict:
        return {
            "eta_z": self.eta_z,
            "eta_x": self.eta_x,
            "temp_z": self.temp_z,
            "temp_x": self.temp_x,
            "trap_freq_z": self.trap_freq_z,
            "trap_freq_x": self.trap_freq_x,
            "n_max_z": self.n_max_z,
            "n_max_x": self.n_max_x,
        }


@dataclass(frozen=True)
class MotionalMode:
    """Lattice eigenstate (n_z, n_x) with its thermal weight and renormalized coupling in Hz."""
    n_z: int
    n_x: int
    weight: float
    coupling: float


@dataclass(frozen=True)
class CouplingBin:
    """Modes of similar |coupling| merged into one evolution."""
    coupling: float
    weight: float
    n_modes: int


def laguerre_table(n_max: int, x: float) -> np.ndarray:
    """L_0(x) ... L_{n_max}(x) from (k+1) L_{k+1} = (2k+1-x) L_k - k L_{k-1}."""
    if not 0 <= n_max <= MAX_LADDER_LEVEL:
        raise ValueError(f"Laguerre order must be in [0, {MAX_LADDER_LEVEL}], got {n_max}")
    values = np.empty(n_max + 1)
    values[0] = 1.0
    if n_max >= 1:
        values[1] = 1.0 - x
    for k in range(1, n_max):
        values[k + 1] = ((2 * k + 1 - x) * values[k] - k * values[k - 1]) / (k + 1)
    return values


def laguerre(n: int, x: float) -> float:
    return float(laguerre_table(n, x)[n])


def _debye_waller(config: LatticeConfig) -> float:
    return math.exp(-0.5 * config.eta_z ** 2) * math.exp(-0.5 * config.eta_x ** 2)


def coupling_strength(g_bare: float, mode: Tuple[int, int], config: LatticeConfig) -> float:
    """
    g_n = g L_nz(eta_z^2) L_nx(eta_x^2) exp(-eta_z^2/2) exp(-eta_x^2/2), sign kept.
    """
    n_z, n_x = mode
    return (
        g_bare
        * laguerre(n_z, config.eta_z ** 2)
        * laguerre(n_x, config.eta_x ** 2)
        * _debye_waller(config)
    )


def boltzmann_ratio(trap_freq: float, temperature: float) -> float:
    """Population ratio of adjacent ladder levels, exp(-h f / k_B T)."""
    return math.exp(-planck_h * trap_freq / (boltzmann_k * temperature))


def _ladder_weights(ratio: float, n_max: int) -> np.ndarray:
    return ratio ** np.arange(n_max + 1, dtype=float)


def _coverage(ratio: float, n_max: int) -> float:
    # truncated geometric sum over the infinite one
    return 1.0 - ratio ** (n_max + 1)


def thermal_weights(config: LatticeConfig, g_bare: float = 1.0) -> List[MotionalMode]:
    """
    Separable Boltzmann distribution over (n_z, n_x), normalized on the truncated grid.

    The ladders are extended in steps of LADDER_EXTENSION_STEP levels until the
    grid holds BOLTZMANN_COVERAGE of the untruncated weight.

    Args:
        config (LatticeConfig): Lattice parameters.
        g_bare (float): Bare coupling in Hz used for each mode's coupling.

    Returns:
        List[MotionalMode]: Modes ordered by (n_z, n_x).

    Raises:
        TruncationTooSmall: If coverage needs more than MAX_LADDER_LEVEL levels.
    """
    ratio_z = boltzmann_ratio(config.trap_freq_z, config.temp_z)
    ratio_x = boltzmann_ratio(config.trap_freq_x, config.temp_x)
    n_z, n_x = config.n_max_z, config.n_max_x

    while _coverage(ratio_z, n_z) * _coverage(ratio_x, n_x) < BOLTZMANN_COVERAGE:
        if _coverage(ratio_z, n_z) <= _coverage(ratio_x, n_x):
            n_z += LADDER_EXTENSION_STEP
        else:
            n_x += LADDER_EXTENSION_STEP
        if max(n_z, n_x) > MAX_LADDER_LEVEL:
            raise TruncationTooSmall(
                f"Boltzmann coverage {BOLTZMANN_COVERAGE} needs more than {MAX_LADDER_LEVEL} levels "
                f"(ratios z={ratio_z:.6g}, x={ratio_x:.6g})"
            )
    if (n_z, n_x) != (config.n_max_z, config.n_max_x):
        logging.info(f"thermal_weights: ladders extended to n_z <= {n_z}, n_x <= {n_x}")

    weights_z = _ladder_weights(ratio_z, n_z)
    weights_x = _ladder_weights(ratio_x, n_x)
    grid = np.outer(weights_z, weights_x)
    grid /= grid.sum()

    factor_z = laguerre_table(n_z, config.eta_z ** 2)
    factor_x = laguerre_table(n_x, config.eta_x ** 2)
    couplings = g_bare * _debye_waller(config) * np.outer(factor_z, factor_x)

    modes = []
    for i in range(n_z + 1):
        for j in range(n_x + 1):
            if grid[i, j] > 0:
                modes.append(MotionalMode(n_z=i, n_x=j, weight=float(grid[i, j]), coupling=float(couplings[i, j])))
    return modes


def ground_mode(config: LatticeConfig, g_bare: float) -> List[MotionalMode]:
    """The (0, 0) mode alone with weight 1."""
    return [MotionalMode(n_z=0, n_x=0, weight=1.0, coupling=coupling_strength(g_bare, (0, 0), config))]


def bin_modes(modes: Sequence[MotionalMode], n_bins: int) -> List[CouplingBin]:
    """
    Merges modes into at most n_bins equal-weight quantile bins of |coupling|.

    Each bin evolves at the weighted mean |coupling| of its members. n_bins <= 0
    keeps one bin per distinct |coupling|.
    """
    if not modes:
        raise ValueError("bin_modes needs at least one mode")
    magnitudes = np.array([abs(m.coupling) for m in modes])
    weights = np.array([m.weight for m in modes])
    order = np.argsort(magnitudes, kind="stable")
    magnitudes, weights = magnitudes[order], weights[order]

    if n_bins <= 0 or n_bins >= len(modes):
        distinct, index = np.unique(magnitudes, return_inverse=True)
        summed = np.bincount(index, weights=weights)
        counts = np.bincount(index)
        return [CouplingBin(float(c), float(w), int(n)) for c, w, n in zip(distinct, summed, counts)]

    cumulative = np.cumsum(weights) / weights.sum()
    # bin of each mode by the weight quantile of its midpoint
    labels = np.minimum((n_bins * (cumulative - 0.5 * weights / weights.sum())).astype(int), n_bins - 1)
    bins = []
    for label in np.unique(labels):
        members = labels == label
        weight = float(weights[members].sum())
        coupling = float(np.dot(weights[members], magnitudes[members]) / weight)
        bins.append(CouplingBin(coupling=coupling, weight=weight, n_modes=int(members.sum())))
    return bins


def ensemble_average(traces: Sequence[Tuple[float, Trace]]) -> Trace:
    """
    Pointwise weighted mean and standard deviation of p_e and p_plus.

    Raises:
        MismatchedGrids: If the traces do not share sample times.
    """
    if not traces:
        raise ValueError("ensemble_average needs at least one trace")
    weights = np.array([w for w, _ in traces], dtype=float)
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > WEIGHT_TOLERANCE:
        raise ValueError(f"Weights must be non-negative and sum to 1, got sum {weights.sum()}")
    weights = weights / weights.sum()
    times = traces[0][1].times
    for _, trace in traces[1:]:
        if trace.times.shape != times.shape or not np.array_equal(trace.times, times):
            raise MismatchedGrids("Traces to average must share identical sample times")

    p_e = np.stack([t.p_e for _, t in traces])
    p_plus = np.stack([t.p_plus for _, t in traces])
    mean_e = weights @ p_e
    mean_plus = weights @ p_plus
    std_e = np.sqrt(np.maximum(weights @ (p_e - mean_e) ** 2, 0.0))
    std_plus = np.sqrt(np.maximum(weights @ (p_plus - mean_plus) ** 2, 0.0))
    return Trace(times=times.copy(), p_e=mean_e, p_plus=mean_plus, p_e_std=std_e, p_plus_std=std_plus)
