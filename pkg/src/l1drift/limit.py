"""Limit process ``Y_t = e^{theta0 t} int_0^t e^{-theta0 s} dG_s`` and the limit variable zeta."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _accel
from .errors import DomainError, GridMismatchError, IdentifiabilityError
from .kernels import Kernel, TimeGrid
from .sampler import GaussianSampler, SamplePath, SeedSpec, cumulative_stieltjes_many, seeds_for


@dataclass(frozen=True, eq=False)
class LimitInstance:
    """A realization of Y together with the direction ``h(t) = x0 t e^{theta0 t}``."""

    Y: SamplePath
    h: SamplePath

    def __post_init__(self):
        if self.Y.grid != self.h.grid:
            raise GridMismatchError("Y and h must share a grid")


def direction(theta0: float, x0: float, g: TimeGrid) -> SamplePath:
    t = g.points
    return SamplePath(g, x0 * t * np.exp(theta0 * t))


def limit_paths(theta0: float, t: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Y for a batch of driver rows."""
    return np.exp(theta0 * t) * cumulative_stieltjes_many(np.exp(-theta0 * t), G)


def sample_Y(k: Kernel, theta0: float, g: TimeGrid, seed: SeedSpec,
             sampler: GaussianSampler | None = None) -> SamplePath:
    sampler = sampler or GaussianSampler(k, g)
    G = sampler.draw([seed])
    return SamplePath(g, limit_paths(theta0, g.points, G)[0])


def _ratios_and_weights(Y: np.ndarray, h: np.ndarray, w: np.ndarray):
    keep = h != 0.0
    r = Y[keep] / h[keep]
    wt = w[keep] * np.abs(h[keep])
    if not len(wt) or not np.any(wt > 0):
        raise IdentifiabilityError("direction h vanishes on the grid; zeta is undefined")
    return np.ascontiguousarray(r), np.ascontiguousarray(wt)


def zeta_values(Y: np.ndarray, h: np.ndarray, w: np.ndarray) -> float:
    """Smallest minimizer of ``sum_i w_i |Y_i - u h_i|`` as a weighted median of ``Y_i / h_i``."""
    r, wt = _ratios_and_weights(Y, h, w)
    return float(_accel.kernels.weighted_median(r, wt))


def zeta_from_instance(inst: LimitInstance) -> float:
    return zeta_values(inst.Y.values, inst.h.values, inst.Y.grid.trapezoid_weights)


def zeta_objective(inst: LimitInstance, u) -> np.ndarray | float:
    """Discrete ``int |Y_t - u h(t)| dt`` on the instance grid."""
    w = inst.Y.grid.trapezoid_weights
    u_arr = np.asarray(u, dtype=np.float64)
    val = np.abs(inst.Y.values - u_arr[..., None] * inst.h.values) @ w
    return float(val) if val.ndim == 0 else val


def limit_cov_literal(theta0: float, s: float, t: float) -> float:
    """``e^{theta0 (t+s)} int_0^t int_0^s e^{-theta0 (u+v)} du dv`` in closed form."""
    if s < 0 or t < 0:
        raise DomainError("times must be nonnegative")
    if theta0 == 0.0:
        return t * s
    return math.expm1(theta0 * t) * math.expm1(theta0 * s) / theta0**2


def limit_cov_literal_matrix(theta0: float, g: TimeGrid) -> np.ndarray:
    t = g.points
    if theta0 == 0.0:
        e = t
    else:
        e = np.expm1(theta0 * t) / theta0
    return np.outer(e, e)


def limit_cov_mc(k: Kernel, theta0: float, g: TimeGrid, N: int, seed: SeedSpec,
                 chunk: int = 1024) -> np.ndarray:
    """Sample covariance of ``N`` independent Y draws on streams ``stream_index + r``."""
    if N < 2:
        raise DomainError("need at least two draws for a sample covariance")
    sampler = GaussianSampler(k, g)
    t = g.points
    Y = np.empty((N, g.n + 1))
    for start in range(0, N, chunk):
        stop = min(start + chunk, N)
        seeds = seeds_for(seed.root_seed, range(seed.stream_index + start, seed.stream_index + stop))
        Y[start:stop] = limit_paths(theta0, t, sampler.draw(seeds))
    Y -= Y.mean(axis=0)
    cov = (Y.T @ Y) / (N - 1)
    return 0.5 * (cov + cov.T)
