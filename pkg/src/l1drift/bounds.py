"""Maximal inequalities for Gaussian processes as computable bounds.

All suprema over time are taken over grid points. The canonical metric
``d_G(s, t) = sqrt(E (G_t - G_s)^2)`` is tabulated once per (kernel, grid)
in a :class:`MetricProfile`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import erfc

from . import _accel
from .errors import DegenerateKernelError, DomainError, NotApplicableError, RangeError
from .estimator import g_delta
from .kernels import Kernel, TimeGrid, covariance_matrix
from .model import ModelParams
from .sampler import GaussianSampler, SeedSpec, seeds_for

BOROVKOV_LOWER = 5.0
BOROVKOV_UPPER = 16.3
ENTROPY_NODES = 512


@dataclass(frozen=True, eq=False)
class MetricProfile:
    grid: TimeGrid
    d: np.ndarray
    sigma2: float
    kernel: Kernel | None = None

    @classmethod
    def from_kernel(cls, k: Kernel, g: TimeGrid) -> "MetricProfile":
        C = covariance_matrix(k, g)
        diag = np.diag(C)
        d2 = diag[:, None] + diag[None, :] - 2.0 * C
        d = np.sqrt(np.clip(d2, 0.0, None))
        np.fill_diagonal(d, 0.0)
        d = 0.5 * (d + d.T)
        return cls(g, d, float(diag.max()), k)

    @classmethod
    def from_distance(cls, g: TimeGrid, d, sigma2: float = float("nan")) -> "MetricProfile":
        d = np.asarray(d, dtype=np.float64)
        if d.shape != (g.n + 1, g.n + 1):
            raise DomainError(f"distance matrix must be {(g.n + 1, g.n + 1)}, got {d.shape}")
        return cls(g, d, sigma2)

    @property
    def D(self) -> float:
        return float(self.d.max())

    @cached_property
    def rho_knots(self) -> np.ndarray:
        """``rho`` at lags ``0, dt, ..., n dt`` (running max of per-lag maxima)."""
        lm = _accel.kernels.lag_max(np.ascontiguousarray(self.d))
        return np.maximum.accumulate(lm)

    @property
    def rho_strictly_increasing(self) -> bool:
        return bool(np.all(np.diff(self.rho_knots) > 0))

    @cached_property
    def min_offdiag(self) -> float:
        off = self.d + np.diag(np.full(len(self.d), np.inf))
        return float(off.min())

    def triangle_violation(self) -> float:
        """Largest ``d_ik - d_ij - d_jk`` over all triples (<= 0 for a metric)."""
        d = self.d
        worst = -np.inf
        for j in range(len(d)):
            worst = max(worst, float(np.max(d - d[:, j : j + 1] - d[j : j + 1, :])))
        return worst

    def holder_constants(self, a: float) -> tuple[float, float]:
        """Tightest ``C1 <= d(s,t)/|t-s|^a <= C2`` over distinct grid pairs."""
        t = self.grid.points
        i, j = np.triu_indices(len(t), 1)
        ratio = self.d[i, j] / np.abs(t[j] - t[i]) ** a
        return float(ratio.min()), float(ratio.max())


def rho(profile: MetricProfile, eps: float) -> float:
    """``sup { d_G(s,t) : |s - t| <= eps }`` over grid pairs."""
    if eps < 0:
        raise DomainError("eps must be nonnegative")
    k = min(int(math.floor(eps / profile.grid.dt + 1e-9)), profile.grid.n)
    return float(profile.rho_knots[k])


def Q_function(profile: MetricProfile, delta: float) -> float:
    """``int_0^inf rho(delta e^{-y^2}) dy`` for rho interpolated linearly between lags.

    On each interpolation segment the integrand is ``a + b delta e^{-y^2}``,
    so the integral is summed exactly with erfc; beyond the horizon rho is
    flat at its maximum.
    """
    if not delta > 0:
        raise DomainError("delta must be positive")
    g = profile.grid
    r = profile.rho_knots
    dt, n = g.dt, g.n
    total = 0.0
    if delta > g.T:
        total += float(r[n]) * math.sqrt(math.log(delta / g.T))
    K = min(n, int(math.ceil(delta / dt)))
    k = np.arange(K)
    lo = k * dt
    hi = np.minimum((k + 1) * dt, delta)
    slope = (r[k + 1] - r[k]) / dt
    icpt = r[k] - slope * lo
    y_hi = np.sqrt(np.log(delta / hi))
    with np.errstate(divide="ignore", invalid="ignore"):
        y_lo = np.sqrt(np.log(delta / lo))
        flat = np.where(lo > 0, icpt * (y_lo - y_hi), 0.0)
    curved = slope * delta * (0.5 * math.sqrt(math.pi)) * (erfc(y_hi) - erfc(y_lo))
    return total + float(np.sum(flat + curved))


def Q_inverse(profile: MetricProfile, x: float, rtol: float = 1e-13) -> float:
    """Bisection inverse of :func:`Q_function` on ``(0, inf)``."""
    if not x > 0 or not np.isfinite(x):
        raise RangeError(f"{x!r} is outside the range (0, inf) of Q")
    if profile.D <= 0:
        raise RangeError("Q vanishes identically for a degenerate profile")
    lo, hi = 0.0, 1.0
    while Q_function(profile, hi) < x:
        lo, hi = hi, 2.0 * hi
        if hi > 1e300:
            raise RangeError(f"{x!r} is beyond the computable range of Q")
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if Q_function(profile, mid) < x:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rtol * hi:
            break
    return 0.5 * (lo + hi)


def berman_tail(profile: MetricProfile, eps: float, C: float = 1.0) -> float:
    """``C / Q^{-1}(1/eps) * exp(-eps^2 / (2 sigma^2))``.

    The constant is not known in general; ``C = 1`` is a placeholder and
    results built on it are diagnostics only.
    """
    if not eps > 0:
        raise DomainError("eps must be positive")
    if not profile.rho_strictly_increasing:
        raise NotApplicableError("rho is not strictly increasing on this grid")
    if not profile.sigma2 > 0:
        raise NotApplicableError("sigma^2 must be positive")
    return C / Q_inverse(profile, 1.0 / eps) * math.exp(-(eps**2) / (2.0 * profile.sigma2))


def covering_number(profile: MetricProfile, eps: float) -> int:
    """Greedy count of d_G-balls of radius ``eps`` covering the grid."""
    if not eps > 0:
        raise DomainError("eps must be positive")
    return int(_accel.kernels.covering_count(np.ascontiguousarray(profile.d), float(eps)))


def entropy_integral(profile: MetricProfile, nodes: int = ENTROPY_NODES, include_floor: bool = True) -> float:
    """``int_0^{D/2} sqrt(log N(eps)) deps`` for the grid covering numbers.

    Below the smallest distance between distinct grid points every ball
    holds a single point, so ``N = n + 1`` there; that segment is added in
    closed form when ``include_floor`` is set. The rest uses a midpoint rule
    on ``nodes`` cells.
    """
    eps_min = profile.min_offdiag
    if not eps_min > 0:
        raise DegenerateKernelError("profile is pairwise degenerate (zero distance between grid points)")
    top = 0.5 * profile.D
    total = eps_min * math.sqrt(math.log(len(profile.d))) if include_floor else 0.0
    if top <= eps_min:
        return total if include_floor else 0.0
    edges = np.linspace(eps_min, top, nodes + 1)
    mids = 0.5 * (edges[1:] + edges[:-1])
    counts = np.array([covering_number(profile, e) for e in mids], dtype=np.float64)
    return total + float(np.sum(np.sqrt(np.log(counts))) * (edges[1] - edges[0]))


def borovkov_sandwich(H: float, C1: float, C2: float) -> tuple[float, float]:
    """Bounds ``C1/(5 sqrt H) <= E sup G <= 16.3 C2 / sqrt H``."""
    if not 0.0 < H <= 1.0:
        raise DomainError("H must lie in (0, 1]")
    if not 0.0 < C1 <= C2:
        raise DomainError("need 0 < C1 <= C2")
    s = math.sqrt(H)
    return C1 / (BOROVKOV_LOWER * s), BOROVKOV_UPPER * C2 / s


def nourdin_tail(sigma2: float, m: float, x: float) -> float:
    """``P(sup G >= x) <= exp(-(x - m)^2 / (2 sigma^2))`` for ``x > m``."""
    if not sigma2 > 0:
        raise DomainError("sigma^2 must be positive")
    if not x > m:
        raise DomainError(f"bound only holds for x > m (x={x}, m={m})")
    return math.exp(-((x - m) ** 2) / (2.0 * sigma2))


def abs_tail(sigma2: float, m: float, x: float) -> float:
    """Two-sided version for ``sup |G|``."""
    return 2.0 * nourdin_tail(sigma2, m, x)


@dataclass(frozen=True)
class SupStats:
    m_hat: float
    se: float
    sup: np.ndarray
    abs_sup: np.ndarray


def sup_statistics(k: Kernel, g: TimeGrid, N: int, seed: SeedSpec, method: str = "dense",
                   chunk: int = 1024) -> SupStats:
    """Per-path grid suprema of ``G`` and ``|G|`` over ``N`` draws."""
    sampler = GaussianSampler(k, g, method=method)
    sup = np.empty(N)
    abs_sup = np.empty(N)
    for start in range(0, N, chunk):
        stop = min(start + chunk, N)
        G = sampler.draw(seeds_for(seed.root_seed, range(seed.stream_index + start, seed.stream_index + stop)))
        sup[start:stop] = G.max(axis=1)
        abs_sup[start:stop] = np.abs(G).max(axis=1)
    se = float(sup.std(ddof=1) / math.sqrt(N)) if N > 1 else float("nan")
    return SupStats(float(sup.mean()), se, sup, abs_sup)


def estimate_sup_mean(k: Kernel, g: TimeGrid, N: int, seed: SeedSpec, method: str = "dense") -> tuple[float, float]:
    """Monte Carlo mean of ``max_i G_{t_i}`` and its standard error."""
    if N < 100:
        raise DomainError("use at least 100 draws")
    st = sup_statistics(k, g, N, seed, method=method)
    return st.m_hat, st.se


def consistency_bound(p: ModelParams, delta: float, eps: float, m: float, sigma2: float) -> float:
    """Finite-eps bound on ``P(|theta_hat - theta0| > delta)``.

    ``2 exp(-(a - m)^2 / (2 sigma^2))`` with ``a = e^{-|theta0| T} g(delta) / (2 eps)``
    when ``a > m``; otherwise the bound is vacuous and 1 is returned.
    """
    if not delta > 0:
        raise DomainError("delta must be positive")
    if eps < 0:
        raise DomainError("eps must be nonnegative")
    if eps == 0:
        return 0.0
    a = math.exp(-abs(p.theta0) * p.T) * g_delta(p.theta0, p.x0, delta, p.T) / (2.0 * eps)
    if not a > m:
        return 1.0
    if sigma2 <= 0:
        return 0.0
    return min(1.0, 2.0 * math.exp(-((a - m) ** 2) / (2.0 * sigma2)))
