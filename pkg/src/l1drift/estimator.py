"""Minimum L1-norm drift estimator and the separation function g(delta)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _accel
from .errors import DomainError
from .model import ModelParams
from .sampler import SamplePath

DEFAULT_SCAN_POINTS = 200
REL_TOL = 1e-7


@dataclass(frozen=True)
class EstimateResult:
    theta_hat: float
    objective: float
    n_evals: int
    bracket: tuple[float, float]


def l1_objective(X: SamplePath, theta: float, x0: float) -> float:
    """Trapezoid value of ``int_0^T |X_t - x0 e^{theta t}| dt``."""
    g = X.grid
    return float(
        _accel.kernels.l1_objectives(X.values, g.points, g.trapezoid_weights, float(x0), np.array([float(theta)]))[0]
    )


def l1_objective_many(X: SamplePath, thetas, x0: float) -> np.ndarray:
    g = X.grid
    th = np.ascontiguousarray(thetas, dtype=np.float64)
    return _accel.kernels.l1_objectives(X.values, g.points, g.trapezoid_weights, float(x0), th)


def _minimize_values(values, t, w, x0, lo, hi, scan_points):
    if lo > hi:
        raise DomainError(f"empty search interval [{lo}, {hi}]")
    if scan_points < 2:
        raise DomainError("scan_points must be at least 2")
    if lo == hi:
        obj = _accel.kernels.l1_objectives(values, t, w, x0, np.array([lo]))[0]
        return EstimateResult(lo, float(obj), 1, (lo, hi))
    thetas = np.linspace(lo, hi, scan_points)
    tol = REL_TOL * (hi - lo)
    th, obj, n_evals, a, b = _accel.kernels.minimize_l1(values, t, w, float(x0), thetas, tol)
    return EstimateResult(float(th), float(obj), int(n_evals), (float(a), float(b)))


def minimize_l1(X: SamplePath, p: ModelParams, scan_points: int = DEFAULT_SCAN_POINTS) -> EstimateResult:
    """Global minimizer of the L1 criterion over ``[theta_lo, theta_hi]``.

    An equispaced scan picks the best point; golden-section search then
    refines inside its two neighbours to ``1e-7`` of the interval width.
    Ties go to the smallest theta.
    """
    g = X.grid
    return _minimize_values(
        X.values, g.points, g.trapezoid_weights, p.x0, p.theta_lo, p.theta_hi, scan_points
    )


def minimize_l1_array(values: np.ndarray, t: np.ndarray, w: np.ndarray, p: ModelParams,
                      scan_points: int = DEFAULT_SCAN_POINTS) -> EstimateResult:
    """Same as :func:`minimize_l1` on raw grid arrays (used by the harness)."""
    return _minimize_values(np.ascontiguousarray(values), t, w, p.x0, p.theta_lo, p.theta_hi, scan_points)


def flow_integral(theta: float, T: float) -> float:
    """``F(theta) = int_0^T e^{theta t} dt``, with ``F(0) = T``."""
    if theta == 0.0:
        return T
    return math.expm1(theta * T) / theta


def g_delta(theta0: float, x0: float, delta: float, T: float = 1.0) -> float:
    """Smallest L1 distance between the flows at ``theta0`` and any ``|theta - theta0| > delta``.

    For a fixed sign of ``theta - theta0`` the integrand keeps its sign and
    grows with ``|theta - theta0|``, so the infimum sits on the boundary.
    """
    if delta < 0:
        raise DomainError("delta must be nonnegative")
    if delta == 0:
        return 0.0
    F0 = flow_integral(theta0, T)
    up = flow_integral(theta0 + delta, T) - F0
    down = F0 - flow_integral(theta0 - delta, T)
    return abs(x0) * min(up, down)
