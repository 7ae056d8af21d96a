"""The observed process ``dX = theta X dt + eps dG`` and its noise-free flow."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _accel
from .errors import DomainError, GridMismatchError, IdentifiabilityError
from .kernels import TimeGrid
from .sampler import SamplePath, check_same_grid, cumulative_stieltjes_many

GRONWALL_SLACK = 1e-9


@dataclass(frozen=True)
class ModelParams:
    """True drift, initial value, noise level, search interval and horizon."""

    theta0: float
    x0: float
    eps: float
    theta_lo: float
    theta_hi: float
    T: float = 1.0

    def __post_init__(self):
        for name in ("theta0", "x0", "eps", "theta_lo", "theta_hi", "T"):
            v = float(getattr(self, name))
            if not np.isfinite(v):
                raise DomainError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        if self.x0 == 0.0:
            raise IdentifiabilityError("x0 = 0 makes the drift unidentifiable")
        if self.eps < 0:
            raise DomainError("noise level eps must be nonnegative")
        if self.T <= 0:
            raise DomainError("horizon T must be positive")
        if self.theta_lo > self.theta_hi:
            raise DomainError(f"empty search interval [{self.theta_lo}, {self.theta_hi}]")
        if not self.theta_lo <= self.theta0 <= self.theta_hi:
            raise DomainError("theta0 must lie in the search interval")

    def with_eps(self, eps: float) -> "ModelParams":
        return ModelParams(self.theta0, self.x0, eps, self.theta_lo, self.theta_hi, self.T)


def _check_grid(p: ModelParams, G: SamplePath) -> None:
    if abs(G.grid.T - p.T) > 1e-12 * p.T:
        raise GridMismatchError(f"driver horizon {G.grid.T} differs from model horizon {p.T}")


def deterministic_solution(theta: float, x0: float, g: TimeGrid) -> SamplePath:
    """``x_t(theta) = x0 exp(theta t)`` on the grid."""
    return SamplePath(g, x0 * np.exp(theta * g.points))


def exact_paths(theta0: float, x0: float, eps: float, t: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Integrating-factor solution for a batch of driver rows."""
    growth = np.exp(theta0 * t)
    integral = cumulative_stieltjes_many(np.exp(-theta0 * t), G)
    return growth * (x0 + eps * integral)


def simulate_X_exact(p: ModelParams, G: SamplePath) -> SamplePath:
    """``X_t = e^{theta0 t} (x0 + eps * sum_{s_i<t} e^{-theta0 s_i} dG)``."""
    _check_grid(p, G)
    X = exact_paths(p.theta0, p.x0, p.eps, G.t, G.values[None, :])[0]
    return SamplePath(G.grid, X)


def simulate_X_euler(p: ModelParams, G: SamplePath) -> SamplePath:
    """Explicit Euler step ``X_{i+1} = X_i (1 + theta0 dt) + eps dG_i``."""
    _check_grid(p, G)
    X = _accel.kernels.euler_paths(p.theta0, p.x0, p.eps, G.grid.dt, np.ascontiguousarray(G.values[None, :]))[0]
    return SamplePath(G.grid, X)


@dataclass(frozen=True)
class GronwallReport:
    lhs: float
    rhs: float
    holds: bool


def gronwall_check(p: ModelParams, X: SamplePath, G: SamplePath) -> GronwallReport:
    """Compare ``max|X - x(theta0)|`` against ``eps e^{|theta0| T} max|G|``."""
    check_same_grid(X, G)
    _check_grid(p, G)
    lhs, rhs = gronwall_sides(p, X.t, X.values[None, :], G.values[None, :])
    return GronwallReport(float(lhs[0]), float(rhs[0]), bool(lhs[0] <= rhs[0] * (1 + GRONWALL_SLACK)))


def gronwall_sides(p: ModelParams, t: np.ndarray, X: np.ndarray, G: np.ndarray):
    """Row-wise discrete sup of both sides of the Gronwall bound."""
    x_det = p.x0 * np.exp(p.theta0 * t)
    lhs = np.max(np.abs(X - x_det), axis=1)
    rhs = p.eps * np.exp(abs(p.theta0) * p.T) * np.max(np.abs(G), axis=1)
    return lhs, rhs
