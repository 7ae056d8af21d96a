"""Covariance kernels for the driving Gaussian process and uniform time grids."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import DomainError, GridLookupError

FBM = "fbm"
SUBFBM = "subfbm"
BIFBM = "bifbm"
BM = "bm"
TABULATED = "tabulated"

KINDS = (FBM, SUBFBM, BIFBM, BM, TABULATED)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_i = i*T/n`` for ``i = 0..n``."""

    T: float = 1.0
    n: int = 256

    def __post_init__(self):
        if not (self.T > 0 and np.isfinite(self.T)):
            raise DomainError(f"horizon T must be positive, got {self.T}")
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"number of steps n must be a positive integer, got {self.n}")
        object.__setattr__(self, "T", float(self.T))
        object.__setattr__(self, "n", int(self.n))

    @cached_property
    def points(self) -> np.ndarray:
        t = np.arange(self.n + 1, dtype=np.float64) * self.T / self.n
        t[-1] = self.T
        t.setflags(write=False)
        return t

    @property
    def dt(self) -> float:
        return self.T / self.n

    @cached_property
    def trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.n + 1, self.dt)
        w[0] = w[-1] = 0.5 * self.dt
        w.setflags(write=False)
        return w

    def refine(self, factor: int) -> "TimeGrid":
        return TimeGrid(self.T, self.n * factor)


@dataclass(frozen=True, eq=False)
class Kernel:
    """Covariance family of the driver G.

    ``matrix`` and ``times`` are only used by the tabulated variant, where
    ``times`` is the declared grid the matrix lives on.
    """

    kind: str
    H: float | None = None
    K: float | None = None
    matrix: np.ndarray | None = field(default=None, repr=False)
    times: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown kernel kind {self.kind!r}")
        if self.kind in (FBM, SUBFBM, BIFBM):
            if self.H is None or not 0.0 < self.H < 1.0:
                raise DomainError(f"{self.kind} needs H in (0,1), got {self.H}")
            object.__setattr__(self, "H", float(self.H))
        if self.kind == BIFBM:
            if self.K is None or not 0.0 < self.K <= 1.0:
                raise DomainError(f"bifbm needs K in (0,1], got {self.K}")
            object.__setattr__(self, "K", float(self.K))
        if self.kind == TABULATED:
            m = np.array(self.matrix, dtype=np.float64)
            ts = np.array(self.times, dtype=np.float64)
            if m.ndim != 2 or m.shape[0] != m.shape[1] or ts.shape != (m.shape[0],):
                raise DomainError("tabulated kernel needs a square matrix matching its time list")
            if not np.array_equal(m, m.T):
                raise DomainError("tabulated covariance matrix must be symmetric")
            if np.any(np.diag(m) < 0):
                raise DomainError("tabulated covariance matrix has a negative diagonal entry")
            if np.any(np.diff(ts) <= 0) or ts[0] < 0:
                raise DomainError("tabulated grid times must be nonnegative and strictly increasing")
            m.setflags(write=False)
            ts.setflags(write=False)
            object.__setattr__(self, "matrix", m)
            object.__setattr__(self, "times", ts)

    @property
    def spec(self) -> str:
        if self.kind in (FBM, SUBFBM):
            return f"{self.kind}:H={self.H!r}"
        if self.kind == BIFBM:
            return f"bifbm:H={self.H!r},K={self.K!r}"
        if self.kind == BM:
            return "bm"
        return f"tabulated:sha256={self._digest()[:16]},size={len(self.times)}"

    def _digest(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.times).tobytes())
        h.update(np.ascontiguousarray(self.matrix).tobytes())
        return h.hexdigest()

    @property
    def cache_key(self):
        if self.kind == TABULATED:
            return (TABULATED, self._digest())
        return (self.kind, self.H, self.K)

    def __eq__(self, other):
        return isinstance(other, Kernel) and self.cache_key == other.cache_key

    def __hash__(self):
        return hash(self.cache_key)

    @property
    def hurst_exponent(self) -> float | None:
        """Exponent ``a`` with ``d_G(s,t)`` comparable to ``|t-s|^a``, when known."""
        if self.kind in (FBM, SUBFBM):
            return self.H
        if self.kind == BIFBM:
            return self.H * self.K
        if self.kind == BM:
            return 0.5
        return None

    @property
    def zero_at_origin(self) -> bool:
        return self.kind != TABULATED


def fbm(H: float) -> Kernel:
    return Kernel(FBM, H=H)


def subfbm(H: float) -> Kernel:
    return Kernel(SUBFBM, H=H)


def bifbm(H: float, K: float) -> Kernel:
    return Kernel(BIFBM, H=H, K=K)


def bm() -> Kernel:
    return Kernel(BM)


def tabulated(matrix, times) -> Kernel:
    return Kernel(TABULATED, matrix=matrix, times=times)


def _closed_form(k: Kernel, s: np.ndarray, t: np.ndarray) -> np.ndarray:
    if k.kind == BM or (k.kind == FBM and k.H == 0.5):
        # fbm(1/2) is Brownian motion; min() keeps the two entrywise identical
        return np.minimum(s, t)
    h2 = 2.0 * k.H
    if k.kind == FBM:
        return 0.5 * (s**h2 + t**h2 - np.abs(t - s) ** h2)
    if k.kind == SUBFBM:
        return s**h2 + t**h2 - 0.5 * ((s + t) ** h2 + np.abs(t - s) ** h2)
    # bifractional
    return 2.0 ** (-k.K) * ((t**h2 + s**h2) ** k.K - np.abs(t - s) ** (h2 * k.K))


def _tabulated_index(k: Kernel, x: np.ndarray) -> np.ndarray:
    ts = k.times
    scale = max(abs(ts[-1]), 1.0)
    idx = np.clip(np.searchsorted(ts, x), 0, len(ts) - 1)
    lower = np.clip(idx - 1, 0, len(ts) - 1)
    pick = np.where(np.abs(ts[lower] - x) < np.abs(ts[idx] - x), lower, idx)
    if np.any(np.abs(ts[pick] - x) > 1e-9 * scale):
        bad = np.asarray(x)[np.abs(ts[pick] - x) > 1e-9 * scale].ravel()[0]
        raise GridLookupError(f"time {bad!r} is not on the tabulated grid")
    return pick


def kernel_eval(k: Kernel, s, t, T: float | None = None):
    """Covariance ``E[G_s G_t]``; accepts scalars or broadcastable arrays."""
    s_arr = np.asarray(s, dtype=np.float64)
    t_arr = np.asarray(t, dtype=np.float64)
    if np.any(s_arr < 0) or np.any(t_arr < 0):
        raise DomainError("kernel arguments must be nonnegative times")
    if T is not None and (np.any(s_arr > T) or np.any(t_arr > T)):
        raise DomainError(f"kernel arguments must lie in [0, {T}]")
    if k.kind == TABULATED:
        out = k.matrix[_tabulated_index(k, s_arr), _tabulated_index(k, t_arr)]
    else:
        out = _closed_form(k, s_arr, t_arr)
    if out.ndim == 0:
        return float(out)
    return out


def covariance_matrix(k: Kernel, g: TimeGrid) -> np.ndarray:
    """Matrix ``M[i, j] = kernel_eval(k, t_i, t_j)`` of size ``(n+1, n+1)``."""
    t = g.points
    if k.kind == TABULATED:
        idx = _tabulated_index(k, t)
        return k.matrix[np.ix_(idx, idx)].copy()
    return _closed_form(k, t[:, None], t[None, :])


def parse_kernel(spec: str) -> Kernel:
    """Parse ``fbm:H=0.7``, ``subfbm:H=0.6``, ``bifbm:H=0.7,K=0.8``, ``bm``
    or ``tabulated:<path>``."""
    spec = spec.strip()
    name, _, rest = spec.partition(":")
    name = name.strip().lower()
    if name == BM:
        if rest.strip():
            raise DomainError(f"bm takes no parameters: {spec!r}")
        return bm()
    if name == TABULATED:
        if not rest.strip():
            raise DomainError("tabulated kernel needs a CSV path")
        return load_tabulated(rest.strip())
    if name not in (FBM, SUBFBM, BIFBM):
        raise DomainError(f"unknown kernel spec {spec!r}")
    params = {}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise DomainError(f"malformed kernel parameter {item!r} in {spec!r}")
        try:
            params[key.strip().upper()] = float(val)
        except ValueError:
            raise DomainError(f"non-numeric kernel parameter {item!r}") from None
    allowed = {"H", "K"} if name == BIFBM else {"H"}
    if set(params) - allowed or "H" not in params or (name == BIFBM and "K" not in params):
        raise DomainError(f"kernel {name} expects parameters {sorted(allowed)}, got {spec!r}")
    return Kernel(name, H=params["H"], K=params.get("K"))


def load_tabulated(path) -> Kernel:
    """Read a CSV whose first row holds the grid times and the rest the matrix rows."""
    rows = np.loadtxt(Path(path), delimiter=",", ndmin=2, comments="#")
    if rows.shape[0] != rows.shape[1] + 1:
        raise DomainError(f"{path}: expected (m+1) x m values, got shape {rows.shape}")
    return tabulated(rows[1:], rows[0])


def save_tabulated(path, k: Kernel) -> None:
    if k.kind != TABULATED:
        raise DomainError("only tabulated kernels can be saved")
    rows = np.vstack([k.times, k.matrix])
    np.savetxt(Path(path), rows, delimiter=",", fmt="%.17g")
