"""Gaussian sample paths on a grid and pathwise left-point Stieltjes sums."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _accel
from .errors import DegenerateKernelError, DomainError, GridMismatchError
from .kernels import BM, FBM, Kernel, TimeGrid, covariance_matrix

log = logging.getLogger(__name__)

JITTER_START = 1e-12
JITTER_STOP = 1e-6


@dataclass(frozen=True)
class SeedSpec:
    """Independent random stream ``stream_index`` under ``root_seed``."""

    root_seed: int
    stream_index: int = 0

    def __post_init__(self):
        if self.stream_index < 0:
            raise DomainError("stream_index must be nonnegative")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.root_seed), spawn_key=(int(self.stream_index),))
        return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True, eq=False)
class SamplePath:
    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.grid.n + 1,):
            raise GridMismatchError(
                f"path has {v.shape} values, grid needs ({self.grid.n + 1},)"
            )
        object.__setattr__(self, "values", v)

    @property
    def t(self) -> np.ndarray:
        return self.grid.points

    def __len__(self):
        return len(self.values)


def check_same_grid(a: SamplePath, b: SamplePath) -> None:
    if a.grid != b.grid:
        raise GridMismatchError(f"grids differ: {a.grid} vs {b.grid}")


def _cholesky_with_jitter(C: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(C)
    except np.linalg.LinAlgError:
        pass
    scale = float(np.max(np.diag(C)))
    lam = JITTER_START
    while lam <= JITTER_STOP * (1 + 1e-9):
        try:
            L = np.linalg.cholesky(C + lam * scale * np.eye(len(C)))
            log.debug("cholesky needed jitter %.1e x max diagonal", lam)
            return L
        except np.linalg.LinAlgError:
            lam *= 10.0
    raise DegenerateKernelError(
        f"covariance factorization failed with jitter up to {JITTER_STOP:g} x max diagonal"
    )


class GaussianSampler:
    """Factorizes the grid covariance once and draws paths from it.

    ``method="dense"`` uses a Cholesky factor of the covariance restricted to
    coordinates with positive variance. ``method="circulant"`` samples fBm/BM
    increments by circulant embedding; it matches the dense law but not its
    bits, and is only used where large grids are needed.
    """

    def __init__(self, kernel: Kernel, grid: TimeGrid, method: str = "dense"):
        self.kernel = kernel
        self.grid = grid
        self.method = method
        if method == "dense":
            C = covariance_matrix(kernel, grid)
            self.active = np.flatnonzero(np.diag(C) > 0)
            if len(self.active):
                self.factor = _cholesky_with_jitter(C[np.ix_(self.active, self.active)])
            else:
                self.factor = np.zeros((0, 0))
            self.factor.setflags(write=False)
        elif method == "circulant":
            if kernel.kind not in (FBM, BM):
                raise DomainError("circulant sampling is only available for fbm and bm")
            self._setup_circulant()
        else:
            raise DomainError(f"unknown sampling method {method!r}")

    def _setup_circulant(self):
        n = self.grid.n
        H = 0.5 if self.kernel.kind == BM else self.kernel.H
        k = np.arange(n + 1, dtype=np.float64)
        gamma = 0.5 * ((k + 1) ** (2 * H) - 2 * k ** (2 * H) + np.abs(k - 1) ** (2 * H))
        gamma *= self.grid.dt ** (2 * H)
        row = np.concatenate([gamma, gamma[-2:0:-1]])
        lam = np.fft.fft(row).real
        if lam.min() < -1e-10 * lam.max():
            raise DegenerateKernelError("circulant embedding is not nonnegative definite")
        self._sqrt_eig = np.sqrt(np.clip(lam, 0.0, None) / len(row))

    @property
    def dim(self) -> int:
        if self.method == "dense":
            return len(self.active)
        return 2 * self.grid.n

    def draw(self, seeds: Sequence[SeedSpec]) -> np.ndarray:
        """One path per seed, as rows of an ``(len(seeds), n+1)`` array."""
        N = len(seeds)
        out = np.zeros((N, self.grid.n + 1))
        if self.method == "dense":
            if not len(self.active):
                return out
            Z = np.empty((N, len(self.active)))
            for r, s in enumerate(seeds):
                Z[r] = s.generator().standard_normal(len(self.active))
            out[:, self.active] = Z @ self.factor.T
            return out
        M = len(self._sqrt_eig)
        Z = np.empty((N, M), dtype=np.complex128)
        for r, s in enumerate(seeds):
            z = s.generator().standard_normal((2, M))
            Z[r].real = z[0]
            Z[r].imag = z[1]
        incr = np.fft.fft(Z * self._sqrt_eig, axis=1).real[:, : self.grid.n]
        np.cumsum(incr, axis=1, out=out[:, 1:])
        return out

    def draw_one(self, seed: SeedSpec) -> SamplePath:
        return SamplePath(self.grid, self.draw([seed])[0])


def sample_path(k: Kernel, g: TimeGrid, seed: SeedSpec, sampler: GaussianSampler | None = None) -> SamplePath:
    """Draw G on ``g``; pass a prebuilt ``sampler`` to reuse its factorization."""
    if sampler is None:
        sampler = GaussianSampler(k, g)
    elif sampler.kernel != k or sampler.grid != g:
        raise GridMismatchError("sampler was built for a different kernel or grid")
    return sampler.draw_one(seed)


def seeds_for(root_seed: int, streams) -> list[SeedSpec]:
    return [SeedSpec(root_seed, int(i)) for i in streams]


def _as_grid_values(f, G: SamplePath) -> np.ndarray:
    f = np.asarray(f, dtype=np.float64)
    if f.shape != G.values.shape:
        raise GridMismatchError(f"integrand has shape {f.shape}, path has {G.values.shape}")
    return f


def cumulative_stieltjes(f, G: SamplePath) -> np.ndarray:
    """Running left-point sums ``I_j = sum_{i<j} f(t_i)(G_{i+1} - G_i)``, ``I_0 = 0``."""
    f = _as_grid_values(f, G)
    return _accel.kernels.cumulative_stieltjes(f, G.values[None, :])[0]


def cumulative_stieltjes_many(f: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Batched form: ``G`` has one driver path per row."""
    f = np.ascontiguousarray(f, dtype=np.float64)
    G = np.ascontiguousarray(G, dtype=np.float64)
    if G.ndim != 2 or G.shape[1] != f.shape[0]:
        raise GridMismatchError(f"integrand length {f.shape[0]} vs paths {G.shape}")
    return _accel.kernels.cumulative_stieltjes(f, G)


def stieltjes_integral(f, G: SamplePath) -> float:
    """Left-point sum over the whole grid."""
    return float(cumulative_stieltjes(f, G)[-1])


def write_path_csv(path, sp: SamplePath, column: str = "value", header: str | None = None) -> None:
    with open(Path(path), "w", encoding="utf-8", newline="\n") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        fh.write(f"t,{column}\n")
        for t, v in zip(sp.t, sp.values):
            fh.write(f"{t:.17g},{v:.17g}\n")
