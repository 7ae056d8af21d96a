"""Monte Carlo experiments: consistency rate, limit law and bound sweeps.

Replicate ``k`` always draws its driver from stream ``k`` of the root seed,
and replicates are processed in fixed-size chunks, so reports do not depend
on the number of worker threads.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import bounds as bnd
from .errors import DomainError, NotApplicableError, RangeError, DegenerateKernelError
from .estimator import DEFAULT_SCAN_POINTS, REL_TOL, minimize_l1_array
from .kernels import BM, Kernel, TimeGrid, covariance_matrix
from .limit import direction, limit_paths, zeta_values
from .model import ModelParams, exact_paths, gronwall_sides, GRONWALL_SLACK
from .sampler import GaussianSampler, SeedSpec, seeds_for

log = logging.getLogger(__name__)

CONSISTENCY = "consistency"
LIMIT_DIST = "limit-dist"
BOUNDS = "bounds"

CHUNK = 256
BOUNDARY_WARN_FRACTION = 0.01
TAIL_OFFSETS = (0.5, 1.0, 1.5)
ROUGH_HURST = 0.3


@dataclass(frozen=True)
class ExperimentConfig:
    kernel: Kernel
    params: ModelParams
    grid: TimeGrid
    experiment: str
    eps_list: tuple = (0.01,)
    delta: float | None = None
    replicates: int = 1000
    root_seed: int = 0
    scan_points: int = DEFAULT_SCAN_POINTS
    refine_factor: int = 4
    reflection_n: int = 16384
    threads: int = field(default=1, compare=False)

    def __post_init__(self):
        if self.experiment not in (CONSISTENCY, LIMIT_DIST, BOUNDS):
            raise DomainError(f"unknown experiment {self.experiment!r}")
        if self.replicates < 1:
            raise DomainError("replicates must be at least 1")
        if abs(self.grid.T - self.params.T) > 1e-12 * self.params.T:
            raise DomainError("grid horizon and model horizon differ")
        eps = tuple(float(e) for e in self.eps_list)
        if any(e < 0 for e in eps) or len(set(eps)) != len(eps) or not eps:
            raise DomainError("eps_list must be nonempty, nonnegative and distinct")
        object.__setattr__(self, "eps_list", eps)
        if self.experiment == CONSISTENCY and not (self.delta is not None and self.delta > 0):
            raise DomainError("consistency experiment needs delta > 0")
        if self.threads < 1:
            raise DomainError("threads must be at least 1")

    def echo(self) -> dict:
        """Everything that determines the results; the thread count is excluded."""
        p = self.params
        return {
            "experiment": self.experiment,
            "kernel": self.kernel.spec,
            "theta0": p.theta0,
            "x0": p.x0,
            "eps": p.eps,
            "eps_list": list(self.eps_list),
            "theta_lo": p.theta_lo,
            "theta_hi": p.theta_hi,
            "T": p.T,
            "n": self.grid.n,
            "delta": self.delta,
            "replicates": self.replicates,
            "seed": self.root_seed,
            "scan_points": self.scan_points,
            "refine_factor": self.refine_factor,
            "reflection_n": self.reflection_n,
        }


@dataclass
class ExperimentReport:
    experiment: str
    config: dict
    results: dict
    tables: dict = field(default_factory=dict)

    def to_json(self) -> str:
        body = {"experiment": self.experiment, "config": self.config, "results": self.results}
        return json.dumps(_jsonable(body), indent=2, allow_nan=False) + "\n"

    def write(self, out_dir) -> list[Path]:
        """Write ``report.json`` plus one CSV per table; returns the paths."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = []
        path = out / "report.json"
        path.write_text(self.to_json(), encoding="utf-8")
        written.append(path)
        header = config_header(self.config)
        for name, (columns, rows) in self.tables.items():
            path = out / f"{name}.csv"
            write_csv(path, columns, rows, header)
            written.append(path)
        return written


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def config_header(config: dict) -> str:
    return f"l1drift root_seed={config.get('seed')} config={json.dumps(_jsonable(config), sort_keys=True)}"


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def write_csv(path, columns, rows, header: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if header:
            fh.write(f"# {header}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _run_chunks(N: int, threads: int, work: Callable[[int, int], dict]) -> list[dict]:
    spans = [(s, min(s + CHUNK, N)) for s in range(0, N, CHUNK)]
    if threads <= 1 or len(spans) == 1:
        return [work(a, b) for a, b in spans]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda ab: work(*ab), spans))


def _stack(parts: list[dict], key: str, axis: int = 0) -> np.ndarray:
    return np.concatenate([p[key] for p in parts], axis=axis)


def binomial_se(p: float, N: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / N)


def ks_two_sample(a, b) -> float:
    """Largest gap between the two empirical CDFs, checked at every sample point."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    if not len(a) or not len(b):
        raise DomainError("both samples must be nonempty")
    x = np.concatenate([a, b])
    fa = np.searchsorted(a, x, side="right") / len(a)
    fb = np.searchsorted(b, x, side="right") / len(b)
    return float(np.max(np.abs(fa - fb)))


def _flag_rough(cfg: ExperimentConfig, results: dict) -> dict:
    # left-point sums lose accuracy on very rough drivers; flagged, not corrected
    a = cfg.kernel.hurst_exponent
    results["rough_driver"] = a is not None and a < ROUGH_HURST
    if results["rough_driver"]:
        log.warning("driver exponent %.3g < %.1f: left-point integrals may be inaccurate", a, ROUGH_HURST)
    return results


def _estimates(cfg: ExperimentConfig, X: np.ndarray) -> np.ndarray:
    g = cfg.grid
    t, w = g.points, g.trapezoid_weights
    return np.array([minimize_l1_array(x, t, w, cfg.params, cfg.scan_points).theta_hat for x in X])


def run_consistency(cfg: ExperimentConfig) -> ExperimentReport:
    """Exceedance frequency of ``|theta_hat - theta0| > delta`` for each eps.

    Replicate ``k`` reuses the same driver path for every eps, so the trend
    across eps is measured on common random numbers.
    """
    if cfg.experiment != CONSISTENCY:
        raise DomainError("config is not tagged for the consistency experiment")
    p, g = cfg.params, cfg.grid
    sampler = GaussianSampler(cfg.kernel, g)
    t = g.points

    def work(a, b):
        G = sampler.draw(seeds_for(cfg.root_seed, range(a, b)))
        th = np.stack([_estimates(cfg, exact_paths(p.theta0, p.x0, e, t, G)) for e in cfg.eps_list])
        return {"theta_hat": th, "sup": G.max(axis=1)}

    parts = _run_chunks(cfg.replicates, cfg.threads, work)
    theta_hat = _stack(parts, "theta_hat", axis=1)
    N = cfg.replicates
    m_hat = float(_stack(parts, "sup").mean())
    sigma2 = float(np.max(np.diag(covariance_matrix(cfg.kernel, g))))

    exceeded = np.abs(theta_hat - p.theta0) > cfg.delta
    rows = []
    for e_idx, eps in enumerate(cfg.eps_list):
        count = int(exceeded[e_idx].sum())
        freq = count / N
        se = binomial_se(freq, N)
        bound = bnd.consistency_bound(p, cfg.delta, eps, m_hat, sigma2)
        vacuous = bound >= 1.0
        rows.append({
            "eps": eps,
            "count": count,
            "frequency": freq,
            "se": se,
            "bound": bound,
            "bound_vacuous": vacuous,
            "bound_ok": True if vacuous else freq <= bound + 3.0 * se,
        })

    by_eps = sorted(rows, key=lambda r: -r["eps"])
    monotone = all(
        nxt["frequency"] <= cur["frequency"] + 2.0 * max(cur["se"], nxt["se"])
        for cur, nxt in zip(by_eps, by_eps[1:])
    )
    fit = [(r["eps"] ** -2, math.log(r["frequency"])) for r in rows if r["count"] > 0 and r["eps"] > 0]
    slope = float(np.polyfit(*zip(*fit), 1)[0]) if len(fit) >= 2 else None

    results = {
        "m_hat": m_hat,
        "sigma2": sigma2,
        "per_eps": rows,
        "log_frequency_vs_inverse_eps_squared_slope": slope,
        "checks": {
            "monotone": monotone,
            "bound_dominates": all(r["bound_ok"] for r in rows),
        },
    }
    table = [
        (k, eps, theta_hat[e_idx, k], exceeded[e_idx, k])
        for e_idx, eps in enumerate(cfg.eps_list)
        for k in range(N)
    ]
    return ExperimentReport(
        CONSISTENCY, cfg.echo(), _flag_rough(cfg, results),
        {"replicates": (("replicate", "eps", "theta_hat", "exceeded"), table)},
    )


def run_limit_dist(cfg: ExperimentConfig) -> ExperimentReport:
    """Compare ``(theta_hat - theta0)/eps`` against independent draws of zeta.

    Replicates ``0..N-1`` give the scaled estimation errors (and, on the same
    drivers, coupled zeta values); replicates ``N..2N-1`` give the
    independent zeta sample.
    """
    if cfg.experiment != LIMIT_DIST:
        raise DomainError("config is not tagged for the limit-distribution experiment")
    p, g = cfg.params, cfg.grid
    eps = cfg.eps_list[0]
    if not eps > 0:
        raise DomainError("limit-distribution experiment needs eps > 0")
    N = cfg.replicates
    sampler = GaussianSampler(cfg.kernel, g)
    t, w = g.points, g.trapezoid_weights
    h = direction(p.theta0, p.x0, g).values

    def work(a, b):
        G = sampler.draw(seeds_for(cfg.root_seed, range(a, b)))
        th = _estimates(cfg, exact_paths(p.theta0, p.x0, eps, t, G))
        coupled = np.array([zeta_values(y, h, w) for y in limit_paths(p.theta0, t, G)])
        Gz = sampler.draw(seeds_for(cfg.root_seed, range(N + a, N + b)))
        zeta = np.array([zeta_values(y, h, w) for y in limit_paths(p.theta0, t, Gz)])
        return {"theta_hat": th, "coupled": coupled, "zeta": zeta}

    parts = _run_chunks(N, cfg.threads, work)
    theta_hat = _stack(parts, "theta_hat")
    u = (theta_hat - p.theta0) / eps
    coupled = _stack(parts, "coupled")
    zeta = _stack(parts, "zeta")

    width = p.theta_hi - p.theta_lo
    edge_tol = 2.0 * REL_TOL * width
    pinned = (np.abs(theta_hat - p.theta_lo) <= edge_tol) | (np.abs(theta_hat - p.theta_hi) <= edge_tol)
    pinned_fraction = float(pinned.mean())
    gaps = np.abs(u - coupled)
    results = {
        "eps": eps,
        "ks": ks_two_sample(u, zeta),
        "n_u": N,
        "n_zeta": N,
        "coupled_median_gap": float(np.median(gaps)),
        "coupled_max_gap": float(gaps.max()),
        "boundary_fraction": pinned_fraction,
        "boundary_warning": pinned_fraction > BOUNDARY_WARN_FRACTION,
        "u_mean": float(u.mean()),
        "u_std": float(u.std(ddof=1)) if N > 1 else None,
        "zeta_mean": float(zeta.mean()),
        "zeta_std": float(zeta.std(ddof=1)) if N > 1 else None,
    }
    if results["boundary_warning"]:
        log.warning("theta_hat pinned at the search boundary in %.1f%% of replicates", 100 * pinned_fraction)
    tables = {
        "u_eps": (("replicate", "u_eps"), list(enumerate(u))),
        "zeta": (("replicate", "zeta"), list(enumerate(zeta))),
        "coupled": (("replicate", "u_eps", "zeta"), [(k, u[k], coupled[k]) for k in range(N)]),
    }
    return ExperimentReport(LIMIT_DIST, cfg.echo(), _flag_rough(cfg, results), tables)


def _bound_record(cfg: ExperimentConfig, parts_sup, parts_abs, sigma2: float) -> dict:
    k = cfg.kernel
    N = cfg.replicates
    sup, abs_sup = parts_sup, parts_abs
    m_hat = float(sup.mean())
    se = float(sup.std(ddof=1) / math.sqrt(N)) if N > 1 else float("nan")
    sigma = math.sqrt(sigma2)
    rec = {"kernel": k.spec, "H": k.hurst_exponent, "m_hat": m_hat, "se": se, "sigma2": sigma2}

    profile = bnd.MetricProfile.from_kernel(k, cfg.grid)
    a = k.hurst_exponent
    sandwich = None
    if a is not None and sigma2 > 0:
        C1, C2 = profile.holder_constants(a)
        if C1 > 0:
            sandwich = bnd.borovkov_sandwich(a, C1, C2) + (C1, C2)
    if sandwich is None:
        rec.update(sandwich_lo=None, sandwich_hi=None, sandwich_pass=None)
    else:
        lo, hi, C1, C2 = sandwich
        rec.update(sandwich_lo=lo, sandwich_hi=hi, C1=C1, C2=C2, sandwich_pass=lo <= m_hat <= hi)

    tails, berman = [], []
    if sigma2 > 0:
        for c in TAIL_OFFSETS:
            x = m_hat + c * sigma
            emp = float(np.mean(abs_sup >= x))
            bound = bnd.abs_tail(sigma2, m_hat, x)
            tails.append({"x": x, "empirical": emp, "bound": bound,
                          "pass": emp <= bound + 3.0 * binomial_se(emp, N)})
            try:
                berman.append({"x": x, "empirical": emp, "bound_C1": bnd.berman_tail(profile, x)})
            except (NotApplicableError, RangeError) as exc:
                berman.append({"x": x, "empirical": emp, "bound_C1": None, "note": str(exc)})
    else:
        # identically zero driver: every tail frequency is zero
        tails = [{"x": m_hat, "empirical": float(np.mean(abs_sup > m_hat)), "bound": 0.0, "pass": True}]
    rec["tail_checks"] = tails
    rec["berman_diagnostic"] = berman

    try:
        ent = bnd.entropy_integral(profile)
        ent_fine = bnd.entropy_integral(bnd.MetricProfile.from_kernel(k, cfg.grid.refine(cfg.refine_factor)))
        rec["entropy"] = {
            "value": ent,
            "refined_value": ent_fine,
            "refined_n": cfg.grid.n * cfg.refine_factor,
            "relative_change": abs(ent_fine - ent) / ent,
            "m_hat_over_entropy": m_hat / ent,
        }
    except DegenerateKernelError as exc:
        rec["entropy"] = {"value": None, "note": str(exc)}
    return rec


def run_bounds(cfg: ExperimentConfig) -> ExperimentReport:
    """Check the maximal inequalities and the Gronwall bound on simulated drivers."""
    if cfg.experiment != BOUNDS:
        raise DomainError("config is not tagged for the bounds experiment")
    p, g = cfg.params, cfg.grid
    sampler = GaussianSampler(cfg.kernel, g)
    t = g.points

    def work(a, b):
        G = sampler.draw(seeds_for(cfg.root_seed, range(a, b)))
        X = exact_paths(p.theta0, p.x0, p.eps, t, G)
        lhs, rhs = gronwall_sides(p, t, X, G)
        return {"sup": G.max(axis=1), "abs": np.abs(G).max(axis=1),
                "holds": lhs <= rhs * (1 + GRONWALL_SLACK), "lhs": lhs, "rhs": rhs}

    parts = _run_chunks(cfg.replicates, cfg.threads, work)
    sigma2 = float(np.max(np.diag(covariance_matrix(cfg.kernel, g))))
    rec = _bound_record(cfg, _stack(parts, "sup"), _stack(parts, "abs"), sigma2)
    holds = _stack(parts, "holds")
    rec["gronwall"] = {"holds": int(holds.sum()), "paths": int(len(holds)), "pass": bool(holds.all())}

    if cfg.kernel.kind == BM:
        fine = TimeGrid(g.T, cfg.reflection_n)
        st = bnd.sup_statistics(cfg.kernel, fine, cfg.replicates, SeedSpec(cfg.root_seed, cfg.replicates),
                                method="circulant", chunk=64)
        oracle = math.sqrt(2.0 * g.T / math.pi)
        rec["reflection"] = {"n": fine.n, "m_hat": st.m_hat, "se": st.se, "oracle": oracle,
                             "pass": abs(st.m_hat - oracle) <= 4.0 * st.se}

    rec["checks"] = {
        "sandwich": rec["sandwich_pass"],
        "tails": all(tc["pass"] for tc in rec["tail_checks"]),
        "gronwall": rec["gronwall"]["pass"],
    }
    if "reflection" in rec:
        rec["checks"]["reflection"] = rec["reflection"]["pass"]
    lhs, rhs = _stack(parts, "lhs"), _stack(parts, "rhs")
    table = [(k, lhs[k], rhs[k], holds[k]) for k in range(len(holds))]
    return ExperimentReport(BOUNDS, cfg.echo(), _flag_rough(cfg, rec),
                            {"gronwall": (("replicate", "lhs", "rhs", "holds"), table)})


RUNNERS = {CONSISTENCY: run_consistency, LIMIT_DIST: run_limit_dist, BOUNDS: run_bounds}


def run(cfg: ExperimentConfig) -> ExperimentReport:
    return RUNNERS[cfg.experiment](cfg)
