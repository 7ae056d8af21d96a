"""Time the numba and numpy backends on the hot kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel is called once before timing so numba compilation is excluded.
Results from both backends are compared before timings are printed.
"""

import argparse
import time

import numpy as np

from l1drift._accel import load_backend
from l1drift.bounds import MetricProfile
from l1drift.kernels import TimeGrid, fbm
from l1drift.sampler import GaussianSampler, seeds_for


def cases():
    g = TimeGrid(1.0, 512)
    t, w = g.points, g.trapezoid_weights
    G = GaussianSampler(fbm(0.7), g).draw(seeds_for(0, range(256)))
    X = np.exp(t) * (1.0 + 0.1 * G[0])
    thetas = np.linspace(0.0, 2.0, 200)
    rng = np.random.default_rng(0)
    r, wt = rng.normal(size=20001), rng.uniform(size=20001)
    d = np.ascontiguousarray(MetricProfile.from_kernel(fbm(0.5), TimeGrid(1.0, 1024)).d)
    f = np.exp(-t)
    return {
        "cumulative_stieltjes 256x513": lambda k: k.cumulative_stieltjes(f, G),
        "euler_paths 256x513": lambda k: k.euler_paths(1.0, 1.0, 0.1, g.dt, G),
        "l1_objectives 200 thetas": lambda k: k.l1_objectives(X, t, w, 1.0, thetas),
        "minimize_l1": lambda k: k.minimize_l1(X, t, w, 1.0, thetas, 2e-7)[0],
        "weighted_median n=20001": lambda k: k.weighted_median(r, wt),
        "covering_count 1025 pts": lambda k: k.covering_count(d, 0.05),
        "lag_max 1025 pts": lambda k: k.lag_max(d),
    }


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = {name: load_backend(name) for name in ("numpy", "numba")}
    print(f"{'kernel':<30}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for name, call in cases().items():
        out = {b: call(k) for b, k in backends.items()}
        if not np.allclose(out["numpy"], out["numba"], rtol=1e-9, atol=1e-12):
            raise SystemExit(f"{name}: backends disagree")
        ms = {b: 1e3 * best_of(lambda: call(k), args.repeat) for b, k in backends.items()}
        print(f"{name:<30}{ms['numpy']:>12.3f}{ms['numba']:>12.3f}{ms['numpy'] / ms['numba']:>9.1f}x")


if __name__ == "__main__":
    main()
