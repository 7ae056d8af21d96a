import json
import math

import numpy as np
import pytest
from scipy.stats import ks_2samp

from l1drift import harness
from l1drift.errors import DomainError
from l1drift.harness import ExperimentConfig, ks_two_sample, run
from l1drift.kernels import TimeGrid, bm, fbm, tabulated
from l1drift.model import ModelParams

SEED = 12345


def config(experiment, kernel=None, n=32, N=40, threads=1, eps_list=(0.3, 0.1), delta=0.1, **kw):
    p = ModelParams(1.0, 1.0, 0.1, 0.0, 2.0)
    return ExperimentConfig(
        kernel=kernel or fbm(0.7), params=p, grid=TimeGrid(1.0, n), experiment=experiment,
        eps_list=eps_list, delta=delta, replicates=N, root_seed=SEED, threads=threads, **kw,
    )


def test_ks_examples():
    assert ks_two_sample([0, 1], [0, 1]) == 0.0
    assert ks_two_sample([0, 1], [10, 11]) == 1.0
    assert ks_two_sample([0, 1], [0.5, 1.5]) == 0.5
    rng = np.random.default_rng(SEED)
    for _ in range(20):
        a, b = rng.normal(size=rng.integers(5, 80)), rng.normal(0.3, size=rng.integers(5, 80))
        assert ks_two_sample(a, b) == pytest.approx(ks_2samp(a, b).statistic, abs=1e-14)
    with pytest.raises(DomainError):
        ks_two_sample([], [1.0])


def test_config_validation():
    with pytest.raises(DomainError):
        config("nope")
    with pytest.raises(DomainError):
        config(harness.CONSISTENCY, delta=None)
    with pytest.raises(DomainError):
        config(harness.CONSISTENCY, eps_list=(0.1, 0.1))
    with pytest.raises(DomainError):
        config(harness.BOUNDS, threads=0)


def test_zero_noise_never_exceeds():
    r = run(config(harness.CONSISTENCY, eps_list=(0.0, 0.2))).results
    zero = [row for row in r["per_eps"] if row["eps"] == 0.0][0]
    assert zero["count"] == 0 and zero["bound"] == 0.0


def test_consistency_report_fields():
    rep = run(config(harness.CONSISTENCY, N=50))
    body = json.loads(rep.to_json())
    assert body["experiment"] == "consistency"
    assert body["config"]["seed"] == SEED
    for row in body["results"]["per_eps"]:
        assert row["se"] == pytest.approx(math.sqrt(row["frequency"] * (1 - row["frequency"]) / 50))
    assert len(rep.tables["replicates"][1]) == 100


def test_limit_dist_report():
    rep = run(config(harness.LIMIT_DIST, N=60, eps_list=(0.01,)))
    r = rep.results
    assert 0.0 <= r["ks"] <= 1.0
    assert r["coupled_median_gap"] < 0.1
    assert r["boundary_warning"] is False


def test_boundary_warning():
    p = ModelParams(1.0, 1.0, 0.5, 0.95, 1.05)
    cfg = ExperimentConfig(fbm(0.7), p, TimeGrid(1.0, 32), harness.LIMIT_DIST, eps_list=(0.5,),
                           replicates=40, root_seed=SEED)
    r = run(cfg).results
    assert r["boundary_fraction"] > 0.01 and r["boundary_warning"] is True


def test_bounds_zero_kernel():
    g = TimeGrid(1.0, 16)
    k = tabulated(np.zeros((17, 17)), g.points)
    r = run(config(harness.BOUNDS, kernel=k, n=16, N=30)).results
    assert r["m_hat"] == 0.0
    assert all(tc["empirical"] == 0.0 for tc in r["tail_checks"])
    assert all(v in (True, None) for v in r["checks"].values())


def test_rough_driver_flag(caplog):
    assert run(config(harness.BOUNDS, N=20)).results["rough_driver"] is False
    with caplog.at_level("WARNING"):
        r = run(config(harness.BOUNDS, kernel=fbm(0.2), N=20)).results
    assert r["rough_driver"] is True
    assert "left-point" in caplog.text


def test_bounds_brownian_has_reflection_check():
    r = run(config(harness.BOUNDS, kernel=bm(), n=16, N=200, reflection_n=1024)).results
    assert "reflection" in r["checks"]
    assert r["gronwall"]["pass"]


@pytest.mark.parametrize("experiment", [harness.CONSISTENCY, harness.LIMIT_DIST, harness.BOUNDS])
def test_byte_identical_across_threads(tmp_path, experiment):
    kw = {"eps_list": (0.01,)} if experiment == harness.LIMIT_DIST else {}
    outs = []
    for threads in (1, 3):
        cfg = config(experiment, N=harness.CHUNK * 2 + 17, threads=threads, **kw)
        d = tmp_path / f"t{threads}"
        files = run(cfg).write(d)
        outs.append({f.name: f.read_bytes() for f in files})
    assert outs[0].keys() == outs[1].keys()
    for name in outs[0]:
        assert outs[0][name] == outs[1][name], name


def test_csv_header(tmp_path):
    files = run(config(harness.BOUNDS, N=20)).write(tmp_path)
    csv = [f for f in files if f.suffix == ".csv"][0]
    first = csv.read_text().splitlines()[0]
    assert first.startswith("# l1drift root_seed=12345 config=")


@pytest.mark.slow
def test_exceedance_rate_at_small_noise_large_sample():
    # at N=500 the 1% threshold sits inside the binomial noise; a larger run resolves it
    p = ModelParams(1.0, 1.0, 0.05, 0.0, 2.0)
    cfg = ExperimentConfig(fbm(0.7), p, TimeGrid(1.0, 256), harness.CONSISTENCY, eps_list=(0.05,),
                           delta=0.1, replicates=20000, root_seed=SEED)
    row = run(cfg).results["per_eps"][0]
    assert row["frequency"] <= 0.01
