import math

import numpy as np
import pytest
from scipy.integrate import quad

from l1drift.bounds import (
    MetricProfile, Q_function, Q_inverse, abs_tail, berman_tail, borovkov_sandwich, consistency_bound,
    covering_number, entropy_integral, estimate_sup_mean, nourdin_tail, rho, sup_statistics,
)
from l1drift.errors import DegenerateKernelError, DomainError, NotApplicableError, RangeError
from l1drift.kernels import TimeGrid, bm, fbm, tabulated
from l1drift.model import ModelParams
from l1drift.sampler import SeedSpec

SEED = 12345


def zero_kernel(g):
    return tabulated(np.zeros((g.n + 1, g.n + 1)), g.points)


def line_profile(n=100):
    g = TimeGrid(1.0, n)
    t = g.points
    return MetricProfile.from_distance(g, np.abs(t[:, None] - t[None, :]), 1.0)


def test_profile_is_a_metric():
    prof = MetricProfile.from_kernel(fbm(0.3), TimeGrid(1.0, 32))
    assert np.all(prof.d >= 0) and np.array_equal(prof.d, prof.d.T)
    assert np.all(np.diag(prof.d) == 0)
    assert prof.triangle_violation() <= 1e-12


def test_rho_examples():
    g = TimeGrid(1.0, 64)
    prof = MetricProfile.from_kernel(fbm(0.7), g)
    assert rho(prof, 0.0) == 0.0
    assert rho(prof, 1.0) == prof.D
    assert rho(prof, 0.25) == pytest.approx(0.25**0.7, rel=1e-10)
    assert np.all(np.diff(prof.rho_knots) >= 0)
    with pytest.raises(DomainError):
        rho(prof, -1.0)


def _Q_quad(prof, delta):
    """Quadrature split at every kink of the interpolated rho."""
    g = prof.grid
    lags = np.arange(g.n + 1) * g.dt

    def integrand(y):
        return np.interp(delta * math.exp(-y * y), lags, prof.rho_knots)

    kinks = lags[(lags > 0) & (lags < delta)]
    ys = np.sort(np.sqrt(np.log(delta / kinks)))
    edges = np.concatenate([[0.0], ys])
    total = sum(quad(integrand, a, b, epsabs=1e-15, epsrel=1e-13)[0] for a, b in zip(edges, edges[1:]))
    return total + quad(integrand, edges[-1], np.inf, epsabs=1e-15, epsrel=1e-13)[0]


@pytest.mark.parametrize("delta", [0.01, 0.3, 1.0, 2.5])
def test_Q_against_quadrature(delta):
    prof = MetricProfile.from_kernel(fbm(0.6), TimeGrid(1.0, 64))
    assert Q_function(prof, delta) == pytest.approx(_Q_quad(prof, delta), rel=1e-8)


def test_Q_brownian_closed_form():
    # rho(eps) = eps^{1/2} gives Q(delta) = delta^{1/2} sqrt(pi / H) / 2
    prof = MetricProfile.from_kernel(fbm(0.5), TimeGrid(1.0, 1024))
    assert Q_function(prof, 1.0) == pytest.approx(0.5 * math.sqrt(2 * math.pi), rel=5e-3)


def test_Q_monotone_and_inverse():
    prof = MetricProfile.from_kernel(fbm(0.7), TimeGrid(1.0, 128))
    ds = np.geomspace(1e-3, 10, 40)
    q = [Q_function(prof, d) for d in ds]
    assert all(b > a for a, b in zip(q, q[1:]))
    for x in (0.05, 0.5, 1.0, 3.0):
        assert Q_function(prof, Q_inverse(prof, x)) == pytest.approx(x, rel=1e-8)
    with pytest.raises(RangeError):
        Q_inverse(prof, 0.0)
    with pytest.raises(DomainError):
        Q_function(prof, 0.0)


def test_berman_exponent():
    g = TimeGrid(1.0, 64)
    prof = MetricProfile.from_kernel(bm(), g)
    assert prof.sigma2 == pytest.approx(1.0)
    expected = math.exp(-2.0) / Q_inverse(prof, 0.5)
    assert berman_tail(prof, 2.0) == pytest.approx(expected, rel=1e-12)
    assert berman_tail(prof, 2.0, C=3.0) == pytest.approx(3 * expected, rel=1e-12)


def test_berman_not_applicable():
    g = TimeGrid(1.0, 8)
    d = np.ones((9, 9)) - np.eye(9)
    with pytest.raises(NotApplicableError):
        berman_tail(MetricProfile.from_distance(g, d, 1.0), 1.0)


def test_covering_examples():
    prof = line_profile()
    assert covering_number(prof, 0.25) == 2
    assert covering_number(prof, prof.D) == 1
    assert covering_number(prof, 5.0) == 1
    prof = MetricProfile.from_kernel(fbm(0.5), TimeGrid(1.0, 256))
    assert covering_number(prof, 0.5) == math.ceil(1 / (2 * 0.5**2))
    with pytest.raises(DomainError):
        covering_number(prof, 0.0)


def test_covering_nonincreasing():
    prof = MetricProfile.from_kernel(fbm(0.4), TimeGrid(1.0, 128))
    counts = [covering_number(prof, e) for e in np.linspace(0.01, prof.D, 60)]
    assert all(b <= a for a, b in zip(counts, counts[1:]))
    assert counts[-1] == 1


def test_entropy_refinement_stable():
    e256 = entropy_integral(MetricProfile.from_kernel(fbm(0.5), TimeGrid(1.0, 256)))
    e1024 = entropy_integral(MetricProfile.from_kernel(fbm(0.5), TimeGrid(1.0, 1024)))
    assert math.isfinite(e256) and e256 > 0
    assert abs(e1024 - e256) / e1024 <= 0.02


def test_entropy_grows_with_roughness():
    g = TimeGrid(1.0, 256)
    vals = [entropy_integral(MetricProfile.from_kernel(fbm(H), g)) for H in (0.9, 0.7, 0.5, 0.3)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_entropy_degenerate():
    g = TimeGrid(1.0, 8)
    with pytest.raises(DegenerateKernelError):
        entropy_integral(MetricProfile.from_kernel(zero_kernel(g), g))


def test_sandwich_examples():
    lo, hi = borovkov_sandwich(0.25, 1.0, 1.0)
    assert lo == pytest.approx(0.4) and hi == pytest.approx(32.6)
    assert borovkov_sandwich(1.0, 1.0, 1.0) == pytest.approx((0.2, 16.3))
    with pytest.raises(DomainError):
        borovkov_sandwich(1.5, 1.0, 1.0)
    with pytest.raises(DomainError):
        borovkov_sandwich(0.5, 2.0, 1.0)


def test_holder_constants_fbm():
    prof = MetricProfile.from_kernel(fbm(0.7), TimeGrid(1.0, 32))
    C1, C2 = prof.holder_constants(0.7)
    assert C1 == pytest.approx(1.0, rel=1e-9) and C2 == pytest.approx(1.0, rel=1e-9)


def test_nourdin_tail():
    assert nourdin_tail(1.0, 0.5, 1.5) == pytest.approx(math.exp(-0.5), rel=1e-15)
    assert nourdin_tail(1.0, 0.5, 0.5 + 1e-9) == pytest.approx(1.0)
    assert abs_tail(1.0, 0.5, 1.5) == pytest.approx(2 * math.exp(-0.5))
    with pytest.raises(DomainError):
        nourdin_tail(1.0, 0.5, 0.5)
    with pytest.raises(DomainError):
        nourdin_tail(0.0, 0.5, 1.0)


def test_nourdin_tail_dominates_empirical():
    g = TimeGrid(1.0, 128)
    st = sup_statistics(fbm(0.7), g, 5000, SeedSpec(SEED))
    for c in (0.5, 1.0, 1.5):
        x = st.m_hat + c
        emp = float(np.mean(st.sup >= x))
        se = math.sqrt(emp * (1 - emp) / 5000)
        assert emp <= nourdin_tail(1.0, st.m_hat, x) + 3 * se


def test_sup_mean_brownian_reflection():
    m, se = estimate_sup_mean(bm(), TimeGrid(1.0, 16384), 4000, SeedSpec(SEED), method="circulant")
    assert abs(m - math.sqrt(2 / math.pi)) <= 4 * se


def test_sup_mean_zero_kernel():
    g = TimeGrid(1.0, 16)
    m, se = estimate_sup_mean(zero_kernel(g), g, 100, SeedSpec(SEED))
    assert m == 0.0 and se == 0.0
    with pytest.raises(DomainError):
        estimate_sup_mean(zero_kernel(g), g, 10, SeedSpec(SEED))


def test_consistency_bound_edges():
    p = ModelParams(1.0, 1.0, 0.1, 0.0, 2.0)
    assert consistency_bound(p, 0.1, 0.0, 0.8, 1.0) == 0.0
    assert consistency_bound(p, 0.1, 0.05, 0.8, 1.0) == 1.0
    vals = [consistency_bound(p, 0.1, e, 0.8, 1.0) for e in (0.01, 0.005, 0.002, 0.001)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-50
    with pytest.raises(DomainError):
        consistency_bound(p, 0.0, 0.1, 0.8, 1.0)
