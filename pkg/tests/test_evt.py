import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import optimize, stats

from svrisk import evt
from svrisk.errors import DataError, NumericalError


def _gpd_sample(xi, beta, n, seed):
    return stats.genpareto.rvs(xi, scale=beta, size=n, random_state=np.random.default_rng(seed))


def _fit_excesses(y):
    # one point below the threshold so that F(u) > 0
    return evt.fit_gpd(np.r_[-1.0, y], 0.0)


def fd_gradient(y, xi, beta):
    h = np.cbrt(np.finfo(float).eps) * np.array([max(abs(xi), 1e-3), beta])
    f = lambda a, b: evt.gpd_loglik(a, b, y)  # noqa: E731
    return np.array([(f(xi + h[0], beta) - f(xi - h[0], beta)) / (2 * h[0]),
                     (f(xi, beta + h[1]) - f(xi, beta - h[1])) / (2 * h[1])])


def reference_tail_cdf(z, u, xi, beta, frac):
    return 1.0 - frac * (1.0 + xi * (z - u) / beta) ** (-1.0 / xi)


# ---------------------------------------------------------------- mean excess

def test_mean_excess_exponential_memoryless():
    z = np.random.default_rng(0).exponential(0.5, 100_000)
    c = evt.mean_excess_curve(z)
    se = 0.5 / np.sqrt(c.counts)
    assert np.all(np.abs(c.e_values - 0.5) < 3 * se)
    assert np.all(np.diff(c.counts) <= 0) and np.all(np.diff(c.u_grid) >= 0)


def test_mean_excess_constant_sample():
    z = np.full(60, 3.0)
    c = evt.mean_excess_curve(z, u_grid=[0.0, 1.0, 2.5])
    np.testing.assert_allclose(c.e_values, [3.0, 2.0, 0.5], rtol=0, atol=0)


def test_mean_excess_slope_positive_for_heavy_tail():
    z = _gpd_sample(0.3, 1.0, 20_000, 1)
    c = evt.mean_excess_curve(z)
    ok = ~np.isnan(c.e_values)
    slope = np.polyfit(c.u_grid[ok], c.e_values[ok], 1)[0]
    assert slope > 0
    assert slope == pytest.approx(0.3 / 0.7, rel=0.5)


def test_mean_excess_errors_and_nan_marking(tmp_path):
    with pytest.raises(DataError):
        evt.mean_excess_curve(np.arange(10.0))
    z = np.arange(100.0)
    c = evt.mean_excess_curve(z, u_grid=[50.0, 96.0, 98.0])
    assert not np.isnan(c.e_values[0]) and np.isnan(c.e_values[1]) and np.isnan(c.e_values[2])
    with pytest.raises(DataError):
        evt.mean_excess_curve(z, u_grid=[97.0])
    c.to_csv(tmp_path / "me.csv")
    assert (tmp_path / "me.csv").read_text().splitlines()[0] == "u,e,count"


# ---------------------------------------------------------------- threshold

def test_select_threshold_modes():
    z = np.random.default_rng(2).standard_t(4, 1509)
    assert evt.select_threshold(z, u=2.403) == 2.403
    assert evt.select_threshold(np.arange(1, 101.0), q=0.95, min_exceed=5) == pytest.approx(95.05, abs=1e-12)
    assert evt.select_threshold(z, q=0.5) == evt.select_threshold(z, u=float(np.median(z)))
    assert evt.select_threshold(z) == float(np.quantile(z, 0.95))


def test_select_threshold_errors():
    with pytest.raises(DataError):
        evt.select_threshold(np.arange(1, 101.0), q=0.95)  # 5 exceedances
    with pytest.raises(DataError):
        evt.select_threshold(np.arange(100.0), q=1.5)
    with pytest.raises(DataError):
        evt.select_threshold(np.arange(100.0), q=0.5, u=3.0)


# ---------------------------------------------------------------- GPD fit

def test_exponential_limit():
    y = np.random.default_rng(3).exponential(1.0, 100_000)
    m = _fit_excesses(y)
    assert abs(m.xi) < 0.03
    assert abs(m.beta - 1.0) < 3 * m.se_beta


def test_recovery_of_heavy_tail():
    m = _fit_excesses(_gpd_sample(0.385, 0.085, 100_000, 4))
    assert abs(m.xi - 0.385) < 3 * m.se_xi
    assert abs(m.beta - 0.085) < 3 * m.se_beta


@pytest.mark.parametrize("xi, beta, n", [(0.385, 0.085, 100_000), (0.2, 1.0, 2000), (-0.3, 1.0, 2000),
                                         (0.0, 2.0, 5000)])
def test_first_order_condition(xi, beta, n):
    y = _gpd_sample(xi, beta, n, 5)
    m = _fit_excesses(y)
    assert np.linalg.norm(fd_gradient(y, m.xi, m.beta)) < 1e-4


def test_fit_is_global_maximum_on_grid():
    y = _gpd_sample(0.1, 1.0, 500, 6)
    m = _fit_excesses(y)
    grid = [(a, b) for a in np.linspace(-0.5, 0.8, 27) for b in np.linspace(0.5, 1.6, 23)]
    assert m.loglik >= max(evt.gpd_loglik(a, b, y) for a, b in grid) - 1e-9
    ref = stats.genpareto.fit(y, floc=0)
    assert m.loglik >= evt.gpd_loglik(ref[0], ref[2], y) - 1e-6


def test_location_consistency():
    y = _gpd_sample(0.25, 0.7, 3000, 7)
    u = 1.75
    a = evt.fit_gpd(np.r_[0.0, u + y], u)
    b = evt.fit_gpd(np.r_[-1.0, (u + y) - u], 0.0)
    assert a.xi == pytest.approx(b.xi, rel=1e-9) and a.beta == pytest.approx(b.beta, rel=1e-9)


def test_negative_shape_keeps_excesses_inside_support():
    y = _gpd_sample(-0.4, 1.0, 3000, 8)
    m = _fit_excesses(y)
    assert m.xi < 0
    assert np.all(y < -m.beta / m.xi)


def test_fit_errors():
    with pytest.raises(DataError):
        evt.fit_gpd(np.arange(20.0), 15.0)
    with pytest.raises(DataError):
        evt.fit_gpd(np.r_[np.zeros(5), np.full(20, 2.0)], 1.0)


def test_model_json_roundtrip():
    m = _fit_excesses(_gpd_sample(0.2, 1.0, 500, 9))
    back = evt.GpdTailModel.from_dict(json.loads(m.to_json()))
    assert back == m


# ---------------------------------------------------------------- tail CDF / quantile

def _model(u=0.0, xi=0.3, beta=1.0, n_total=1000, n_exceed=50):
    return evt.GpdTailModel(u=u, xi=xi, beta=beta, n_total=n_total, n_exceed=n_exceed)


def test_tail_cdf_examples():
    m = _model(u=1.5, n_exceed=50)
    assert evt.tail_cdf(m, 1.5) == 1 - 50 / 1000
    m0 = _model(xi=0.0, beta=1.0, n_exceed=50)
    assert evt.tail_cdf(m0, math.log(2)) == pytest.approx(1 - 0.025, abs=1e-15)
    with pytest.raises(DataError):
        evt.tail_cdf(m, 1.0)
    mneg = _model(xi=-0.5, beta=1.0)
    with pytest.raises(DataError):
        evt.tail_cdf(mneg, 2.5)


def test_tail_cdf_matches_reference_implementation():
    rng = np.random.default_rng(10)
    for _ in range(200):
        xi = rng.uniform(-0.4, 0.9)
        if abs(xi) < evt.XI_ZERO:
            continue
        beta, u = rng.uniform(0.05, 3), rng.normal()
        n_exc = int(rng.integers(10, 200))
        m = _model(u, xi, beta, 1000, n_exc)
        top = u - beta / xi if xi < 0 else u + 50 * beta
        z = rng.uniform(u, top)
        assert evt.tail_cdf(m, z) == pytest.approx(reference_tail_cdf(z, u, xi, beta, n_exc / 1000), abs=1e-12)


def test_tail_quantile_boundary_and_inversion():
    m = _model(u=0.7, n_exceed=80)
    assert evt.tail_quantile(m, m.f_u) == 0.7
    with pytest.raises(DataError):
        evt.tail_quantile(m, m.f_u - 1e-6)
    with pytest.raises(DataError):
        evt.tail_quantile(m, 1.0)
    m0 = _model(xi=0.0, beta=2.0, n_exceed=100)
    assert evt.tail_quantile(m0, 0.99) == pytest.approx(2.0 * math.log(0.1 / 0.01), rel=1e-14)


@pytest.mark.parametrize("n_exceed, alpha", [(91, 0.95), (30, 0.99)])
def test_tail_quantile_matches_bisection(n_exceed, alpha):
    m = evt.GpdTailModel(u=2.403, xi=0.435, beta=0.061, n_total=1509, n_exceed=n_exceed)
    q = evt.tail_quantile(m, alpha)
    ref = optimize.bisect(lambda z: evt.tail_cdf(m, z) - alpha, m.u, m.u + 1e3, xtol=1e-13, rtol=1e-15)
    assert q == pytest.approx(ref, abs=1e-9)


@given(st.floats(-0.45, 0.95), st.floats(0.05, 5), st.floats(-3, 3), st.integers(10, 400),
       st.floats(0, 1), st.floats(0, 1))
def test_tail_functions_are_monotone_inverses(xi, beta, u, n_exc, a, b):
    m = _model(u, xi, beta, 1000, n_exc)
    lo, hi = sorted((a, b))
    a1 = m.f_u + lo * (1 - m.f_u) * 0.999999
    a2 = m.f_u + hi * (1 - m.f_u) * 0.999999
    q1, q2 = evt.tail_quantile(m, a1), evt.tail_quantile(m, a2)
    assert q1 <= q2
    assert evt.tail_cdf(m, q1) == pytest.approx(a1, abs=1e-9)
    assert evt.tail_cdf(m, q2) == pytest.approx(a2, abs=1e-9)


def test_quantile_monotone_on_random_models():
    rng = np.random.default_rng(11)
    for _ in range(100):
        m = _model(rng.normal(), rng.uniform(-0.4, 0.9), rng.uniform(0.1, 2), 1000, int(rng.integers(10, 200)))
        a = np.sort(rng.uniform(m.f_u, 1 - 1e-6, 2))
        if a[0] < a[1]:
            assert evt.tail_quantile(m, a[0]) < evt.tail_quantile(m, a[1])


# ---------------------------------------------------------------- goodness of fit

def test_gof_plugin_identity():
    n = 40
    v = (np.arange(1, n + 1) - 0.5) / n
    w2, a2 = evt.gof_statistics(v)
    assert w2 == pytest.approx(1 / (12 * n), abs=1e-15)
    assert a2 >= 0


def test_gof_formula_brute_force():
    v = np.random.default_rng(12).random(25)
    n = v.size
    s = np.sort(v)
    w2 = sum((s[i] - (2 * i + 1) / (2 * n)) ** 2 for i in range(n)) + 1 / (12 * n)
    a2 = -n - sum((2 * i + 1) * (math.log(s[i]) + math.log(1 - s[n - 1 - i])) for i in range(n)) / n
    got = evt.gof_statistics(v)
    assert got == pytest.approx((w2, a2), rel=1e-12)


def test_gof_degenerate_transform():
    with pytest.raises(NumericalError):
        evt.gof_statistics([0.0, 0.5])
    with pytest.raises(NumericalError):
        evt.gof_statistics([0.5, 1.0])


def test_critical_values_interpolate_and_clamp():
    w, a = evt.gof_critical_values(0.0)
    j = evt.GOF_XI.index(0.0)
    assert (w, a) == (evt.GOF_W2[j, 2], evt.GOF_A2[j, 2])
    mid = evt.gof_critical_values(0.05)
    assert mid[0] == pytest.approx(0.5 * (evt.GOF_W2[j, 2] + evt.GOF_W2[j + 1, 2]))
    assert evt.gof_critical_values(5.0) == evt.gof_critical_values(evt.GOF_XI[-1])
    assert np.all(np.diff(evt.GOF_W2, axis=1) > 0) and np.all(np.diff(evt.GOF_A2, axis=1) > 0)


def test_gof_accepts_well_specified_tail():
    z = np.random.default_rng(13).standard_t(5, 5000)
    u = evt.select_threshold(z, q=0.9)
    m = evt.fit_gpd(z, u)
    g = evt.goodness_of_fit(m, z)
    assert g.w2 >= 0 and g.a2 >= 0 and g.n == m.n_exceed
    assert g.w2_pass and g.a2_pass


def gof_rejection_rates(n_samples=200, n=300):
    base = evt.fit_gpd(np.random.default_rng(99).standard_t(4, 4000), 1.5)
    rej = np.zeros(2)
    for seed in range(n_samples):
        y = _gpd_sample(base.xi, base.beta, n, 1000 + seed)
        z = np.r_[base.u - 1.0, base.u + y]
        m = evt.fit_gpd(z, base.u)
        g = evt.goodness_of_fit(m, z)
        rej += (not g.w2_pass, not g.a2_pass)
    return rej / n_samples


@pytest.mark.slow
def test_gof_size_calibration():
    w, a = gof_rejection_rates()
    assert 0.05 <= w <= 0.15 and 0.05 <= a <= 0.15
