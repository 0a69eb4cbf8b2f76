import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from svrisk import evt
from svrisk import var as ve
from svrisk.data import ReturnSeries, business_dates
from svrisk.errors import DataError
from svrisk.garch import GarchParams, fit_garch, simulate_garch
from svrisk.mcmc import SvPosterior
from svrisk.sv import SvParams, SvVariant, simulate, simulate_iid_returns


def point_posterior(v, p: SvParams, n: int) -> SvPosterior:
    """Posterior concentrated at ``p`` for ``n`` observations."""
    v = SvVariant(v)
    names, vals = ["mu", "phi", "sigma"], [p.mu, p.phi, p.sigma]
    if v.has_t:
        names.append("nu"), vals.append(p.nu)
    if v.has_leverage:
        names.append("rho"), vals.append(p.rho)
    names.append("beta"), vals.append(p.beta[0])
    draws = np.tile(vals, (10, 1))
    h = np.full(n, p.mu)
    return SvPosterior(v, tuple(names), draws, np.tile(h, (3, 1)), h, np.exp(h / 2), np.full(n, p.beta[0]), {}, {})


def split_series(y, n_hist):
    d = business_dates(n_hist, y.size - n_hist)
    return ReturnSeries(d[:n_hist], y[:n_hist]), ReturnSeries(d[n_hist:], y[n_hist:])


def forecast(mu, sigma):
    n = len(sigma)
    return ve.Forecast(business_dates(0, n), np.asarray(mu, float) * np.ones(n), np.asarray(sigma, float))


TAIL = evt.GpdTailModel(u=1.2, xi=0.2, beta=0.6, n_total=1000, n_exceed=100)


# ---------------------------------------------------------------- standardize

def test_standardize_identity_and_errors():
    y = simulate_iid_returns(50, seed=1)
    r = ve.standardize(y, y.returns, 1.0)
    assert np.all(r.z == 0)
    with pytest.raises(DataError):
        ve.standardize(y, 0.0, np.r_[np.ones(49), 0.0])


def test_standardize_matches_loop(rng):
    y = simulate_iid_returns(300, seed=2)
    mu, sd = rng.normal(size=300), rng.uniform(0.1, 3, 300)
    r = ve.standardize(y, mu, sd)
    ref = [(y.returns[i] - mu[i]) / sd[i] for i in range(300)]
    np.testing.assert_allclose(r.z, ref, rtol=0, atol=1e-12)
    np.testing.assert_allclose((r.x - r.mu_hat) / r.sigma_hat, r.z, rtol=0, atol=1e-12)


def test_garch_residuals_closer_to_normal_than_raw():
    p = GarchParams(0.0433, 0.1749, 0.7847, 8.0)
    x = simulate_garch(p, 3000, seed=3)
    y = ReturnSeries(business_dates(3000, 0), x)
    res = ve.garch_residuals(fit_garch(y), y)
    assert ve.qq_deviation(res.z) < ve.qq_deviation(y.returns)


# ---------------------------------------------------------------- forecasts

def test_static_volatility_forecast():
    p = SvParams(mu=-0.4, phi=0.0, sigma=1e-8, beta=(0.1,))
    y = simulate_iid_returns(400, "normal", seed=4, n_test=100)
    hist, test = y.slice(0, 300), y.slice(300)
    f = ve.sv_forecast(point_posterior("sv", p, 300), hist, test, 1000, seed=1)
    np.testing.assert_allclose(f.sigma_fore, math.exp(-0.2), rtol=1e-6)
    np.testing.assert_allclose(f.mu_fore, 0.1, rtol=1e-12)
    assert len(f.sigma_fore) == len(test)


def test_forecast_is_deterministic_given_seed():
    p = SvParams(mu=-0.5, phi=0.95, sigma=0.3, nu=10.0, rho=-0.5)
    y = simulate_iid_returns(300, seed=5, n_test=50)
    hist, test = y.slice(0, 250), y.slice(250)
    post = point_posterior("svtl", p, 250)
    a = ve.sv_forecast(post, hist, test, 1000, seed=9)
    b = ve.sv_forecast(post, hist, test, 1000, seed=9)
    c = ve.sv_forecast(post, hist, test, 1000, seed=10)
    assert np.array_equal(a.sigma_fore, b.sigma_fore)
    assert not np.array_equal(a.sigma_fore, c.sigma_fore)
    assert np.all(a.sigma_fore > 0)


def test_forecast_errors():
    p = SvParams(mu=0.0, phi=0.9, sigma=0.2)
    y = simulate_iid_returns(300, seed=6, n_test=50)
    hist, test = y.slice(0, 250), y.slice(250)
    post = point_posterior("sv", p, 250)
    with pytest.raises(DataError):
        ve.sv_forecast(post, hist, test, 500)
    with pytest.raises(DataError):
        ve.sv_forecast(post, test, hist, 1000)


def filter_mae(seed, n_particles, n=400):
    p = SvParams(mu=-0.56, phi=0.94, sigma=0.33, nu=24.0, rho=-0.61)
    path = simulate("svtl", p, n + 1, seed=seed)
    hist, test = split_series(path.y, n)
    f = ve.sv_forecast(point_posterior("svtl", p, n), hist, test, n_particles, seed=seed)
    return float(np.mean(np.abs(f.filtered_vol - np.exp(path.h[:n] / 2))))


@pytest.mark.slow
def test_filter_error_decreases_with_particles():
    wins = sum(filter_mae(s, 10_000) < filter_mae(s, 1_000) for s in range(5))
    assert wins >= 4


def test_garch_forecast_matches_recursion():
    p = GarchParams(0.05, 0.1, 0.85, 7.0)
    x = simulate_garch(p, 1200, seed=7)
    hist, test = split_series(x, 1000)
    f = fit_garch(hist)
    fc = ve.garch_forecast(f, hist, test)
    s2 = f.sigma2_path[-1]
    e = hist.returns[-1] - f.mean
    ref = []
    for r in test.returns:
        s2 = f.params.alpha0 + f.params.alpha1 * e * e + f.params.beta1 * s2
        ref.append(math.sqrt(s2))
        e = r - f.mean
    np.testing.assert_allclose(fc.sigma_fore, ref, rtol=1e-12)


# ---------------------------------------------------------------- dynamic VaR

def test_unit_forecast_gives_tail_quantile():
    v = ve.dynamic_var(forecast(0.0, np.ones(20)), TAIL, 0.95)
    assert np.all(v.var_values == evt.tail_quantile(TAIL, 0.95))


@given(st.floats(0.01, 100), st.lists(st.floats(0.01, 10), min_size=1, max_size=30), st.floats(-2, 2))
def test_scale_equivariance(c, sigma, mu):
    sigma = np.array(sigma)
    a = ve.dynamic_var(forecast(mu, sigma), TAIL, 0.97)
    b = ve.dynamic_var(forecast(mu, c * sigma), TAIL, 0.97)
    np.testing.assert_allclose(b.var_values + b.mu_fore, c * (a.var_values + a.mu_fore), rtol=1e-12)


def test_doubling_sigma_doubles_var_plus_mu():
    a = ve.dynamic_var(forecast(0.3, np.linspace(0.5, 2, 10)), TAIL, 0.95)
    b = ve.dynamic_var(forecast(0.3, 2 * np.linspace(0.5, 2, 10)), TAIL, 0.95)
    assert np.array_equal(b.var_values + b.mu_fore, 2 * (a.var_values + a.mu_fore))


def test_alpha_below_tail_is_rejected():
    with pytest.raises(DataError):
        ve.dynamic_var(forecast(0.0, np.ones(5)), TAIL, 0.85)


@given(st.floats(0.901, 0.999), st.floats(0.901, 0.999))
def test_var_monotone_in_alpha(a1, a2):
    a1, a2 = sorted((a1, a2))
    fc = forecast(0.1, np.linspace(0.5, 2, 8))
    assert np.all(ve.dynamic_var(fc, TAIL, a1).var_values <= ve.dynamic_var(fc, TAIL, a2).var_values)
    assert np.all(ve.garch_t_var(fc, 6.0, a1).var_values <= ve.garch_t_var(fc, 6.0, a2).var_values)
    y = simulate_iid_returns(400, seed=8, n_test=100)
    h, t = y.slice(0, 300), y.slice(300)
    assert np.all(ve.empirical_var(h, t, a1).var_values <= ve.empirical_var(h, t, a2).var_values)


def test_var_csv_roundtrip(tmp_path):
    v = ve.dynamic_var(forecast(0.1, np.linspace(0.5, 2, 10) / 3), TAIL, 0.95, "SVtl-EVT")
    v.to_csv(tmp_path / "v.csv")
    assert (tmp_path / "v.csv").read_text().splitlines()[0] == "date,alpha,var,mu_fore,sigma_fore,model"
    w = ve.VarSeries.from_csv(tmp_path / "v.csv")
    assert w.model_tag == "SVtl-EVT" and w.alpha == 0.95
    assert np.array_equal(w.var_values, v.var_values) and np.array_equal(w.dates, v.dates)


def test_var_series_invariants():
    with pytest.raises(DataError):
        ve.VarSeries(business_dates(0, 3), 0.95, np.ones(3), np.zeros(3), np.r_[1.0, 0.0, 1.0], "x")
    with pytest.raises(DataError):
        ve.VarSeries(business_dates(0, 3), 0.95, np.ones(2), np.zeros(3), np.ones(3), "x")


# ---------------------------------------------------------------- empirical VaR

def test_empirical_hundred_distinct_losses():
    losses = np.random.default_rng(9).permutation(np.arange(1.0, 101.0))
    hist = ReturnSeries(business_dates(100, 0), -losses)
    test = ReturnSeries(business_dates(0, 1), [0.0])
    v = ve.empirical_var(hist, test, 0.95, window=100)
    assert v.var_values[0] == 95.0


def test_empirical_constant_window():
    hist = ReturnSeries(business_dates(252, 0), np.full(252, -0.7))
    test = ReturnSeries(business_dates(0, 1), [0.0])
    for a in (0.5, 0.9, 0.99):
        assert ve.empirical_var(hist, test, a).var_values[0] == 0.7


def test_empirical_maximum_at_top_order_statistic():
    y = simulate_iid_returns(600, seed=10, n_test=300)
    h, t = y.slice(0, 300), y.slice(300)
    v = ve.empirical_var(h, t, 0.999, window=100)
    allr = y.returns
    ref = [np.max(-allr[300 + i - 100:300 + i]) for i in range(300)]
    assert np.array_equal(v.var_values, ref)


def sort_oracle(losses, alpha):
    s = sorted(losses)
    return s[math.ceil(len(s) * alpha - 1e-9) - 1]


@pytest.mark.parametrize("alpha", [0.9, 0.95, 0.99])
def test_empirical_matches_sort_oracle(alpha):
    y = simulate_iid_returns(1252, seed=11)
    h, t = y.slice(0, 252), y.slice(252)
    v = ve.empirical_var(h, t, alpha)
    r = y.returns
    ref = [sort_oracle(list(-r[i:i + 252]), alpha) for i in range(1000)]
    assert np.array_equal(v.var_values, ref)
    assert np.all(v.sigma_fore == 1) and np.all(v.mu_fore == 0)


def test_empirical_insufficient_history():
    y = simulate_iid_returns(300, seed=12, n_test=100)
    with pytest.raises(DataError):
        ve.empirical_var(y.slice(0, 200), y.slice(200), 0.95)


def test_order_statistic_index_exact_products():
    assert ve.order_statistic_index(100, 0.95) == 94
    assert ve.order_statistic_index(252, 0.95) == 239
    assert ve.order_statistic_index(100, 0.99) == 98
    assert ve.order_statistic_index(100, 0.999) == 99


# ---------------------------------------------------------------- Q-Q data

def test_qq_deviation_zero_on_normal_scores(tmp_path):
    theo, _ = ve.qq_points(np.zeros(3) + [1, 2, 3])
    assert ve.qq_deviation(theo) < ve.qq_deviation(np.random.default_rng(0).standard_t(3, theo.size * 100))
    ve.write_qq_csv(tmp_path / "qq.csv", np.arange(10.0), np.arange(10.0) ** 2)
    lines = (tmp_path / "qq.csv").read_text().splitlines()
    assert lines[0] == "series,theoretical,sample" and len(lines) == 21
