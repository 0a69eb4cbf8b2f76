"""Acceptance criteria 1-9. Each test records one PASS/FAIL line, printed
in the terminal summary; run with ``pytest -m acceptance -rA``."""
import math
import os

import numpy as np
import pytest
from scipy import stats

from svrisk import backtest as bt
from svrisk import evt
from svrisk import pipeline as pl
from svrisk import var as ve
from svrisk.data import ReturnSeries, business_dates, load_csv, log_returns, split_train_test, summary_stats
from svrisk.garch import GarchParams, fit_garch, simulate_garch
from svrisk.mcmc import McmcConfig, convergence_check, fit_sv, posterior_summary
from svrisk.sv import SvParams, simulate, simulate_iid_returns

pytestmark = pytest.mark.acceptance


def _hits(t1, J=1000, p=0.05):
    h = np.zeros(J, dtype=int)
    h[:t1] = 1
    return bt.HitSequence(h, p)


def test_criterion_1_binomial_interval(criterion):
    b1000 = bt.binomial_test(_hits(50), beta=0.05)
    b250 = bt.binomial_test(_hits(12, J=250), beta=0.05)
    err = max(abs(b250.tau_low - 5.75), abs(b250.tau_high - 19.25))
    ok = b1000.ci == (37, 63) and err <= 1e-9
    criterion(1, ok, f"J=1000 CI {list(b1000.ci)}; J=250 tau ({b250.tau_low:.6f}, {b250.tau_high:.6f}), "
                     f"max error vs (5.75, 19.25) = {err:.3g}")


def test_criterion_2_kupiec_golden(criterion):
    lr68 = bt.kupiec_uc(_hits(68))[0]
    lr50 = bt.kupiec_uc(_hits(50))[0]
    criterion(2, abs(lr68 - 6.161) <= 0.01 and lr50 == 0.0, f"LR_uc(68)={lr68:.4f}, LR_uc(50)={lr50!r}")


def test_criterion_3_additivity_and_size(criterion):
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(1000):
        hs = bt.HitSequence((rng.random(1000) < rng.uniform(0.01, 0.2)).astype(int), 0.05)
        worst = max(worst, abs(bt.conditional_cc(hs)[0] - bt.kupiec_uc(hs)[0] - bt.christoffersen_ind(hs)[0]))
    rej = np.zeros(3)
    for s in range(500):
        hs = bt.HitSequence((np.random.default_rng(s).random(1000) < 0.05).astype(int), 0.05)
        rej += (bt.kupiec_uc(hs)[1], bt.christoffersen_ind(hs)[1], bt.conditional_cc(hs)[1])
    rates = rej / 500
    ok = worst <= 1e-9 and np.all((rates >= 0.02) & (rates <= 0.09))
    criterion(3, ok, f"max additivity error {worst:.2g}; size uc/ind/cc = {rates.round(3).tolist()}")


def test_criterion_4_garch(criterion):
    truth = GarchParams(0.0433, 0.1749, 0.7847, 8.0)
    x = simulate_garch(truth, 5000, seed=3)
    f = fit_garch(x)
    zs = {n: (getattr(f.params, n) - getattr(truth, n)) / f.std_errors[n] for n in ("alpha0", "alpha1", "beta1")}
    eig = np.linalg.eigvalsh(f.hessian)
    scale_err = 0.0
    for c in (0.5, 2.0):
        g = fit_garch(c * x)
        scale_err = max(scale_err, abs(g.params.alpha0 / (c * c * f.params.alpha0) - 1),
                        *(abs(getattr(g.params, n) / getattr(f.params, n) - 1) for n in ("alpha1", "beta1", "nu")))
    ok = all(abs(z) < 3 for z in zs.values()) and np.all(eig < 0) and scale_err < 1e-3
    criterion(4, ok, f"z = {[round(float(z), 2) for z in zs.values()]}, max Hessian eigenvalue {eig.max():.3g}, "
                     f"scale error {scale_err:.2g}")


def test_criterion_5_gpd(criterion):
    y = stats.genpareto.rvs(0.385, scale=0.085, size=100_000, random_state=np.random.default_rng(5))
    m = evt.fit_gpd(np.r_[-1.0, y], 0.0)
    h = np.cbrt(np.finfo(float).eps) * np.array([abs(m.xi), m.beta])
    grad = np.array([
        (evt.gpd_loglik(m.xi + h[0], m.beta, y) - evt.gpd_loglik(m.xi - h[0], m.beta, y)) / (2 * h[0]),
        (evt.gpd_loglik(m.xi, m.beta + h[1], y) - evt.gpd_loglik(m.xi, m.beta - h[1], y)) / (2 * h[1])])
    z_xi, z_beta = (m.xi - 0.385) / m.se_xi, (m.beta - 0.085) / m.se_beta

    tail = evt.GpdTailModel(u=2.403, xi=0.435, beta=0.061, n_total=1509, n_exceed=91)
    inv = 0.0
    for a in np.linspace(tail.f_u, 0.9999, 200):
        inv = max(inv, abs(evt.tail_cdf(tail, evt.tail_quantile(tail, a)) - a))
    for z in np.linspace(tail.u, tail.u + 5, 200):
        inv = max(inv, abs(evt.tail_quantile(tail, evt.tail_cdf(tail, z)) - z))

    base = evt.fit_gpd(np.random.default_rng(99).standard_t(4, 4000), 1.5)
    rej = np.zeros(2)
    for s in range(200):
        e = stats.genpareto.rvs(base.xi, scale=base.beta, size=300, random_state=np.random.default_rng(1000 + s))
        z = np.r_[base.u - 1.0, base.u + e]
        g = evt.goodness_of_fit(evt.fit_gpd(z, base.u), z, level=0.10)
        rej += (not g.w2_pass, not g.a2_pass)
    rates = rej / 200
    ok = (np.linalg.norm(grad) < 1e-4 and abs(z_xi) < 3 and abs(z_beta) < 3 and inv <= 1e-9
          and np.all((rates >= 0.05) & (rates <= 0.15)))
    criterion(5, ok, f"|grad| {np.linalg.norm(grad):.2g}; z(xi, beta) = ({z_xi:.2f}, {z_beta:.2f}); "
                     f"inversion error {inv:.2g}; GoF size W2/A2 = {rates.tolist()}")


@pytest.mark.slow
def test_criterion_6_sv_recovery(criterion):
    truth = SvParams(mu=-0.56, phi=0.94, sigma=0.33, nu=24.0, rho=-0.61, beta=(0.05,))
    covered, geweke_fail = 0, []
    for s in range(5):
        path = simulate("svtl", truth, 1500, seed=s)
        post = fit_sv(path.y, "svtl", cfg=McmcConfig(draws=20000, burn_in=2000, seed=s))
        summ = posterior_summary(post)
        covered += all(summ[n]["ci_low"] <= getattr(truth, n) <= summ[n]["ci_high"]
                       for n in ("mu", "phi", "sigma", "rho"))
        geweke_fail += [f"seed {s} {n} z={d.geweke_z:.2f}" for n, d in convergence_check(post).items()
                        if not d.passed]
    ok = covered >= 4 and not geweke_fail
    criterion(6, ok, f"coverage {covered}/5; Geweke |z| >= 1.96: {geweke_fail or 'none'}")


@pytest.mark.slow
@pytest.mark.filterwarnings("ignore:GARCH fit on the stationarity boundary")
def test_criterion_7_end_to_end(criterion, tmp_path):
    y = simulate_iid_returns(2500, "t", 15.0, seed=42)
    train, test = split_train_test(y)
    cfg = pl.RunConfig(models=("svt", "svtl", "garch", "empirical"), alpha=0.95, seed=42, out=tmp_path)
    _, _, _, reports = pl.run_all(train, test, cfg, write=False)
    by = {r.model_tag: r for r in reports}
    sv, emp = by["SVtl-EVT"], by["Empirical"]
    sv_ok = 37 <= sv.exceedance <= 63 and not sv.uc_reject
    emp_bad = not (emp.ci[0] <= emp.exceedance <= emp.ci[1]) or emp.uc_reject
    detail = "; ".join(f"{r.model_tag} {r.exceedance} LR_uc {r.lr_uc:.3f}" for r in reports)
    criterion(7, len(test) == 1000 and sv_ok and emp_bad, detail)


def test_criterion_8_user_sp500(criterion):
    path = os.environ.get("SVRISK_SP500_CSV")
    if not path:
        pytest.skip("criterion 8 needs SVRISK_SP500_CSV (licensed S&P 500 data)")
    data = load_csv(path)
    r = log_returns(data) if hasattr(data, "prices") else data
    train, test = split_train_test(r)
    st = summary_stats(train)
    expected = {"mean": 0.037, "sd": 0.949, "skewness": -0.510, "excess_kurtosis": 4.504,
                "jarque_bera": 1346.570}
    stat_err = {k: abs(getattr(st, k) / v - 1) for k, v in expected.items()}
    cfg = pl.RunConfig(models=("svt", "svl", "svtl", "garch", "empirical"), seed=0,
                       out=os.environ.get("SVRISK_SP500_OUT", "sp500_run"))
    _, _, _, reports = pl.run_all(train, test, cfg)
    table6 = {"SVt-EVT": 50, "SVl-EVT": 43, "SVtl-EVT": 38, "GARCH-EVT": 59, "Empirical": 68, "GARCH": 54}
    cnt_err = {r.model_tag: abs(r.exceedance / table6[r.model_tag] - 1) for r in reports if r.model_tag in table6}
    ok = all(e <= 0.01 for e in stat_err.values()) and all(e <= 0.10 for e in cnt_err.values())
    criterion(8, ok, f"summary rel. errors {stat_err}; exceedance rel. errors {cnt_err}")


def test_criterion_9_empirical_oracle(criterion):
    rng = np.random.default_rng(9)
    n_windows, window = 1000, 252
    r = rng.standard_t(4, window + n_windows)
    hist = ReturnSeries(business_dates(window, 0), r[:window])
    test = ReturnSeries(business_dates(0, n_windows), r[window:])
    mismatches = 0
    for alpha in (0.9, 0.95, 0.99):
        v = ve.empirical_var(hist, test, alpha, window)
        k = math.ceil(window * alpha - 1e-9)
        ref = [sorted(-r[i:i + window])[k - 1] for i in range(n_windows)]
        mismatches += int(np.sum(v.var_values != np.array(ref)))
    criterion(9, mismatches == 0, f"{mismatches} mismatches over 3 x {n_windows} windows")
