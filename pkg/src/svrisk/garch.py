"""GARCH(1,1) with variance-one Student-t innovations.

    x_t       = y_t - mean(y) = sigma_t eps_t,   eps_t ~ t_nu(0, 1)
    sigma_t^2 = alpha0 + alpha1 x_{t-1}^2 + beta1 sigma_{t-1}^2

The likelihood is maximized over an unconstrained reparameterization
(log alpha0, softmax weights for alpha1/beta1 that keep alpha1 + beta1 < 1,
log(nu - 2)) from several random starts.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, stats
from scipy.special import gammaln
from statsmodels.tools.numdiff import approx_hess3

from . import _kernels as K
from .data import ReturnSeries
from .errors import BoundaryError, DataError, NumericalError
from .sv import standardized_t

MIN_OBS = 250
PARAM_NAMES = ("alpha0", "alpha1", "beta1", "nu")
_NU_MAX = 1000.0


@dataclass(frozen=True)
class GarchParams:
    alpha0: float
    alpha1: float
    beta1: float
    nu: float

    def __post_init__(self):
        if not self.alpha0 > 0:
            raise DataError("alpha0 must be positive")
        if self.alpha1 < 0 or self.beta1 < 0:
            raise DataError("alpha1 and beta1 must be nonnegative")
        if not self.nu > 2:
            raise DataError("nu must exceed 2")

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha0, self.alpha1, self.beta1, self.nu])

    @property
    def persistence(self) -> float:
        return self.alpha1 + self.beta1

    @property
    def unconditional_variance(self) -> float:
        return self.alpha0 / (1.0 - self.persistence)


@dataclass(frozen=True)
class GarchFit:
    params: GarchParams
    std_errors: dict
    t_values: dict
    p_values: dict
    sigma2_path: np.ndarray
    loglik: float
    mean: float
    sigma2_init: float
    hessian: np.ndarray

    def to_dict(self) -> dict:
        rows = {
            name: {
                "estimate": float(getattr(self.params, name)),
                "std_error": float(self.std_errors[name]),
                "t_value": float(self.t_values[name]),
                "p_value": float(self.p_values[name]),
            }
            for name in PARAM_NAMES
        }
        return {"parameters": rows, "loglik": self.loglik, "mean": self.mean,
                "sigma2_init": self.sigma2_init, "n": int(self.sigma2_path.size)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict, sigma2_path=None) -> "GarchFit":
        rows = d["parameters"]
        params = GarchParams(*(rows[n]["estimate"] for n in PARAM_NAMES))
        pick = lambda key: {n: rows[n][key] for n in PARAM_NAMES}  # noqa: E731
        return cls(params, pick("std_error"), pick("t_value"), pick("p_value"),
                   np.asarray(sigma2_path if sigma2_path is not None else []), d["loglik"],
                   d["mean"], d["sigma2_init"], np.full((4, 4), np.nan))


def garch_filter(x, params: GarchParams, sigma2_init: float) -> np.ndarray:
    """Conditional variances ``sigma_t^2`` for demeaned data ``x``."""
    x = np.ascontiguousarray(x, dtype=float)
    return K.garch_filter(x, params.alpha0, params.alpha1, params.beta1, float(sigma2_init))


def t_logpdf_unit(x, nu):
    """Log density of the variance-one Student-t."""
    return (gammaln(0.5 * (nu + 1)) - gammaln(0.5 * nu) - 0.5 * np.log(np.pi * (nu - 2))
            - 0.5 * (nu + 1) * np.log1p(x * x / (nu - 2)))


def loglik(theta, x, sigma2_init) -> float:
    """Log-likelihood at natural parameters ``(alpha0, alpha1, beta1, nu)``."""
    a0, a1, b1, nu = theta
    if a0 <= 0 or a1 < 0 or b1 < 0 or nu <= 2:
        return -np.inf
    s2 = K.garch_filter(x, a0, a1, b1, sigma2_init)
    if np.any(s2 <= 0):
        return -np.inf
    return float(np.sum(t_logpdf_unit(x / np.sqrt(s2), nu) - 0.5 * np.log(s2)))


def _to_natural(u, scale):
    la0, a, b, lnu = u
    m = max(a, b, 0.0)
    ea, eb, e0 = math.exp(a - m), math.exp(b - m), math.exp(-m)
    tot = ea + eb + e0
    return np.array([scale * math.exp(la0), ea / tot, eb / tot, 2.0 + math.exp(lnu)])


def _to_unconstrained(theta, scale):
    a0, a1, b1, nu = theta
    rest = 1.0 - a1 - b1
    return np.array([math.log(a0 / scale), math.log(a1 / rest), math.log(b1 / rest), math.log(nu - 2.0)])


def simulate_garch(params: GarchParams, n: int, seed: int = 0, burn: int = 500) -> np.ndarray:
    """Demeaned GARCH-t sample of length ``n`` (presample discarded)."""
    rng = np.random.default_rng(seed)
    eps = standardized_t(rng, params.nu, n + burn)
    x = np.empty(n + burn)
    s2 = params.unconditional_variance if params.persistence < 1 else params.alpha0
    for t in range(n + burn):
        x[t] = math.sqrt(s2) * eps[t]
        s2 = params.alpha0 + params.alpha1 * x[t] ** 2 + params.beta1 * s2
    return x[burn:]


def fit_garch(y: ReturnSeries | np.ndarray, n_starts: int = 5, seed: int = 0) -> GarchFit:
    """Maximum likelihood fit; standard errors from the inverse numerical Hessian."""
    yv = np.asarray(y.returns if isinstance(y, ReturnSeries) else y, dtype=float)
    if yv.size < MIN_OBS:
        raise DataError(f"GARCH estimation needs at least {MIN_OBS} observations, got {yv.size}")
    mean = float(yv.mean())
    x = np.ascontiguousarray(yv - mean)
    s2_init = float(x.var())
    if s2_init <= 0:
        raise DataError("zero-variance series")
    n = x.size

    def objective(u):
        val = loglik(_to_natural(u, s2_init), x, s2_init)
        return -val / n if np.isfinite(val) else 1e10

    rng = np.random.default_rng(seed)
    bounds = [(None, None), (-30.0, 30.0), (-30.0, 30.0), (math.log(0.05), math.log(_NU_MAX))]
    best = None
    for _ in range(n_starts):
        pers = rng.uniform(0.5, 0.98)
        a1 = pers * rng.uniform(0.05, 0.35)
        start = (s2_init * (1 - pers), a1, pers - a1, rng.uniform(4.0, 20.0))
        res = optimize.minimize(objective, _to_unconstrained(start, s2_init), method="L-BFGS-B",
                                bounds=bounds, options={"ftol": 1e-15, "gtol": 1e-10, "maxiter": 2000})
        if np.isfinite(res.fun) and (best is None or res.fun < best.fun):
            best = res
    if best is None or best.fun >= 1e10:
        raise NumericalError("GARCH optimizer failed from every start")
    # polish in the interior with a derivative-free pass
    res = optimize.minimize(objective, best.x, method="Nelder-Mead",
                            options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 4000})
    if res.fun < best.fun:
        best = res

    theta = _to_natural(best.x, s2_init)
    ll = loglik(theta, x, s2_init)
    hess = approx_hess3(theta, lambda t: loglik(t, x, s2_init))
    try:
        cov = np.linalg.inv(-hess)
        se = np.sqrt(np.diag(cov))
    except np.linalg.LinAlgError:
        se = np.full(4, np.nan)
    tv = theta / se
    pv = 2.0 * stats.norm.sf(np.abs(tv))
    params = GarchParams(*theta)
    fit = GarchFit(
        params=params,
        std_errors=dict(zip(PARAM_NAMES, se)),
        t_values=dict(zip(PARAM_NAMES, tv)),
        p_values=dict(zip(PARAM_NAMES, pv)),
        sigma2_path=garch_filter(x, params, s2_init),
        loglik=ll,
        mean=mean,
        sigma2_init=s2_init,
        hessian=hess,
    )
    if params.persistence >= 1 - 1e-6:
        raise BoundaryError(f"alpha1 + beta1 = {params.persistence:.8f} on the stationarity boundary", fit)
    return fit


def filter_and_forecast(f: GarchFit, y: ReturnSeries | np.ndarray) -> tuple[np.ndarray, float]:
    """Filtered variances through the last observation and the next-day variance."""
    yv = np.asarray(y.returns if isinstance(y, ReturnSeries) else y, dtype=float)
    x = yv - f.mean
    s2 = garch_filter(x, f.params, f.sigma2_init)
    p = f.params
    nxt = p.alpha0 + p.alpha1 * x[-1] ** 2 + p.beta1 * s2[-1]
    return s2, float(nxt)


def t_quantile_unit(alpha: float, nu: float) -> float:
    """``alpha`` quantile of the variance-one Student-t."""
    return float(stats.t.ppf(alpha, nu) * math.sqrt((nu - 2.0) / nu))
