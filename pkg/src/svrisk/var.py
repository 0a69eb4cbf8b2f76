"""Standardized residuals, one-day-ahead forecasts and VaR series.

VaR values are positive loss magnitudes: day ``t`` is a violation when
``R_t < -VaR_t``. For a location-scale forecast ``(mu, sigma)`` and a loss
quantile ``q`` of the standardized residuals, ``VaR = sigma * q - mu``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats
from scipy.special import gammaln

from . import evt
from .data import ReturnSeries
from .errors import DataError, NumericalError
from .garch import GarchFit, garch_filter, t_quantile_unit
from .mcmc import SvPosterior

DEFAULT_WINDOW = 252
DEFAULT_PARTICLES = 2000
_DEGENERATE_FRACTION = 0.01
_DEGENERATE_RUN = 10


@dataclass(frozen=True)
class ResidualSeries:
    dates: np.ndarray
    x: np.ndarray
    z: np.ndarray
    mu_hat: np.ndarray
    sigma_hat: np.ndarray


@dataclass(frozen=True)
class Forecast:
    """One-step-ahead location and scale for each test date."""

    dates: np.ndarray
    mu_fore: np.ndarray
    sigma_fore: np.ndarray
    model_tag: str = ""
    filtered_vol: np.ndarray | None = None  # E[exp(h_t/2) | y_1..t] over the history, SV only


@dataclass(frozen=True)
class VarSeries:
    dates: np.ndarray
    alpha: float
    var_values: np.ndarray
    mu_fore: np.ndarray
    sigma_fore: np.ndarray
    model_tag: str

    def __post_init__(self):
        n = len(self.dates)
        for name in ("var_values", "mu_fore", "sigma_fore"):
            if len(getattr(self, name)) != n:
                raise DataError(f"{name} length differs from the dates")
        if np.any(np.asarray(self.sigma_fore) <= 0):
            raise DataError("sigma_fore must be positive")
        if not 0 < self.alpha < 1:
            raise DataError(f"alpha must lie in (0, 1), got {self.alpha}")

    def __len__(self):
        return len(self.dates)

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["date", "alpha", "var", "mu_fore", "sigma_fore", "model"])
            for row in zip(self.dates, self.var_values, self.mu_fore, self.sigma_fore):
                w.writerow([str(row[0]), repr(self.alpha), *(repr(float(v)) for v in row[1:]), self.model_tag])

    @classmethod
    def from_csv(cls, path) -> "VarSeries":
        with Path(path).open(newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows:
            raise DataError(f"{path}: empty VaR file")
        try:
            col = lambda k: np.array([float(r[k]) for r in rows])  # noqa: E731
            return cls(np.array([r["date"] for r in rows], dtype="datetime64[D]"), float(rows[0]["alpha"]),
                       col("var"), col("mu_fore"), col("sigma_fore"), rows[0]["model"])
        except (KeyError, ValueError) as exc:
            raise DataError(f"{path}: malformed VaR file ({exc})") from exc


# ---------------------------------------------------------------- residuals

def standardize(y: ReturnSeries, mu_hat, sigma_hat) -> ResidualSeries:
    """``z_t = (y_t - mu_t) / sigma_t``."""
    x = y.returns
    mu = np.broadcast_to(np.asarray(mu_hat, dtype=float), x.shape).copy()
    sd = np.broadcast_to(np.asarray(sigma_hat, dtype=float), x.shape).copy()
    if np.any(~(sd > 0)):
        raise DataError("sigma_hat must be strictly positive")
    return ResidualSeries(y.dates, x, (x - mu) / sd, mu, sd)


def sv_residuals(post: SvPosterior, y: ReturnSeries) -> ResidualSeries:
    """Residuals with the posterior mean of ``x_t beta`` and of ``exp(h_t/2)``."""
    if post.n_obs != len(y):
        raise DataError("posterior and return series lengths differ")
    return standardize(y, post.mu_hat, post.vol_mean)


def garch_residuals(fit: GarchFit, y: ReturnSeries) -> ResidualSeries:
    return standardize(y, fit.mean, np.sqrt(fit.sigma2_path))


# ---------------------------------------------------------------- SV forecasting

def _systematic_resample(w: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    n = w.size
    pos = (rng.random() + np.arange(n)) / n
    idx = np.searchsorted(np.cumsum(w), pos)
    return np.minimum(idx, n - 1)


def sv_forecast(post: SvPosterior, history: ReturnSeries, test: ReturnSeries,
                n_particles: int = DEFAULT_PARTICLES, seed: int = 0) -> Forecast:
    """Bootstrap particle filter at the posterior-mean parameters.

    The filter runs over ``history`` followed by ``test``. Before each test
    day the predictive particles give ``sigma_fore = E[exp(h/2)]``; the day's
    return then reweights them. With leverage the transition uses the
    particle's own standardized shock, ``h' ~ N(mu + phi (h - mu) +
    sigma rho eps, sigma^2 (1 - rho^2))``. Particles are resampled
    (systematic) after every update, which stops negligible-weight particles
    from drifting away through the leverage term. An effective sample size
    below 1% of the particles for 10 consecutive days is an error.
    """
    if n_particles < 1000:
        raise DataError("use at least 1000 particles")
    if len(test) < 1:
        raise DataError("empty test series")
    if history.dates[-1] >= test.dates[0]:
        raise DataError("test series must start after the history ends")
    p = post.mean_params()
    v = post.variant
    if p.sigma <= 0 or abs(p.phi) >= 1:
        raise NumericalError("posterior mean parameters are not stationary")
    beta = np.asarray(p.beta)
    mu_x = float(beta[0]) if beta.size == 1 else float(np.mean(post.mu_hat))
    y = np.concatenate([history.returns, test.returns])
    n_hist = len(history)
    rho = p.rho if v.has_leverage else 0.0
    nu = p.nu if v.has_t else 0.0
    sd_trans = p.sigma * math.sqrt(1.0 - rho * rho)
    if nu > 0:
        logc = gammaln(0.5 * (nu + 1)) - gammaln(0.5 * nu) - 0.5 * math.log(math.pi * (nu - 2))
    rng = np.random.default_rng(seed)

    h = p.mu + p.sigma / math.sqrt(1.0 - p.phi ** 2) * rng.standard_normal(n_particles)
    sigma_fore = np.empty(len(test))
    filtered = np.empty(n_hist)
    low_run = 0
    for t in range(y.size):
        if t >= n_hist:
            sigma_fore[t - n_hist] = float(np.mean(np.exp(0.5 * h)))
        r = y[t] - mu_x
        eps = r * np.exp(-0.5 * h)
        if nu > 0:
            logw = logc - 0.5 * (nu + 1) * np.log1p(eps * eps / (nu - 2)) - 0.5 * h
        else:
            logw = -0.5 * eps * eps - 0.5 * h
        top = logw.max()
        if not np.isfinite(top):
            raise NumericalError(f"particle weights collapsed at step {t}")
        w = np.exp(logw - top)
        w /= w.sum()
        if t < n_hist:
            filtered[t] = float(w @ np.exp(0.5 * h))
        ess = 1.0 / float(w @ w)
        low_run = low_run + 1 if ess < _DEGENERATE_FRACTION * n_particles else 0
        if low_run >= _DEGENERATE_RUN:
            raise NumericalError(f"particle filter degenerate for {low_run} consecutive steps (t={t})")
        idx = _systematic_resample(w, rng)
        h, eps = h[idx], eps[idx]
        h = (p.mu + p.phi * (h - p.mu) + p.sigma * rho * eps
             + sd_trans * rng.standard_normal(n_particles))
    return Forecast(test.dates, np.full(len(test), mu_x), sigma_fore, v.tag, filtered)


# ---------------------------------------------------------------- GARCH forecasting

def garch_forecast(fit: GarchFit, history: ReturnSeries, test: ReturnSeries) -> Forecast:
    """One-step variances with fixed fitted parameters.

    Running the recursion once over history + test is the same as calling
    :func:`svrisk.garch.filter_and_forecast` on each expanding prefix.
    """
    if len(test) < 1:
        raise DataError("empty test series")
    x = np.concatenate([history.returns, test.returns]) - fit.mean
    s2 = garch_filter(x, fit.params, fit.sigma2_init)
    return Forecast(test.dates, np.full(len(test), fit.mean), np.sqrt(s2[len(history):]), "GARCH")


# ---------------------------------------------------------------- VaR

def var_from_quantile(fore: Forecast, q: float, alpha: float, model_tag: str | None = None) -> VarSeries:
    """``VaR_t = sigma_t q - mu_t`` for a loss quantile ``q`` of the residuals."""
    mu = np.asarray(fore.mu_fore, dtype=float)
    sd = np.asarray(fore.sigma_fore, dtype=float)
    return VarSeries(fore.dates, float(alpha), sd * q - mu, mu, sd,
                     fore.model_tag if model_tag is None else model_tag)


def dynamic_var(fore: Forecast, tail: evt.GpdTailModel, alpha: float, model_tag: str | None = None) -> VarSeries:
    """EVT VaR; ``tail`` is a GPD fitted to the negated residuals."""
    return var_from_quantile(fore, evt.tail_quantile(tail, alpha), alpha, model_tag)


def garch_t_var(fore: Forecast, nu: float, alpha: float, model_tag: str = "GARCH") -> VarSeries:
    """VaR from the fitted variance-one Student-t quantile."""
    return var_from_quantile(fore, t_quantile_unit(alpha, nu), alpha, model_tag)


def order_statistic_index(n: int, alpha: float) -> int:
    """0-based index of ``l_(ceil(n alpha))`` in the sorted losses."""
    k = math.ceil(n * alpha - 1e-9)
    return min(max(k, 1), n) - 1


def empirical_var(history: ReturnSeries, test: ReturnSeries, alpha: float,
                  window: int = DEFAULT_WINDOW, model_tag: str = "Empirical") -> VarSeries:
    """Rolling order-statistic VaR: ``l_(ceil(n alpha))`` of the previous
    ``window`` losses ``l = -R``."""
    if window < 1:
        raise DataError("window must be positive")
    if len(history) < window:
        raise DataError(f"need {window} days of history, have {len(history)}")
    if len(test) < 1:
        raise DataError("empty test series")
    losses = -np.concatenate([history.returns[-window:], test.returns[:-1]])
    windows = np.lib.stride_tricks.sliding_window_view(losses, window)
    k = order_statistic_index(window, alpha)
    var = np.partition(windows, k, axis=1)[:, k]
    n = len(test)
    return VarSeries(test.dates, float(alpha), var, np.zeros(n), np.ones(n), model_tag)


# ---------------------------------------------------------------- Q-Q data

def qq_points(z) -> tuple[np.ndarray, np.ndarray]:
    """Normal Q-Q coordinates of the sample standardized to mean 0, sd 1."""
    z = np.asarray(z, dtype=float)
    s = np.sort((z - z.mean()) / z.std(ddof=1))
    theo = stats.norm.ppf((np.arange(1, z.size + 1) - 0.5) / z.size)
    return theo, s


def qq_deviation(z) -> float:
    """Sum of squared distances of the Q-Q points from the 45 degree line."""
    theo, s = qq_points(z)
    return float(np.sum((s - theo) ** 2))


def write_qq_csv(path, raw, standardized) -> None:
    t_raw, s_raw = qq_points(raw)
    t_std, s_std = qq_points(standardized)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["series", "theoretical", "sample"])
        for name, t, s in (("raw", t_raw, s_raw), ("standardized", t_std, s_std)):
            for a, b in zip(t, s):
                w.writerow([name, repr(float(a)), repr(float(b))])
