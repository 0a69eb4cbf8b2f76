"""Bayesian estimation of the SV variants by MCMC.

One iteration of the cyclic sampler updates, in order,

1. ``phi``             random-walk MH on ``atanh(phi)``
2. ``(sigma, rho)``    joint random-walk MH on ``(log sigma^2, atanh rho)``
3. ``mu``              Gibbs draw from its Gaussian full conditional
4. ``beta``            Gibbs (Gaussian errors) or random-walk MH (t errors)
5. ``nu``              random-walk MH on ``log(nu - 2)``
6. ``h``               ``h_sweeps`` passes of single-site random-walk MH,
                       even then odd sites
7. ``(sigma, h)``      joint rescaling of sigma and h - mu (MH with Jacobian)
8. ``(mu, h)``         joint shift of mu and h (MH)

Steps 7-8 move the parameters together with the latent path, which the
single-site sweep alone cannot do; without them sigma mixes very slowly.

Proposal scales adapt during burn-in and are frozen afterwards.
"""
from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels as K
from .data import ReturnSeries
from .errors import DataError, NumericalError
from .sv import SvParams, SvVariant, default_regressors

log = logging.getLogger(__name__)

MIN_OBS = 100

_TARGET_1D = 0.44
_TARGET_2D = 0.35


@dataclass(frozen=True)
class PriorSpec:
    """Hyperparameters; ``fixed`` pins named parameters (point-mass prior)."""

    mu_mean: float = 0.0
    mu_var: float = 100.0
    phi_a: float = 5.0
    phi_b: float = 1.5
    sigma2_shape: float = 0.5
    sigma2_rate: float = 0.5
    nu_rate: float = 0.1
    rho_a: float = 4.0
    rho_b: float = 4.0
    beta_mean: float = 0.0
    beta_var: float = 10000.0
    fixed: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("mu_var", "phi_a", "phi_b", "sigma2_shape", "sigma2_rate", "nu_rate",
                     "rho_a", "rho_b", "beta_var"):
            if not getattr(self, name) > 0:
                raise DataError(f"prior hyperparameter {name} must be positive")
        unknown = set(self.fixed) - {"mu", "phi", "sigma", "nu", "rho", "beta"}
        if unknown:
            raise DataError(f"cannot fix unknown parameters {sorted(unknown)}")

    # log densities up to additive constants, on the natural scale
    def log_phi(self, phi):
        return (self.phi_a - 1) * math.log((1 + phi) / 2) + (self.phi_b - 1) * math.log((1 - phi) / 2)

    def log_sigma2(self, s2):
        return (self.sigma2_shape - 1) * math.log(s2) - self.sigma2_rate * s2

    def log_rho(self, rho):
        return (self.rho_a - 1) * math.log((1 + rho) / 2) + (self.rho_b - 1) * math.log((1 - rho) / 2)

    def log_nu(self, nu):
        return -self.nu_rate * nu

    def log_beta(self, beta):
        return -0.5 * float(np.sum((beta - self.beta_mean) ** 2)) / self.beta_var


@dataclass(frozen=True)
class McmcConfig:
    draws: int = 20000
    burn_in: int = 2000
    thin: int = 1
    seed: int = 0
    h_keep: int = 500
    adapt_every: int = 50
    h_sweeps: int = 10

    def __post_init__(self):
        if (self.draws < 1 or self.burn_in < 0 or self.thin < 1 or self.h_keep < 1
                or self.h_sweeps < 1):
            raise DataError(f"invalid MCMC configuration {self}")


@dataclass(frozen=True)
class ChainDiagnostic:
    geweke_z: float
    ess: float
    passed: bool | None = None


@dataclass(frozen=True)
class SvPosterior:
    variant: SvVariant
    names: tuple
    draws: np.ndarray
    h_quantiles: np.ndarray
    h_mean: np.ndarray
    vol_mean: np.ndarray
    mu_hat: np.ndarray
    acceptance: dict
    diagnostics: dict
    fixed: tuple = ()
    dates: np.ndarray | None = None

    def column(self, name: str) -> np.ndarray:
        return self.draws[:, self.names.index(name)]

    @property
    def n_obs(self) -> int:
        return self.h_mean.size

    def mean_params(self) -> SvParams:
        m = dict(zip(self.names, self.draws.mean(axis=0)))
        beta = [m[n] for n in self.names if n.startswith("beta")]
        return SvParams(
            mu=m["mu"], phi=m["phi"], sigma=m["sigma"],
            nu=m.get("nu") if self.variant.has_t else None,
            rho=m.get("rho") if self.variant.has_leverage else None,
            beta=beta,
        )


# ---------------------------------------------------------------- diagnostics

def _autocorr(x: np.ndarray) -> np.ndarray:
    n = x.size
    d = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(d, size)
    ac = np.fft.irfft(f * np.conj(f), size)[:n]
    return ac / ac[0]


def effective_sample_size(x) -> float:
    """Geyer's initial monotone sequence estimator."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 4 or np.ptp(x) == 0:
        return float(n)
    rho = _autocorr(x)
    pairs = rho[: 2 * (n // 2)].reshape(-1, 2).sum(axis=1)
    pos = np.flatnonzero(pairs <= 0)
    m = pos[0] if pos.size else pairs.size
    gamma = np.minimum.accumulate(pairs[:m])
    tau = -1.0 + 2.0 * gamma.sum()
    return float(n / max(tau, 1.0 / math.log10(n)))


def geweke_z(x, first: float = 0.1, last: float = 0.5) -> float:
    x = np.asarray(x, dtype=float)
    n = x.size
    a = x[: int(first * n)]
    b = x[n - int(last * n):]
    va = a.var() / effective_sample_size(a)
    vb = b.var() / effective_sample_size(b)
    diff = a.mean() - b.mean()
    if va + vb == 0:
        return 0.0 if diff == 0 else math.copysign(math.inf, diff)
    return float(diff / math.sqrt(va + vb))


# ---------------------------------------------------------------- sampler

def _ewma_logvar(r: np.ndarray, lam: float = 0.94) -> np.ndarray:
    v = np.empty_like(r)
    acc = float(np.var(r)) or 1.0
    for t, x in enumerate(r):
        acc = lam * acc + (1 - lam) * x * x
        v[t] = acc
    return np.log(np.maximum(v, 1e-6 * (np.var(r) or 1.0)))


class _Adaptive:
    """Log-scale step tuned toward a target acceptance rate during burn-in."""

    def __init__(self, step: float, target: float):
        self.log_step = math.log(step)
        self.target = target
        self.tries = self.accepts = 0
        self.total_tries = self.total_accepts = 0
        self.rounds = 0

    @property
    def step(self) -> float:
        return math.exp(self.log_step)

    def record(self, accepted: bool | int, tries: int = 1):
        self.tries += tries
        self.accepts += int(accepted)

    def adapt(self):
        if self.tries:
            self.rounds += 1
            rate = self.accepts / self.tries
            self.log_step += (rate - self.target) * 3.0 / math.sqrt(self.rounds)
        self.tries = self.accepts = 0

    def freeze(self):
        self.tries = self.accepts = 0

    def collect(self):
        self.total_tries += self.tries
        self.total_accepts += self.accepts
        self.tries = self.accepts = 0

    @property
    def rate(self) -> float:
        return self.total_accepts / self.total_tries if self.total_tries else float("nan")


class _Sampler:
    def __init__(self, y, x, variant: SvVariant, prior: PriorSpec, cfg: McmcConfig):
        self.y = y
        self.x = x
        self.v = variant
        self.prior = prior
        self.cfg = cfg
        self.rng = np.random.default_rng(cfg.seed)
        self.fixed = dict(prior.fixed)
        if not variant.has_t:
            self.fixed.pop("nu", None)
        if not variant.has_leverage:
            self.fixed.pop("rho", None)

        k = x.shape[1]
        xtx = x.T @ x + np.eye(k) / prior.beta_var
        beta = np.linalg.solve(xtx, x.T @ y + prior.beta_mean / prior.beta_var)
        self.beta = np.asarray(self.fixed.get("beta", beta), dtype=float).reshape(k)
        self.r = y - x @ self.beta
        self.h = _ewma_logvar(self.r)
        self.mu = float(self.fixed.get("mu", self.h.mean()))
        self.phi = float(self.fixed.get("phi", 0.9))
        self.sigma = float(self.fixed.get("sigma", 0.3))
        self.rho = float(self.fixed.get("rho", -0.3 if variant.has_leverage else 0.0))
        self.nu = float(self.fixed.get("nu", 20.0)) if variant.has_t else 0.0
        if not variant.has_leverage:
            self.rho = 0.0

        self.steps = {
            "phi": _Adaptive(0.1, _TARGET_1D),
            "sigma_rho": _Adaptive(1.0, _TARGET_2D if variant.has_leverage else _TARGET_1D),
            "beta": _Adaptive(1.0, _TARGET_1D),
            "nu": _Adaptive(0.3, _TARGET_1D),
            "h": _Adaptive(0.5, _TARGET_1D),
            "rescale": _Adaptive(0.05, _TARGET_1D),
            "shift": _Adaptive(0.05, _TARGET_1D),
        }
        self.lj = self._logjoint()
        if not np.isfinite(self.lj):
            raise NumericalError("non-finite log posterior at initialisation")

        self.names = ["mu", "phi", "sigma"]
        if variant.has_t:
            self.names.append("nu")
        if variant.has_leverage:
            self.names.append("rho")
        self.names += ["beta"] if k == 1 else [f"beta_{j}" for j in range(k)]

    def _logjoint(self, h=None, r=None, mu=None, phi=None, sigma=None, rho=None, nu=None) -> float:
        return K.sv_logjoint(
            self.h if h is None else h,
            self.r if r is None else r,
            self.mu if mu is None else mu,
            self.phi if phi is None else phi,
            self.sigma if sigma is None else sigma,
            self.rho if rho is None else rho,
            self.nu if nu is None else nu,
        )

    def _mh(self, log_ratio: float) -> bool:
        return bool(math.log(self.rng.random()) < log_ratio) if np.isfinite(log_ratio) else False

    # individual updates -------------------------------------------------

    def update_phi(self):
        if "phi" in self.fixed:
            return
        ad = self.steps["phi"]
        z = math.atanh(self.phi) + ad.step * self.rng.standard_normal()
        phi = math.tanh(z)
        if not abs(phi) < 1:
            ad.record(False)
            return
        lj = self._logjoint(phi=phi)
        ratio = (lj + self.prior.log_phi(phi) + math.log1p(-phi * phi)
                 - self.lj - self.prior.log_phi(self.phi) - math.log1p(-self.phi ** 2))
        ok = self._mh(ratio)
        if ok:
            self.phi, self.lj = phi, lj
        ad.record(ok)

    def update_sigma_rho(self):
        move_sigma = "sigma" not in self.fixed
        move_rho = self.v.has_leverage and "rho" not in self.fixed
        if not (move_sigma or move_rho):
            return
        ad = self.steps["sigma_rho"]
        sigma, rho = self.sigma, self.rho
        ratio = 0.0
        if move_sigma:
            w0 = 2.0 * math.log(self.sigma)
            w = w0 + 0.15 * ad.step * self.rng.standard_normal()
            sigma = math.exp(0.5 * w)
            ratio += (self.prior.log_sigma2(sigma ** 2) + w) - (self.prior.log_sigma2(self.sigma ** 2) + w0)
        if move_rho:
            rho = math.tanh(math.atanh(self.rho) + 0.08 * ad.step * self.rng.standard_normal())
            if not abs(rho) < 1:
                ad.record(False)
                return
            ratio += (self.prior.log_rho(rho) + math.log1p(-rho * rho)
                      - self.prior.log_rho(self.rho) - math.log1p(-self.rho ** 2))
        lj = self._logjoint(sigma=sigma, rho=rho)
        ok = self._mh(lj - self.lj + ratio)
        if ok:
            self.sigma, self.rho, self.lj = sigma, rho, lj
        ad.record(ok)

    def update_mu(self):
        if "mu" in self.fixed:
            return
        p = self.prior
        phi, sigma, rho = self.phi, self.sigma, self.rho
        h = self.h
        s2 = sigma * sigma * (1 - rho * rho)
        eps = self.r[:-1] * np.exp(-0.5 * h[:-1])
        a = h[1:] - phi * h[:-1] - sigma * rho * eps
        n1 = a.size
        prec0 = (1 - phi * phi) / (sigma * sigma)
        prec = 1.0 / p.mu_var + prec0 + n1 * (1 - phi) ** 2 / s2
        mean = (p.mu_mean / p.mu_var + prec0 * h[0] + (1 - phi) * a.sum() / s2) / prec
        self.mu = float(mean + self.rng.standard_normal() / math.sqrt(prec))
        self.lj = self._logjoint()

    def _beta_gaussian_conditional(self):
        """Precision and mean of beta's full conditional under Gaussian errors."""
        h, x, y = self.h, self.x, self.y
        w = np.exp(-h)
        resp = y.copy()
        if self.v.has_leverage:
            eta = (h[1:] - self.mu - self.phi * (h[:-1] - self.mu)) / self.sigma
            resp[:-1] = y[:-1] - np.exp(0.5 * h[:-1]) * self.rho * eta
            w = w.copy()
            w[:-1] /= 1 - self.rho ** 2
        k = x.shape[1]
        prec = (x * w[:, None]).T @ x + np.eye(k) / self.prior.beta_var
        rhs = (x * w[:, None]).T @ resp + self.prior.beta_mean / self.prior.beta_var
        return prec, np.linalg.solve(prec, rhs)

    def update_beta(self):
        if "beta" in self.fixed:
            return
        prec, mean = self._beta_gaussian_conditional()
        chol = np.linalg.cholesky(np.linalg.inv(prec))
        if not self.v.has_t:
            self.beta = mean + chol @ self.rng.standard_normal(mean.size)
            self.r = self.y - self.x @ self.beta
            self.lj = self._logjoint()
            return
        ad = self.steps["beta"]
        beta = self.beta + ad.step * (chol @ self.rng.standard_normal(mean.size))
        r = self.y - self.x @ beta
        lj = self._logjoint(r=r)
        ok = self._mh(lj + self.prior.log_beta(beta) - self.lj - self.prior.log_beta(self.beta))
        if ok:
            self.beta, self.r, self.lj = beta, r, lj
        ad.record(ok)

    def update_nu(self):
        if not self.v.has_t or "nu" in self.fixed:
            return
        ad = self.steps["nu"]
        w0 = math.log(self.nu - 2.0)
        w = w0 + ad.step * self.rng.standard_normal()
        nu = 2.0 + math.exp(w)
        if not np.isfinite(nu) or nu > 1e8:
            ad.record(False)
            return
        lj = self._logjoint(nu=nu)
        ok = self._mh(lj + self.prior.log_nu(nu) + w - self.lj - self.prior.log_nu(self.nu) - w0)
        if ok:
            self.nu, self.lj = nu, lj
        ad.record(ok)

    def update_h(self):
        ad = self.steps["h"]
        shape = (self.cfg.h_sweeps, self.h.size)
        z = self.rng.standard_normal(shape)
        logu = np.log(self.rng.random(shape))
        acc = K.h_sweep(self.h, self.r, self.mu, self.phi, self.sigma, self.rho, self.nu,
                        ad.step, z, logu)
        ad.record(acc, z.size)
        self.lj = self._logjoint()

    def update_rescale(self):
        if "sigma" in self.fixed:
            return
        ad = self.steps["rescale"]
        delta = ad.step * self.rng.standard_normal()
        c = math.exp(delta)
        sigma = self.sigma * c
        h = self.mu + c * (self.h - self.mu)
        lj = self._logjoint(h=h, sigma=sigma)
        w0, w = 2.0 * math.log(self.sigma), 2.0 * math.log(sigma)
        ratio = (lj - self.lj + self.h.size * delta
                 + self.prior.log_sigma2(sigma ** 2) + w - self.prior.log_sigma2(self.sigma ** 2) - w0)
        ok = self._mh(ratio)
        if ok:
            self.sigma, self.h, self.lj = sigma, h, lj
        ad.record(ok)

    def update_shift(self):
        if "mu" in self.fixed:
            return
        ad = self.steps["shift"]
        delta = ad.step * self.rng.standard_normal()
        mu = self.mu + delta
        h = self.h + delta
        lj = self._logjoint(h=h, mu=mu)
        p = self.prior
        ratio = lj - self.lj - 0.5 * ((mu - p.mu_mean) ** 2 - (self.mu - p.mu_mean) ** 2) / p.mu_var
        ok = self._mh(ratio)
        if ok:
            self.mu, self.h, self.lj = mu, h, lj
        ad.record(ok)

    def iterate(self):
        self.update_phi()
        self.update_sigma_rho()
        self.update_mu()
        self.update_beta()
        self.update_nu()
        self.update_h()
        self.update_rescale()
        self.update_shift()
        if not np.isfinite(self.lj):
            raise NumericalError("chain diverged: non-finite log posterior")

    def state_row(self) -> list:
        row = [self.mu, self.phi, self.sigma]
        if self.v.has_t:
            row.append(self.nu)
        if self.v.has_leverage:
            row.append(self.rho)
        return row + list(self.beta)

    def run(self) -> tuple:
        cfg = self.cfg
        for it in range(cfg.burn_in):
            self.iterate()
            if (it + 1) % cfg.adapt_every == 0:
                for ad in self.steps.values():
                    ad.adapt()
        for ad in self.steps.values():
            ad.freeze()
        log.debug("burn-in done; steps %s", {k: round(a.step, 4) for k, a in self.steps.items()})

        n = self.h.size
        draws = np.empty((cfg.draws, len(self.names)))
        keep_every = max(1, cfg.draws // cfg.h_keep)
        kept = []
        sum_h = np.zeros(n)
        sum_vol = np.zeros(n)
        for i in range(cfg.draws):
            for _ in range(cfg.thin):
                self.iterate()
            draws[i] = self.state_row()
            sum_h += self.h
            sum_vol += np.exp(0.5 * self.h)
            if i % keep_every == 0:
                kept.append(self.h.copy())
            if (i + 1) % cfg.adapt_every == 0:
                for ad in self.steps.values():
                    ad.collect()
        for ad in self.steps.values():
            ad.collect()
        hq = np.quantile(np.array(kept), [0.05, 0.5, 0.95], axis=0).T
        acceptance = {k: ad.rate for k, ad in self.steps.items()}
        return draws, hq, sum_h / cfg.draws, sum_vol / cfg.draws, acceptance


def fit_sv(y: ReturnSeries | np.ndarray, v: SvVariant | str, prior: PriorSpec | None = None,
           cfg: McmcConfig | None = None, x: np.ndarray | None = None) -> SvPosterior:
    """Run the sampler and return retained draws with latent-path summaries."""
    v = SvVariant(v)
    prior = prior or PriorSpec()
    cfg = cfg or McmcConfig()
    dates = y.dates if isinstance(y, ReturnSeries) else None
    yv = np.ascontiguousarray(y.returns if isinstance(y, ReturnSeries) else y, dtype=float)
    n = yv.size
    if n < MIN_OBS:
        raise DataError(f"SV estimation needs at least {MIN_OBS} observations, got {n}")
    if not np.all(np.isfinite(yv)):
        raise DataError("returns must be finite")
    x = default_regressors(n) if x is None else np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] != n:
        raise DataError(f"regressors must have {n} rows")

    sampler = _Sampler(yv, np.ascontiguousarray(x), v, prior, cfg)
    draws, hq, h_mean, vol_mean, acceptance = sampler.run()
    beta_mean = draws[:, [i for i, nm in enumerate(sampler.names) if nm.startswith("beta")]].mean(axis=0)
    fixed = tuple(nm for nm in sampler.names if nm in sampler.fixed or
                  (nm.startswith("beta") and "beta" in sampler.fixed))
    diagnostics = {}
    for j, nm in enumerate(sampler.names):
        col = draws[:, j]
        diagnostics[nm] = ChainDiagnostic(geweke_z(col) if col.size >= 20 else float("nan"),
                                          effective_sample_size(col))
    return SvPosterior(
        variant=v, names=tuple(sampler.names), draws=draws, h_quantiles=hq, h_mean=h_mean,
        vol_mean=vol_mean, mu_hat=x @ beta_mean, acceptance=acceptance, diagnostics=diagnostics,
        fixed=fixed, dates=dates,
    )


# ---------------------------------------------------------------- summaries

def _summarize(col: np.ndarray) -> dict:
    if np.ptp(col) == 0:  # exact for a point mass
        v = float(col[0])
        return {"mean": v, "sd": 0.0, "ci_low": v, "ci_high": v}
    lo, hi = np.quantile(col, [0.025, 0.975])
    return {"mean": float(col.mean()), "sd": float(col.std(ddof=1)), "ci_low": float(lo), "ci_high": float(hi)}


def posterior_summary(p: SvPosterior) -> dict:
    """Mean, sd and equal-tailed 95% interval per parameter, plus
    ``exp(mu/2)`` and ``sigma2`` transformed draw by draw."""
    if p.draws.shape[0] < 100:
        raise DataError(f"posterior summary needs at least 100 draws, got {p.draws.shape[0]}")
    out = {nm: _summarize(p.draws[:, j]) for j, nm in enumerate(p.names)}
    out["exp(mu/2)"] = _summarize(np.exp(p.column("mu") / 2.0))
    out["sigma2"] = _summarize(p.column("sigma") ** 2)
    return out


def convergence_check(p: SvPosterior, z_threshold: float = 1.96) -> dict:
    """Geweke test (first 10% vs last 50%) per free parameter."""
    if p.draws.shape[0] < 200:
        raise DataError(f"convergence check needs at least 200 draws, got {p.draws.shape[0]}")
    out = {}
    for j, nm in enumerate(p.names):
        if nm in p.fixed:
            continue
        col = p.draws[:, j]
        z = geweke_z(col)
        out[nm] = ChainDiagnostic(z, effective_sample_size(col), bool(abs(z) < z_threshold))
    return out


def export_chain(p: SvPosterior, directory) -> list[Path]:
    """Write ``trace_<param>.csv`` (iter,value), ``h_band.csv`` (t,q05,q50,q95)
    and ``posterior_summary.json``."""
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create {directory}: {exc}") from exc
    paths = []
    for j, nm in enumerate(p.names):
        path = directory / f"trace_{nm}.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iter", "value"])
            for i, v in enumerate(p.draws[:, j]):
                w.writerow([i, repr(float(v))])
        paths.append(path)
    path = directory / "h_band.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "q05", "q50", "q95"])
        for t, row in enumerate(p.h_quantiles):
            w.writerow([t] + [repr(float(v)) for v in row])
    paths.append(path)
    path = directory / "posterior_summary.json"
    path.write_text(json.dumps(posterior_summary(p), indent=2, sort_keys=True))
    paths.append(path)
    return paths


def load_trace(path) -> np.ndarray:
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    return np.array([float(r["value"]) for r in rows])


def save_posterior(p: SvPosterior, path) -> Path:
    """Store everything needed to rebuild the posterior in one ``.npz``."""
    path = Path(path)
    meta = {
        "variant": p.variant.value, "names": list(p.names), "fixed": list(p.fixed),
        "acceptance": p.acceptance,
        "diagnostics": {k: [d.geweke_z, d.ess, d.passed] for k, d in p.diagnostics.items()},
    }
    arrays = dict(draws=p.draws, h_quantiles=p.h_quantiles, h_mean=p.h_mean, vol_mean=p.vol_mean,
                  mu_hat=p.mu_hat, meta=np.array(json.dumps(meta, sort_keys=True)))
    if p.dates is not None:
        arrays["dates"] = p.dates.astype("datetime64[D]").astype(np.int64)
    with path.open("wb") as fh:
        np.savez(fh, **arrays)
    return path


def load_posterior(path) -> SvPosterior:
    try:
        with np.load(Path(path)) as z:
            meta = json.loads(str(z["meta"]))
            dates = z["dates"].astype("datetime64[D]") if "dates" in z else None
            return SvPosterior(
                variant=SvVariant(meta["variant"]), names=tuple(meta["names"]), draws=z["draws"],
                h_quantiles=z["h_quantiles"], h_mean=z["h_mean"], vol_mean=z["vol_mean"],
                mu_hat=z["mu_hat"], acceptance=meta["acceptance"],
                diagnostics={k: ChainDiagnostic(*v) for k, v in meta["diagnostics"].items()},
                fixed=tuple(meta["fixed"]), dates=dates,
            )
    except (OSError, KeyError, ValueError) as exc:
        raise DataError(f"{path}: cannot read posterior ({exc})") from exc
