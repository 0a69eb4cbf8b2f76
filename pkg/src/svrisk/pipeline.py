"""Fit, forecast and backtest stages shared by the CLI and the tests.

Each stage reads and writes plain files under one output directory:

    fit/<model>/posterior.npz, trace_*.csv, h_band.csv, posterior_summary.json
    fit/garch/garch_fit.json
    var/var_<tag>.csv, gpd_<model>.json, mean_excess_<model>.csv, qq_<model>.csv
    backtest/report.csv, report.json, report.txt
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from . import backtest as bt
from . import evt
from . import var as ve
from .data import ReturnSeries
from .errors import BoundaryError, DataError
from .garch import GarchFit, fit_garch, garch_filter
from .mcmc import McmcConfig, export_chain, fit_sv, load_posterior, save_posterior
from .sv import SvVariant

SV_MODELS = ("sv", "svt", "svl", "svtl")
ALL_MODELS = SV_MODELS + ("garch", "empirical")
VAR_TAGS = {"sv": ("SV-EVT",), "svt": ("SVt-EVT",), "svl": ("SVl-EVT",), "svtl": ("SVtl-EVT",),
            "garch": ("GARCH-EVT", "GARCH"), "empirical": ("Empirical",)}


@dataclass(frozen=True)
class RunConfig:
    models: tuple = ("svt", "svl", "svtl", "garch", "empirical")
    alpha: float = 0.95
    draws: int = 20000
    burn_in: int = 2000
    seed: int = 0
    threshold: str | float = "auto"
    particles: int = ve.DEFAULT_PARTICLES
    window: int = ve.DEFAULT_WINDOW
    h_sweeps: int = 10
    out: Path = field(default_factory=lambda: Path("svrisk_out"))

    def __post_init__(self):
        models = tuple(dict.fromkeys(self.models))
        if not models:
            raise DataError("select at least one model")
        unknown = [m for m in models if m not in ALL_MODELS]
        if unknown:
            raise DataError(f"unknown model(s) {unknown}; choose from {ALL_MODELS}")
        if not 0.5 < self.alpha < 1:
            raise DataError(f"alpha must lie in (0.5, 1), got {self.alpha}")
        if self.threshold != "auto":
            try:
                object.__setattr__(self, "threshold", float(self.threshold))
            except (TypeError, ValueError) as exc:
                raise DataError(f"threshold must be 'auto' or a number, got {self.threshold!r}") from exc
        object.__setattr__(self, "models", models)
        object.__setattr__(self, "out", Path(self.out))

    def mcmc(self) -> McmcConfig:
        return McmcConfig(draws=self.draws, burn_in=self.burn_in, seed=self.seed, h_sweeps=self.h_sweeps)


def auto_threshold_level(alpha: float) -> float:
    """Quantile level for the default threshold: ``1 - 2 (1 - alpha)``,
    capped at 0.95 and floored at 0.5, so that ``F(u) < alpha``."""
    return float(min(0.95, max(0.5, 1.0 - 2.0 * (1.0 - alpha))))


def _mkdir(p: Path) -> Path:
    try:
        p.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create {p}: {exc}") from exc
    return p


# ---------------------------------------------------------------- fit

def _fit_garch(train: ReturnSeries, seed: int) -> GarchFit:
    """GARCH fit that keeps a boundary solution and flags it with a warning.

    On series with little volatility clustering the likelihood is flat along
    ``alpha1 = 0`` and the optimum can sit at ``alpha1 + beta1 = 1``; the
    variance path is then nearly constant and still usable for forecasting.
    """
    try:
        return fit_garch(train, seed=seed)
    except BoundaryError as exc:
        warnings.warn(f"GARCH fit on the stationarity boundary: {exc}", RuntimeWarning, stacklevel=2)
        return exc.fit


def _garch_doc(f: GarchFit) -> str:
    doc = f.to_dict()
    doc["boundary"] = bool(f.params.persistence >= 1 - 1e-6)
    return json.dumps(doc, indent=2) + "\n"


def fit_models(train: ReturnSeries, cfg: RunConfig) -> dict:
    """Fit every selected model and write its artifacts; returns them by model."""
    out = {}
    for m in cfg.models:
        if m in SV_MODELS:
            post = fit_sv(train, SvVariant(m), cfg=cfg.mcmc())
            d = _mkdir(cfg.out / "fit" / m)
            export_chain(post, d)
            save_posterior(post, d / "posterior.npz")
            out[m] = post
        elif m == "garch":
            f = _fit_garch(train, cfg.seed)
            d = _mkdir(cfg.out / "fit" / "garch")
            (d / "garch_fit.json").write_text(_garch_doc(f))
            out[m] = f
    return out


def load_fits(cfg: RunConfig, train: ReturnSeries) -> dict:
    out = {}
    for m in cfg.models:
        if m in SV_MODELS:
            path = cfg.out / "fit" / m / "posterior.npz"
            if not path.exists():
                raise DataError(f"missing fit artifact {path}; run 'fit' first")
            out[m] = load_posterior(path)
        elif m == "garch":
            path = cfg.out / "fit" / "garch" / "garch_fit.json"
            if not path.exists():
                raise DataError(f"missing fit artifact {path}; run 'fit' first")
            doc = json.loads(path.read_text())
            f = GarchFit.from_dict(doc)
            out[m] = GarchFit.from_dict(doc, sigma2_path=garch_filter(train.returns - f.mean, f.params,
                                                                      f.sigma2_init))
    return out


# ---------------------------------------------------------------- VaR

@dataclass(frozen=True)
class TailFit:
    model: str
    residuals: ve.ResidualSeries
    tail: evt.GpdTailModel
    gof: evt.GofResult


def fit_tail(model: str, res: ve.ResidualSeries, threshold, alpha: float) -> TailFit:
    """GPD on the negated residuals above the configured threshold."""
    losses = evt.loss_tail(res.z)
    if threshold == "auto":
        u = evt.select_threshold(losses, q=auto_threshold_level(alpha))
    else:
        u = evt.select_threshold(losses, u=float(threshold))
    tail = evt.fit_gpd(losses, u)
    return TailFit(model, res, tail, evt.goodness_of_fit(tail, losses))


def compute_var(train: ReturnSeries, test: ReturnSeries, fits: dict, cfg: RunConfig,
                write: bool = True) -> tuple[dict, dict]:
    """VaR series by tag and tail fits by model."""
    series, tails = {}, {}
    vdir = _mkdir(cfg.out / "var") if write else None
    for m in cfg.models:
        if m == "empirical":
            series["Empirical"] = ve.empirical_var(train, test, cfg.alpha, cfg.window)
            continue
        f = fits[m]
        if m in SV_MODELS:
            res = ve.sv_residuals(f, train)
            fore = ve.sv_forecast(f, train, test, cfg.particles, seed=cfg.seed)
        else:
            res = ve.garch_residuals(f, train)
            fore = ve.garch_forecast(f, train, test)
        tf = tails[m] = fit_tail(m, res, cfg.threshold, cfg.alpha)
        tail, gof = tf.tail, tf.gof
        tag = VAR_TAGS[m][0]
        series[tag] = ve.dynamic_var(fore, tail, cfg.alpha, tag)
        if m == "garch":
            series["GARCH"] = ve.garch_t_var(fore, f.params.nu, cfg.alpha)
        if write:
            doc = {"model": m, **tail.to_dict(), "gof": gof.__dict__}
            (vdir / f"gpd_{m}.json").write_text(json.dumps(doc, indent=2) + "\n")
            evt.mean_excess_curve(evt.loss_tail(res.z)).to_csv(vdir / f"mean_excess_{m}.csv")
            ve.write_qq_csv(vdir / f"qq_{m}.csv", train.returns, res.z)
    if write:
        for tag, s in series.items():
            s.to_csv(vdir / f"var_{tag}.csv")
    return series, tails


def load_var_dir(directory) -> dict:
    directory = Path(directory)
    files = sorted(directory.glob("var_*.csv")) if directory.is_dir() else []
    if not files:
        raise DataError(f"no VaR files (var_*.csv) in {directory}; run 'var' first")
    out = {}
    for p in files:
        s = ve.VarSeries.from_csv(p)
        out[s.model_tag] = s
    return out


# ---------------------------------------------------------------- backtest

TAG_ORDER = ("SV-EVT", "SVt-EVT", "SVl-EVT", "SVtl-EVT", "GARCH-EVT", "GARCH", "Empirical")


def run_backtest(test: ReturnSeries, series: dict, out: Path | None = None) -> list:
    tags = sorted(series, key=lambda t: (TAG_ORDER.index(t) if t in TAG_ORDER else len(TAG_ORDER), t))
    reports = bt.backtest_report([(t, series[t]) for t in tags], test)
    if out is not None:
        d = _mkdir(Path(out) / "backtest")
        bt.write_csv(reports, d / "report.csv")
        bt.write_json(reports, d / "report.json")
        (d / "report.txt").write_text(bt.format_table(reports) + "\n")
    return reports


def run_all(train: ReturnSeries, test: ReturnSeries, cfg: RunConfig, write: bool = True):
    """Fit, forecast and backtest in one call."""
    if write:
        _mkdir(cfg.out)
    fits = fit_models(train, cfg) if write else _fit_in_memory(train, cfg)
    series, tails = compute_var(train, test, fits, cfg, write=write)
    reports = run_backtest(test, series, cfg.out if write else None)
    return fits, series, tails, reports


def _fit_in_memory(train: ReturnSeries, cfg: RunConfig) -> dict:
    out = {}
    for m in cfg.models:
        if m in SV_MODELS:
            out[m] = fit_sv(train, SvVariant(m), cfg=cfg.mcmc())
        elif m == "garch":
            out[m] = _fit_garch(train, cfg.seed)
    return out

