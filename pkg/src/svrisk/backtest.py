"""VaR backtests: hit sequences, binomial count test, Kupiec, Christoffersen.

Likelihood cells of the form ``0 * log 0`` are taken as 0, so every test
statistic is finite for degenerate hit sequences (no hits, all hits, no
transitions out of a state).
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy import stats
from scipy.special import xlogy

from .data import ReturnSeries
from .errors import DataError
from .var import VarSeries

MIN_J = 30
CHI2_1_05 = float(stats.chi2.ppf(0.95, 1))
CHI2_2_05 = float(stats.chi2.ppf(0.95, 2))
CHI2_1_01 = float(stats.chi2.ppf(0.99, 1))
CHI2_2_01 = float(stats.chi2.ppf(0.99, 2))


@dataclass(frozen=True)
class HitSequence:
    hits: np.ndarray
    p: float

    def __post_init__(self):
        hits = np.asarray(self.hits, dtype=np.int8)
        if hits.ndim != 1 or not np.all((hits == 0) | (hits == 1)):
            raise DataError("hits must be a 1-d binary vector")
        if not 0 < self.p < 1:
            raise DataError(f"p must lie in (0, 1), got {self.p}")
        object.__setattr__(self, "hits", hits)

    @property
    def J(self) -> int:
        return int(self.hits.size)

    @property
    def T1(self) -> int:
        return int(self.hits.sum())

    @property
    def T0(self) -> int:
        return self.J - self.T1

    @property
    def counts(self) -> tuple[int, int, int, int]:
        """Transition counts ``(n00, n01, n10, n11)`` over consecutive pairs."""
        a, b = self.hits[:-1], self.hits[1:]
        pair = 2 * a + b
        c = np.bincount(pair, minlength=4)
        return int(c[0]), int(c[1]), int(c[2]), int(c[3])


@dataclass(frozen=True)
class BinomialResult:
    z: float
    tau_low: float
    tau_high: float
    ci: tuple[int, int]
    passed: bool


@dataclass(frozen=True)
class BacktestReport:
    model_tag: str
    J: int
    p: float
    exceedance: int
    tau_low: float
    tau_high: float
    ci: tuple[int, int]
    binomial_z: float
    binomial_pass: bool
    lr_uc: float
    lr_ind: float
    lr_cc: float
    uc_reject: bool
    ind_reject: bool
    cc_reject: bool

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ci"] = list(self.ci)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "BacktestReport":
        d = dict(d)
        d["ci"] = tuple(d["ci"])
        return cls(**d)


def _check_j(h: HitSequence) -> None:
    if h.J < MIN_J:
        raise DataError(f"backtests need at least {MIN_J} observations, got {h.J}")


def align(returns: ReturnSeries, var: VarSeries) -> np.ndarray:
    """Realized returns on the VaR dates; every VaR date must be present."""
    if len(var) == 0:
        raise DataError("empty VaR series")
    idx = np.searchsorted(returns.dates, var.dates)
    ok = (idx < len(returns)) & (returns.dates[np.minimum(idx, len(returns) - 1)] == var.dates)
    if not np.all(ok):
        bad = var.dates[np.argmin(ok)]
        raise DataError(f"VaR date {bad} has no realized return ({var.model_tag})")
    return returns.returns[idx]


def hit_sequence(returns: ReturnSeries, var: VarSeries) -> HitSequence:
    """``hit_t = 1`` iff ``R_t < -VaR_t``."""
    r = align(returns, var)
    return HitSequence((r < -np.asarray(var.var_values)).astype(np.int8), 1.0 - var.alpha)


def binomial_test(h: HitSequence, beta: float = 0.05) -> BinomialResult:
    """Normal approximation to the violation count.

    ``tau = J p -/+ z_{1-beta/2} sqrt(J p (1-p))``; the integer interval
    rounds inward and the test passes when ``T1`` lies inside it.
    """
    _check_j(h)
    J, p = h.J, h.p
    sd = math.sqrt(J * p * (1.0 - p))
    zc = float(stats.norm.ppf(1.0 - beta / 2.0))
    lo, hi = J * p - zc * sd, J * p + zc * sd
    ci = (math.ceil(lo), math.floor(hi))
    return BinomialResult((h.T1 - J * p) / sd, lo, hi, ci, ci[0] <= h.T1 <= ci[1])


def _bern_ll(n0, n1, pi) -> float:
    return float(xlogy(n0, 1.0 - pi) + xlogy(n1, pi))


def kupiec_uc(h: HitSequence) -> tuple[float, bool]:
    """Proportion-of-failures LR against chi^2_1."""
    _check_j(h)
    pi_hat = h.T1 / h.J
    lr = -2.0 * (_bern_ll(h.T0, h.T1, h.p) - _bern_ll(h.T0, h.T1, pi_hat))
    lr = lr if lr > 0 else 0.0
    return lr, lr > CHI2_1_05


def christoffersen_ind(h: HitSequence) -> tuple[float, bool]:
    """First-order Markov independence LR against chi^2_1."""
    _check_j(h)
    n00, n01, n10, n11 = h.counts
    pi0 = n01 / (n00 + n01) if n00 + n01 else 0.0
    pi1 = n11 / (n10 + n11) if n10 + n11 else 0.0
    pi = (n01 + n11) / (n00 + n01 + n10 + n11)
    l_null = _bern_ll(n00 + n10, n01 + n11, pi)
    l_alt = _bern_ll(n00, n01, pi0) + _bern_ll(n10, n11, pi1)
    lr = -2.0 * (l_null - l_alt)
    lr = lr if lr > 0 else 0.0
    return lr, lr > CHI2_1_05


def conditional_cc(h: HitSequence) -> tuple[float, bool]:
    """``LR_cc = LR_uc + LR_ind`` against chi^2_2."""
    lr = kupiec_uc(h)[0] + christoffersen_ind(h)[0]
    return lr, lr > CHI2_2_05


def report_for(tag: str, h: HitSequence, beta: float = 0.05) -> BacktestReport:
    b = binomial_test(h, beta)
    uc, uc_rej = kupiec_uc(h)
    ind, ind_rej = christoffersen_ind(h)
    cc = uc + ind
    return BacktestReport(tag, h.J, h.p, h.T1, b.tau_low, b.tau_high, b.ci, b.z, b.passed,
                          uc, ind, cc, uc_rej, ind_rej, cc > CHI2_2_05)


def backtest_report(models, returns: ReturnSeries, beta: float = 0.05) -> list[BacktestReport]:
    """One report per ``(tag, VarSeries)`` pair."""
    models = list(models)
    if not models:
        raise DataError("no models to backtest")
    return [report_for(tag, hit_sequence(returns, v), beta) for tag, v in models]


# ---------------------------------------------------------------- output

COLUMNS = ("model", "exceedance", "ci_low", "ci_high", "binomial", "lr_uc", "lr_ind", "lr_cc")


def _stars(stat: float, c05: float, c01: float) -> str:
    return "**" if stat > c01 else "*" if stat > c05 else ""


def write_csv(reports, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([*COLUMNS, "binomial_z", "uc_reject", "ind_reject", "cc_reject", "J", "p"])
        for r in reports:
            w.writerow([r.model_tag, r.exceedance, r.ci[0], r.ci[1], "pass" if r.binomial_pass else "fail",
                        f"{r.lr_uc:.6f}", f"{r.lr_ind:.6f}", f"{r.lr_cc:.6f}", f"{r.binomial_z:.6f}",
                        int(r.uc_reject), int(r.ind_reject), int(r.cc_reject), r.J, r.p])


def write_json(reports, path) -> None:
    Path(path).write_text(json.dumps([r.to_dict() for r in reports], indent=2) + "\n")


def load_json(path) -> list[BacktestReport]:
    try:
        return [BacktestReport.from_dict(d) for d in json.loads(Path(path).read_text())]
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: malformed backtest report ({exc})") from exc


def format_table(reports) -> str:
    """Plain-text table; ``*`` rejects at 5%, ``**`` at 1%."""
    lines = [f"{'Model':<12} {'Exceed':>6} {'CI':>10} {'Binom':>6} {'LR_uc':>10} {'LR_ind':>10} {'LR_cc':>10}"]
    for r in reports:
        uc = f"{r.lr_uc:.3f}{_stars(r.lr_uc, CHI2_1_05, CHI2_1_01)}"
        ind = f"{r.lr_ind:.3f}{_stars(r.lr_ind, CHI2_1_05, CHI2_1_01)}"
        cc = f"{r.lr_cc:.3f}{_stars(r.lr_cc, CHI2_2_05, CHI2_2_01)}"
        ci = f"[{r.ci[0]},{r.ci[1]}]"
        lines.append(f"{r.model_tag:<12} {r.exceedance:>6} {ci:>10} {'pass' if r.binomial_pass else 'fail':>6} "
                     f"{uc:>10} {ind:>10} {cc:>10}")
    lines.append("* reject at 5%, ** reject at 1% (LR_uc, LR_ind: chi2(1); LR_cc: chi2(2))")
    return "\n".join(lines)
