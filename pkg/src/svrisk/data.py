"""Price/return series, CSV ingestion and summary diagnostics."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from statsmodels.stats.diagnostic import acorr_ljungbox
from statsmodels.tsa.stattools import adfuller

from .errors import DataError

DEFAULT_TRAIN_END = "2016-12-30"
DEFAULT_TEST_START = "2017-01-03"
DEFAULT_TEST_SIZE = 1000


def _as_dates(dates) -> np.ndarray:
    try:
        out = np.asarray(dates, dtype="datetime64[D]")
    except (TypeError, ValueError) as exc:
        raise DataError(f"unparseable dates: {exc}") from exc
    return out


def _check_dates(dates: np.ndarray) -> None:
    if dates.size > 1 and not np.all(dates[1:] > dates[:-1]):
        bad = int(np.argmax(~(dates[1:] > dates[:-1]))) + 1
        raise DataError(f"dates not strictly increasing at position {bad} ({dates[bad]})")


@dataclass(frozen=True)
class PriceSeries:
    dates: np.ndarray
    prices: np.ndarray

    def __post_init__(self):
        dates = _as_dates(self.dates)
        prices = np.asarray(self.prices, dtype=float)
        if dates.shape != prices.shape or prices.ndim != 1:
            raise DataError("dates and prices must be 1-d and of equal length")
        if prices.size < 2:
            raise DataError("a price series needs at least 2 observations")
        _check_dates(dates)
        if not np.all(np.isfinite(prices)) or np.any(prices <= 0):
            bad = int(np.argmax(~(np.isfinite(prices) & (prices > 0))))
            raise DataError(f"non-positive or non-finite price at position {bad}")
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "prices", prices)

    def __len__(self):
        return self.prices.size


@dataclass(frozen=True)
class ReturnSeries:
    """Daily percent log returns with their dates and a provenance label."""

    dates: np.ndarray
    returns: np.ndarray
    label: str = ""

    def __post_init__(self):
        dates = _as_dates(self.dates)
        returns = np.asarray(self.returns, dtype=float)
        if dates.shape != returns.shape or returns.ndim != 1:
            raise DataError("dates and returns must be 1-d and of equal length")
        if returns.size < 1:
            raise DataError("a return series needs at least 1 observation")
        _check_dates(dates)
        if not np.all(np.isfinite(returns)):
            raise DataError(f"non-finite return at position {int(np.argmax(~np.isfinite(returns)))}")
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "returns", returns)

    def __len__(self):
        return self.returns.size

    def slice(self, start: int | None = None, stop: int | None = None, label: str | None = None) -> "ReturnSeries":
        return ReturnSeries(self.dates[start:stop], self.returns[start:stop],
                            self.label if label is None else label)

    def concat(self, other: "ReturnSeries", label: str = "") -> "ReturnSeries":
        return ReturnSeries(np.concatenate([self.dates, other.dates]),
                            np.concatenate([self.returns, other.returns]), label)


@dataclass(frozen=True)
class SummaryStats:
    n: int
    mean: float
    sd: float
    skewness: float
    excess_kurtosis: float
    jarque_bera: float
    ljung_box_q5: float
    adf_stat: float
    acf: tuple

    def to_json(self) -> str:
        d = asdict(self)
        d["acf"] = list(self.acf)
        return json.dumps(d, indent=2)


def load_csv(path, schema: str | None = None) -> PriceSeries | ReturnSeries:
    """Read a ``date,price`` or ``date,return`` CSV.

    ``schema`` is ``"price"``, ``"return"`` or None to detect it from the
    header. Errors name the offending (1-based, header = row 1) row.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [c.strip().lower() for c in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if schema is None:
            schema = "price" if "price" in header else "return" if "return" in header else None
        if schema not in ("price", "return") or "date" not in header or schema not in header:
            raise DataError(f"{path}: header must contain 'date' and 'price' or 'return', got {header}")
        i_date, i_val = header.index("date"), header.index(schema)

        dates, values = [], []
        for rowno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                d = np.datetime64(row[i_date].strip(), "D")
                v = float(row[i_val])
            except (IndexError, ValueError) as exc:
                raise DataError(f"{path}: row {rowno}: cannot parse {row!r} ({exc})") from None
            if not math.isfinite(v):
                raise DataError(f"{path}: row {rowno}: non-finite value")
            if schema == "price" and v <= 0:
                raise DataError(f"{path}: row {rowno}: non-positive price {v}")
            if dates and d <= dates[-1]:
                raise DataError(f"{path}: row {rowno}: date {d} not after previous date {dates[-1]}")
            dates.append(d)
            values.append(v)

    if schema == "price":
        return PriceSeries(np.array(dates), np.array(values))
    return ReturnSeries(np.array(dates), np.array(values), label=path.stem)


def load_returns(path) -> ReturnSeries:
    """Load either CSV schema and return percent log returns."""
    s = load_csv(path)
    return log_returns(s) if isinstance(s, PriceSeries) else s


def write_returns_csv(r: ReturnSeries, path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["date", "return"])
        for d, v in zip(r.dates, r.returns):
            w.writerow([str(d), repr(float(v))])


def log_returns(p: PriceSeries) -> ReturnSeries:
    """``100 * ln(p_t / p_{t-1})``, dated at ``t``."""
    if len(p) < 2:
        raise DataError("need at least 2 prices")
    return ReturnSeries(p.dates[1:], 100.0 * np.diff(np.log(p.prices)), label="returns")


def split_train_test(r: ReturnSeries, train_end=DEFAULT_TRAIN_END, test_start=DEFAULT_TEST_START,
                     test_size: int | None = DEFAULT_TEST_SIZE) -> tuple[ReturnSeries, ReturnSeries]:
    """Split by date. Training data runs through ``train_end`` inclusive; the
    test window starts at ``test_start`` and holds at most ``test_size`` points.

    With ``train_end=None`` the split is positional: the last ``test_size``
    observations are the test set.
    """
    if train_end is None:
        if test_size is None or not 0 < test_size < len(r):
            raise DataError(f"positional split needs 0 < test_size < {len(r)}")
        return r.slice(None, -test_size, "train"), r.slice(len(r) - test_size, None, "test")
    train_mask = r.dates <= np.datetime64(train_end, "D")
    test_idx = np.flatnonzero(r.dates >= np.datetime64(test_start or train_end, "D"))
    if test_start is None:
        test_idx = test_idx[r.dates[test_idx] > np.datetime64(train_end, "D")]
    if test_size is not None:
        test_idx = test_idx[:test_size]
    if not train_mask.any() or test_idx.size == 0:
        raise DataError(f"split at {train_end}/{test_start} leaves an empty train or test set")
    train = ReturnSeries(r.dates[train_mask], r.returns[train_mask], "train")
    test = ReturnSeries(r.dates[test_idx], r.returns[test_idx], "test")
    return train, test


def business_dates(n_before: int, n_after: int, last_before=DEFAULT_TRAIN_END,
                   first_after=DEFAULT_TEST_START) -> np.ndarray:
    """``n_before`` weekdays ending at ``last_before`` followed by ``n_after``
    weekdays starting at ``first_after``. Used to date simulated series so
    that the default split applies to them unchanged."""
    last = np.datetime64(last_before, "D")
    first = np.datetime64(first_after, "D")
    before = np.busday_offset(last, -np.arange(n_before - 1, -1, -1), roll="backward")
    after = np.busday_offset(first, np.arange(n_after), roll="forward")
    return np.concatenate([before, after]).astype("datetime64[D]")


def acf(x, nlags: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    d = x - x.mean()
    denom = d @ d
    return np.array([d[:-k] @ d[k:] / denom for k in range(1, nlags + 1)])


def default_adf_lags(n: int) -> int:
    return int(math.floor(12.0 * (n / 100.0) ** 0.25))


def summary_stats(r: ReturnSeries | np.ndarray, lb_lags: int = 5, adf_lags: int | None = None) -> SummaryStats:
    x = np.asarray(r.returns if isinstance(r, ReturnSeries) else r, dtype=float)
    n = x.size
    if n < 20:
        raise DataError(f"summary statistics need at least 20 observations, got {n}")
    d = x - x.mean()
    m2 = np.mean(d ** 2)
    if m2 <= 0 or not np.isfinite(m2):
        raise DataError("zero variance: skewness and kurtosis undefined")
    skew = np.mean(d ** 3) / m2 ** 1.5
    kurt = np.mean(d ** 4) / m2 ** 2 - 3.0
    jb = n / 6.0 * (skew ** 2 + kurt ** 2 / 4.0)
    lb = acorr_ljungbox(x, lags=[lb_lags])
    if adf_lags is None:
        adf_lags = default_adf_lags(n)
    adf = adfuller(x, maxlag=adf_lags, regression="c", autolag=None)[0]
    return SummaryStats(
        n=n,
        mean=float(x.mean()),
        sd=float(x.std(ddof=1)),
        skewness=float(skew),
        excess_kurtosis=float(kurt),
        jarque_bera=float(jb),
        ljung_box_q5=float(lb["lb_stat"].iloc[0]),
        adf_stat=float(adf),
        acf=tuple(float(v) for v in acf(x, 3)),
    )
