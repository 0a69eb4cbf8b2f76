"""Stochastic-volatility model variants and path simulation.

All four variants share

    y_t     = x_t beta + exp(h_t / 2) eps_t
    h_{t+1} = mu + phi (h_t - mu) + sigma eta_t

and differ in the law of ``eps`` (standard normal or variance-one Student-t)
and in whether ``eta_t`` is correlated with ``eps_t``. Leverage enters as
``eta_t = rho eps_t + sqrt(1 - rho^2) xi_t`` with ``xi_t`` standard normal and
independent of ``eps_t``: for Gaussian ``eps`` this is the bivariate normal
with correlation ``rho``, and for Student-t ``eps`` it keeps
``corr(eps, eta) = rho`` and ``var(eta) = 1`` while giving the transition a
closed-form conditional law ``eta | eps ~ N(rho eps, 1 - rho^2)``.
"""
from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import DEFAULT_TEST_SIZE, ReturnSeries, business_dates
from .errors import DataError


class SvVariant(str, enum.Enum):
    VANILLA = "sv"
    T = "svt"
    LEVERAGE = "svl"
    T_LEVERAGE = "svtl"

    @property
    def has_t(self) -> bool:
        return self in (SvVariant.T, SvVariant.T_LEVERAGE)

    @property
    def has_leverage(self) -> bool:
        return self in (SvVariant.LEVERAGE, SvVariant.T_LEVERAGE)

    @property
    def tag(self) -> str:
        return {"sv": "SV", "svt": "SVt", "svl": "SVl", "svtl": "SVtl"}[self.value]


@dataclass(frozen=True)
class SvParams:
    mu: float
    phi: float
    sigma: float
    nu: float | None = None
    rho: float | None = None
    beta: tuple = (0.0,)

    def __post_init__(self):
        object.__setattr__(self, "beta", tuple(float(b) for b in np.atleast_1d(self.beta)))
        if not abs(self.phi) < 1:
            raise DataError(f"phi must lie in (-1, 1), got {self.phi}")
        if not self.sigma > 0:
            raise DataError(f"sigma must be positive, got {self.sigma}")
        if self.nu is not None and not self.nu > 2:
            raise DataError(f"nu must exceed 2, got {self.nu}")
        if self.rho is not None and not abs(self.rho) < 1:
            raise DataError(f"rho must lie in (-1, 1), got {self.rho}")

    @property
    def variant(self) -> SvVariant:
        if self.nu is None:
            return SvVariant.VANILLA if self.rho is None else SvVariant.LEVERAGE
        return SvVariant.T if self.rho is None else SvVariant.T_LEVERAGE

    def check_variant(self, v: SvVariant) -> None:
        if v.has_t and self.nu is None:
            raise DataError(f"{v.tag} needs nu")
        if v.has_leverage and self.rho is None:
            raise DataError(f"{v.tag} needs rho")

    def to_dict(self) -> dict:
        return {"mu": self.mu, "phi": self.phi, "sigma": self.sigma, "nu": self.nu,
                "rho": self.rho, "beta": list(self.beta)}


@dataclass(frozen=True)
class SvPath:
    h: np.ndarray
    y: np.ndarray
    seed: int
    eps: np.ndarray = field(repr=False, default=None)
    eta: np.ndarray = field(repr=False, default=None)

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "h", "y"])
            for t, (h, y) in enumerate(zip(self.h, self.y)):
                w.writerow([t, repr(float(h)), repr(float(y))])


def standardized_t(rng: np.random.Generator, nu: float, size) -> np.ndarray:
    """Student-t draws rescaled to unit variance."""
    return rng.standard_t(nu, size=size) * np.sqrt((nu - 2.0) / nu)


def default_regressors(n: int) -> np.ndarray:
    return np.ones((n, 1))


def simulate(v: SvVariant | str, p: SvParams, n: int, x: np.ndarray | None = None, seed: int = 0) -> SvPath:
    v = SvVariant(v)
    p.check_variant(v)
    if n < 1:
        raise DataError("n must be at least 1")
    x = default_regressors(n) if x is None else np.asarray(x, dtype=float)
    beta = np.asarray(p.beta)
    if x.shape != (n, beta.size):
        raise DataError(f"regressors must have shape ({n}, {beta.size}), got {x.shape}")

    rng = np.random.default_rng(seed)
    eps = standardized_t(rng, p.nu, n) if v.has_t else rng.standard_normal(n)
    xi = rng.standard_normal(n)
    rho = p.rho if v.has_leverage else 0.0
    eta = rho * eps + np.sqrt(1.0 - rho * rho) * xi

    h = np.empty(n)
    h[0] = p.mu + p.sigma / np.sqrt(1.0 - p.phi ** 2) * rng.standard_normal()
    for t in range(n - 1):
        h[t + 1] = p.mu + p.phi * (h[t] - p.mu) + p.sigma * eta[t]
    y = x @ beta + np.exp(h / 2.0) * eps
    return SvPath(h=h, y=y, seed=seed, eps=eps, eta=eta)


def simulate_iid_returns(n: int, dist: str = "t", nu: float = 15.0, seed: int = 0,
                         n_test: int = DEFAULT_TEST_SIZE, scale: float = 1.0) -> ReturnSeries:
    """iid unit-variance returns (``dist`` is ``"t"`` or ``"normal"``) times
    ``scale``, on weekday dates.

    The last ``min(n_test, n)`` points are dated from the default test start
    onward, the rest end at the default training end, so the default
    train/test split reproduces the intended window sizes.
    """
    if n < 1:
        raise DataError("n must be at least 1")
    rng = np.random.default_rng(seed)
    if dist == "t":
        if not nu > 2:
            raise DataError(f"nu must exceed 2, got {nu}")
        r, label = standardized_t(rng, nu, n), f"t{nu:g}-seed{seed}"
    elif dist == "normal":
        r, label = rng.standard_normal(n), f"normal-seed{seed}"
    else:
        raise DataError(f"unknown distribution {dist!r}")
    n_after = min(n_test, n)
    return ReturnSeries(business_dates(n - n_after, n_after), scale * r, label=label)


def simulate_student_t_returns(n: int, nu: float, seed: int = 0, n_test: int = DEFAULT_TEST_SIZE,
                               scale: float = 1.0) -> ReturnSeries:
    """iid variance-one Student-t returns; see :func:`simulate_iid_returns`."""
    return simulate_iid_returns(n, "t", nu, seed, n_test, scale)
