"""Pure numpy versions of the compiled kernels.

Same signatures and same update order as ``_ckernels`` (per sweep: even
sites, then odd sites; ``z`` and ``logu`` hold one row per sweep), so both
backends consume identical random inputs and agree to floating-point
rounding.
"""
from __future__ import annotations

import numpy as np
from scipy.signal import lfilter
from scipy.special import gammaln

_LOG2PI = np.log(2.0 * np.pi)


def _obs_logc(nu: float) -> float:
    if nu > 0.0:
        return float(gammaln(0.5 * (nu + 1.0)) - gammaln(0.5 * nu) - 0.5 * np.log(np.pi * (nu - 2.0)))
    return -0.5 * _LOG2PI


def _obs(r, h, nu, logc):
    e2 = r * r * np.exp(-h)
    if nu > 0.0:
        return logc - 0.5 * (nu + 1.0) * np.log1p(e2 / (nu - 2.0)) - 0.5 * h
    return logc - 0.5 * e2 - 0.5 * h


def _site(idx, x, h, r, mu, phi, lev, s2, v0, nu, logc):
    n = h.shape[0]
    lp = _obs(r[idx], x, nu, logc)

    first = idx == 0
    prev = np.where(first, 0, idx - 1)
    m_prev = mu + phi * (h[prev] - mu) + lev * r[prev] * np.exp(-0.5 * h[prev])
    lp = lp - np.where(first, 0.5 * (x - mu) ** 2 / v0, 0.5 * (x - m_prev) ** 2 / s2)

    has_next = idx < n - 1
    nxt = np.where(has_next, idx + 1, idx)
    m_next = mu + phi * (x - mu) + lev * r[idx] * np.exp(-0.5 * x)
    lp = lp - np.where(has_next, 0.5 * (h[nxt] - m_next) ** 2 / s2, 0.0)
    return lp


def h_sweep(h, r, mu, phi, sigma, rho, nu, step, z, logu):
    n = h.shape[0]
    s2 = sigma * sigma * (1.0 - rho * rho)
    v0 = sigma * sigma / (1.0 - phi * phi)
    lev = sigma * rho
    logc = _obs_logc(nu)
    accepted = 0
    halves = (np.arange(0, n, 2), np.arange(1, n, 2))
    for zs, lu in zip(z, logu):
        for idx in halves:
            cur = h[idx]
            prop = cur + step * zs[idx]
            delta = (_site(idx, prop, h, r, mu, phi, lev, s2, v0, nu, logc)
                     - _site(idx, cur, h, r, mu, phi, lev, s2, v0, nu, logc))
            ok = lu[idx] < delta
            h[idx[ok]] = prop[ok]
            accepted += int(ok.sum())
    return accepted


def sv_logjoint(h, r, mu, phi, sigma, rho, nu):
    n = h.shape[0]
    s2 = sigma * sigma * (1.0 - rho * rho)
    v0 = sigma * sigma / (1.0 - phi * phi)
    lev = sigma * rho
    logc = _obs_logc(nu)
    total = -0.5 * np.log(2.0 * np.pi * v0) - 0.5 * (h[0] - mu) ** 2 / v0
    total += _obs(r, h, nu, logc).sum()
    m = mu + phi * (h[:-1] - mu) + lev * r[:-1] * np.exp(-0.5 * h[:-1])
    total -= 0.5 * ((h[1:] - m) ** 2).sum() / s2
    total -= 0.5 * (n - 1) * np.log(2.0 * np.pi * s2)
    return float(total)


def garch_filter(x, a0, a1, b1, s2_init):
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    if n == 0:
        return np.empty(0)
    drive = np.empty(n)
    drive[0] = s2_init
    drive[1:] = a0 + a1 * x[:-1] ** 2
    # s2[t] = drive[t] + b1 * s2[t-1], with s2[0] = s2_init
    return lfilter([1.0], [1.0, -b1], drive)
