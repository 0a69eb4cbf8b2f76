# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops for the SV sampler and the GARCH recursion.

Signatures and results mirror :mod:`svrisk._kernels._pykernels` exactly.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, log1p, lgamma, M_PI

cnp.import_array()


cdef inline double _obs_logc(double nu) noexcept nogil:
    if nu > 0.0:
        return lgamma(0.5 * (nu + 1.0)) - lgamma(0.5 * nu) - 0.5 * log(M_PI * (nu - 2.0))
    return -0.5 * log(2.0 * M_PI)


cdef inline double _obs(double r, double h, double nu, double logc) noexcept nogil:
    cdef double e2 = r * r * exp(-h)
    if nu > 0.0:
        return logc - 0.5 * (nu + 1.0) * log1p(e2 / (nu - 2.0)) - 0.5 * h
    return logc - 0.5 * e2 - 0.5 * h


cdef inline double _site(Py_ssize_t t, double x, double[::1] h, const double[::1] r,
                         Py_ssize_t n, double mu, double phi, double lev, double s2,
                         double v0, double nu, double logc) noexcept nogil:
    cdef double m, d
    cdef double lp = _obs(r[t], x, nu, logc)
    if t == 0:
        d = x - mu
        lp -= 0.5 * d * d / v0
    else:
        m = mu + phi * (h[t - 1] - mu) + lev * r[t - 1] * exp(-0.5 * h[t - 1])
        d = x - m
        lp -= 0.5 * d * d / s2
    if t < n - 1:
        m = mu + phi * (x - mu) + lev * r[t] * exp(-0.5 * x)
        d = h[t + 1] - m
        lp -= 0.5 * d * d / s2
    return lp


def h_sweep(double[::1] h, const double[::1] r, double mu, double phi, double sigma,
            double rho, double nu, double step, const double[:, ::1] z,
            const double[:, ::1] logu):
    cdef Py_ssize_t n = h.shape[0]
    cdef Py_ssize_t k = z.shape[0]
    cdef Py_ssize_t t, parity, s
    cdef double s2 = sigma * sigma * (1.0 - rho * rho)
    cdef double v0 = sigma * sigma / (1.0 - phi * phi)
    cdef double lev = sigma * rho
    cdef double logc = _obs_logc(nu)
    cdef double cur, prop
    cdef long accepted = 0
    with nogil:
        for s in range(k):
            for parity in range(2):
                t = parity
                while t < n:
                    prop = h[t] + step * z[s, t]
                    cur = _site(t, h[t], h, r, n, mu, phi, lev, s2, v0, nu, logc)
                    if logu[s, t] < _site(t, prop, h, r, n, mu, phi, lev, s2, v0, nu, logc) - cur:
                        h[t] = prop
                        accepted += 1
                    t += 2
    return accepted


def sv_logjoint(const double[::1] h, const double[::1] r, double mu, double phi,
                double sigma, double rho, double nu):
    cdef Py_ssize_t n = h.shape[0]
    cdef Py_ssize_t t
    cdef double s2 = sigma * sigma * (1.0 - rho * rho)
    cdef double v0 = sigma * sigma / (1.0 - phi * phi)
    cdef double lev = sigma * rho
    cdef double logc = _obs_logc(nu)
    cdef double d, m
    cdef double total
    with nogil:
        d = h[0] - mu
        total = -0.5 * log(2.0 * M_PI * v0) - 0.5 * d * d / v0
        for t in range(n):
            total += _obs(r[t], h[t], nu, logc)
        for t in range(n - 1):
            m = mu + phi * (h[t] - mu) + lev * r[t] * exp(-0.5 * h[t])
            d = h[t + 1] - m
            total -= 0.5 * d * d / s2
        total -= 0.5 * (n - 1) * log(2.0 * M_PI * s2)
    return total


def garch_filter(const double[::1] x, double a0, double a1, double b1, double s2_init):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t t
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] s2 = out
    if n == 0:
        return out
    with nogil:
        s2[0] = s2_init
        for t in range(1, n):
            s2[t] = a0 + a1 * x[t - 1] * x[t - 1] + b1 * s2[t - 1]
    return out
