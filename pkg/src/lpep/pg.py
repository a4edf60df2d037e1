"""Exact Polya-Gamma PG(1, c) draws and reproducible random streams.

Devroye's alternating-series method for the Jacobi distribution, tilted by
``c``: propose from a mixture of a truncated exponential (right of ``t``) and
a truncated inverse Gaussian (left of ``t``), then evaluate the series until
its partial sums bracket the uniform. The per-draw loop is compiled with
numba; it consumes the caller's numpy Generator, so streams stay
reproducible.
"""

from __future__ import annotations

import math

import numba
import numpy as np

TRUNC = 0.64
MAX_ROUNDS = 1000  # proposals per draw before giving up (never hit in practice)
MAX_TERMS = 1000

_PI = math.pi
_PI2_8 = _PI * _PI / 8.0
_LOG_HALF_PI = math.log(0.5 * _PI)


def make_rng(seed, stream=0):
    """Counter-based generator keyed by ``(seed, stream)``.

    Identical keys give identical sequences; distinct streams are independent.
    """
    if seed < 0 or stream < 0:
        raise ValueError("seed and stream must be non-negative")
    key = np.array([int(seed) & 0xFFFFFFFFFFFFFFFF, int(stream)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def pg1_mean(c):
    """E[PG(1, c)] = tanh(c/2) / (2c), with the limit 1/4 at zero."""
    c = np.abs(np.asarray(c, dtype=float))
    small = c < 1e-4
    cs = np.where(small, 1.0, c)
    out = np.where(small, 0.25 - c**2 / 48.0, np.tanh(cs / 2.0) / (2.0 * cs))
    return out if out.ndim else float(out)


def pg1_var(c):
    """Var[PG(1, c)]; 1/24 at zero."""
    c = np.abs(np.asarray(c, dtype=float))
    small = c < 1e-3
    cs = np.where(small, 1.0, c)
    big = (np.sinh(cs) - cs) / (4.0 * cs**3 * np.cosh(cs / 2.0) ** 2)
    out = np.where(small, 1.0 / 24.0 - c**2 / 240.0, big)
    return out if out.ndim else float(out)


@numba.njit(cache=True)
def _log_ndtr(x):
    # log Phi(x) via erfc, with an asymptotic series far in the lower tail
    if x > -20.0:
        return math.log(0.5 * math.erfc(-x / math.sqrt(2.0)))
    x2 = x * x
    return (
        -0.5 * x2 - math.log(-x) - 0.5 * math.log(2.0 * _PI)
        + math.log1p(-1.0 / x2 + 3.0 / (x2 * x2))
    )


@numba.njit(cache=True)
def _mass_texpon(z):
    # probability of the exponential (right) piece of the proposal mixture
    t = TRUNC
    fz = _PI2_8 + 0.5 * z * z
    b = math.sqrt(1.0 / t) * (t * z - 1.0)
    a = -math.sqrt(1.0 / t) * (t * z + 1.0)
    x0 = math.log(fz) + fz * t
    xb = x0 - z + _log_ndtr(b)
    xa = x0 + z + _log_ndtr(a)
    qdivp = 4.0 / _PI * (math.exp(xb) + math.exp(xa))
    return 1.0 / (1.0 + qdivp)


@numba.njit(cache=True)
def _rtigauss(z, rng):
    # inverse Gaussian with mean 1/z and shape 1, truncated to (0, t]
    t = TRUNC
    x = t + 1.0
    if z < 1.0 / t:
        # mean beyond t: scaled inverse chi-square proposal, tilted by exp(-z^2 x/2)
        while True:
            e1 = rng.standard_exponential()
            e2 = rng.standard_exponential()
            while e1 * e1 > 2.0 * e2 / t:
                e1 = rng.standard_exponential()
                e2 = rng.standard_exponential()
            x = 1.0 + e1 * t
            x = t / (x * x)
            if rng.random() <= math.exp(-0.5 * z * z * x):
                return x
    mu = 1.0 / z
    while x > t:
        y = rng.standard_normal()
        y *= y
        mu_y = mu * y
        x = mu + 0.5 * mu * mu_y - 0.5 * mu * math.sqrt(4.0 * mu_y + mu_y * mu_y)
        if rng.random() > mu / (mu + x):
            x = mu * mu / x
    return x


@numba.njit(cache=True)
def _series_term(n, x):
    # n-th coefficient of the alternating series for the Jacobi density
    k = (n + 0.5) * _PI
    if x > TRUNC:
        return k * math.exp(-0.5 * k * k * x)
    if x <= 0.0:
        return 0.0
    return math.exp(
        -1.5 * (_LOG_HALF_PI + math.log(x)) + math.log(k) - 2.0 * (n + 0.5) ** 2 / x
    )


@numba.njit(cache=True)
def _draw_one(z, rng):
    # returns (draw, proposals used); draw < 0 signals the cap was reached
    fz = _PI2_8 + 0.5 * z * z
    p_exp = _mass_texpon(z)
    for rounds in range(1, MAX_ROUNDS + 1):
        if rng.random() < p_exp:
            x = TRUNC + rng.standard_exponential() / fz
        else:
            x = _rtigauss(z, rng)
        s = _series_term(0, x)
        u = rng.random() * s
        for n in range(1, MAX_TERMS):
            if n % 2 == 1:
                s -= _series_term(n, x)
                if u <= s:
                    return 0.25 * x, rounds
            else:
                s += _series_term(n, x)
                if u > s:
                    break
    return -1.0, MAX_ROUNDS


@numba.njit(cache=True)
def _draw_many(z, rng, out):
    worst = 0
    for i in range(z.size):
        v, r = _draw_one(z[i], rng)
        out[i] = v
        if r > worst:
            worst = r
    return worst


def sample_pg1(c, rng):
    """Draw PG(1, c) variates.

    Parameters
    ----------
    c : float or array_like
        Tilting parameters; only ``|c|`` matters.
    rng : numpy.random.Generator

    Returns
    -------
    float or ndarray
        One draw per entry of ``c``, same shape.
    """
    c_arr = np.asarray(c, dtype=float)
    z = 0.5 * np.abs(c_arr.ravel())
    if not np.all(np.isfinite(z)):
        raise ValueError("c must be finite")
    out = np.empty_like(z)
    _draw_many(z, rng, out)
    if np.any(out < 0):
        raise RuntimeError("Polya-Gamma sampler exceeded its proposal cap")
    if c_arr.ndim == 0:
        return float(out[0])
    return out.reshape(c_arr.shape)


def sample_pg1_rounds(c, rng):
    """Like :func:`sample_pg1` on a 1-D array, also returning the largest
    number of proposals any single draw needed (for diagnostics)."""
    z = 0.5 * np.abs(np.asarray(c, dtype=float).ravel())
    out = np.empty_like(z)
    worst = _draw_many(z, rng, out)
    return out, int(worst)
