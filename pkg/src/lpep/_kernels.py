"""Compiled inner loops shared by the GLM fitter and the sampler.

These mirror the plain numpy definitions in :mod:`lpep.glm` and
:mod:`lpep.sampler`; the tests cross-check the two.
"""

from __future__ import annotations

import math

import numba
import numpy as np

LOG_2PI = math.log(2.0 * math.pi)


@numba.njit(cache=True)
def log1pexp(e):
    if e > 30.0:
        return e + math.exp(-e)
    return math.log1p(math.exp(e))


@numba.njit(cache=True)
def cholesky(A, L):
    """Lower Cholesky factor of A into L; False if A is not positive definite."""
    q = A.shape[0]
    for j in range(q):
        s = A[j, j]
        for k in range(j):
            s -= L[j, k] * L[j, k]
        if not s > 0.0:
            return False
        d = math.sqrt(s)
        L[j, j] = d
        for i in range(j + 1, q):
            t = A[i, j]
            for k in range(j):
                t -= L[i, k] * L[j, k]
            L[i, j] = t / d
        for i in range(j):
            L[i, j] = 0.0
    return True


@numba.njit(cache=True)
def forward(L, b):
    """Solve L x = b for lower-triangular L."""
    q = b.size
    x = np.empty(q)
    for i in range(q):
        s = b[i]
        for k in range(i):
            s -= L[i, k] * x[k]
        x[i] = s / L[i, i]
    return x


@numba.njit(cache=True)
def backward(L, b):
    """Solve L^T x = b for lower-triangular L."""
    q = b.size
    x = np.empty(q)
    for i in range(q - 1, -1, -1):
        s = b[i]
        for k in range(i + 1, q):
            s -= L[k, i] * x[k]
        x[i] = s / L[i, i]
    return x


@numba.njit(cache=True)
def _loglik(Xg, y, beta, eta):
    n, q = Xg.shape
    ll = 0.0
    for i in range(n):
        e = 0.0
        for j in range(q):
            e += Xg[i, j] * beta[j]
        eta[i] = e
        ll += y[i] * e - log1pexp(e)
    return ll


@numba.njit(cache=True)
def _score_info(Xg, y, eta, score, info):
    n, q = Xg.shape
    Xw = np.empty((n, q))
    score[:] = 0.0
    for i in range(n):
        e = eta[i]
        if e >= 0:
            th = 1.0 / (1.0 + math.exp(-e))
        else:
            ex = math.exp(e)
            th = ex / (1.0 + ex)
        sw = math.sqrt(th * (1.0 - th))
        r = y[i] - th
        for j in range(q):
            score[j] += Xg[i, j] * r
            Xw[i, j] = Xg[i, j] * sw
    info[:, :] = np.dot(Xw.T, Xw)


@numba.njit(cache=True)
def newton(Xg, y, init, tol, max_iter, max_halvings):
    """Damped Newton for the logistic MLE.

    Returns (beta, info, chol, loglik, converged, iterations, status) with
    status 0 on success and 1 if the information lost positive definiteness.
    """
    n, q = Xg.shape
    beta = init.copy()
    eta = np.empty(n)
    eta_c = np.empty(n)
    score = np.empty(q)
    info = np.empty((q, q))
    L = np.zeros((q, q))
    ll = _loglik(Xg, y, beta, eta)
    it = 0
    converged = False
    while True:
        _score_info(Xg, y, eta, score, info)
        smax = 0.0
        for j in range(q):
            a = abs(score[j])
            if a > smax:
                smax = a
        if smax <= tol:
            converged = True
            break
        if it >= max_iter:
            break
        if not cholesky(info, L):
            return beta, info, L, ll, False, it, 1
        step = backward(L, forward(L, score))
        t = 1.0
        cand = beta + step
        ll_new = _loglik(Xg, y, cand, eta_c)
        for _ in range(max_halvings):
            if ll_new >= ll - 1e-12 * (1.0 + abs(ll)):
                break
            t *= 0.5
            cand = beta + t * step
            ll_new = _loglik(Xg, y, cand, eta_c)
        beta = cand
        ll = ll_new
        eta, eta_c = eta_c, eta
        it += 1
    for j in range(q):
        for k in range(q):
            if not math.isfinite(info[j, k]):
                return beta, info, L, ll, converged, it, 1
    if not cholesky(info, L):
        return beta, info, L, ll, converged, it, 1
    return beta, info, L, ll, converged, it, 0


@numba.njit(cache=True)
def zlik(Xg, kappa, omega, sum_log_omega, bhat, info, logdet_info, delta, LM):
    """Working-response log-density via the q x q Woodbury form.

    Fills LM with the Cholesky factor of M = info/delta + Xg^T Omega Xg and
    returns (value, ok).
    """
    n, q = Xg.shape
    M = np.empty((q, q))
    for j in range(q):
        for k in range(j + 1):
            M[j, k] = info[j, k] / delta
    u = np.zeros(q)
    rom = 0.0
    for i in range(n):
        m = 0.0
        for j in range(q):
            m += Xg[i, j] * bhat[j]
        om = omega[i]
        om_r = kappa[i] - om * m  # Omega (z - m)
        rom += (kappa[i] / om - m) * om_r
        for j in range(q):
            xij = Xg[i, j]
            u[j] += xij * om_r
            wx = om * xij
            for k in range(j + 1):
                M[j, k] += wx * Xg[i, k]
    for j in range(q):
        for k in range(j):
            M[k, j] = M[j, k]
    if not cholesky(M, LM):
        return 0.0, False
    v = forward(LM, u)
    quad = rom
    logdet_m = 0.0
    for j in range(q):
        quad -= v[j] * v[j]
        logdet_m += 2.0 * math.log(LM[j, j])
    logdet = q * math.log(delta) + logdet_m - logdet_info - sum_log_omega
    return -0.5 * (n * LOG_2PI + logdet + quad), True


@numba.njit(cache=True)
def beta_draw(xt_kappa, info, bhat, delta, LM, xi):
    """mean + LM^-T xi with mean = M^-1 (X^T kappa + info bhat / delta)."""
    q = bhat.size
    rhs = xt_kappa.copy()
    for j in range(q):
        s = 0.0
        for k in range(q):
            s += info[j, k] * bhat[k]
        rhs[j] += s / delta
    mean = backward(LM, forward(LM, rhs))
    return mean + backward(LM, xi)


@numba.njit(cache=True)
def gauss_kernel_logpdf(beta, bhat, L, delta):
    """log N(beta; bhat, delta (L L^T)^-1)."""
    q = beta.size
    quad = 0.0
    half_logdet = 0.0
    for j in range(q):
        s = 0.0
        for i in range(j, q):
            s += L[i, j] * (beta[i] - bhat[i])
        quad += s * s
        half_logdet += math.log(L[j, j])
    return half_logdet - 0.5 * q * (LOG_2PI + math.log(delta)) - 0.5 * quad / delta


@numba.njit(cache=True)
def linear_predictor(Xg, beta):
    n, q = Xg.shape
    out = np.empty(n)
    for i in range(n):
        s = 0.0
        for j in range(q):
            s += Xg[i, j] * beta[j]
        out[i] = s
    return out
