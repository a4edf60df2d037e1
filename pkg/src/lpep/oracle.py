"""Brute-force posterior model probabilities for tiny problems.

Every imaginary sample in {0,1}^n is enumerated, inadmissible ones are
dropped, and for each (model, imaginary sample) pair the integral of the
likelihood against the Gaussian LPEP kernel is computed by tensor-product
Gauss-Hermite quadrature centred and scaled at the integrand's mode.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from numpy.polynomial.legendre import leggauss
from scipy.linalg import cho_solve, solve_triangular
from scipy.special import logsumexp

from .errors import ConfigError, NumericError
from .glm import ModelIndicator, _newton, detect_separation, log1pexp
from .priors import (
    LOG_2PI,
    ModelPrior,
    beta_binomial_half_logpmf,
    delta_prior_quantile,
    model_log_prior,
)

MAX_N = 12
MAX_P = 3
_CHUNK = 1 << 16


@dataclass
class OracleResult:
    """Exact model log-marginals and posterior probabilities.

    Maps are keyed by the covariate bit string of each model (e.g. ``"101"``).
    ``ystar_normalizer`` is the sum of the Beta-Binomial(1/2, 1/2) weights
    over admissible imaginary samples.
    """

    model_log_marginals: dict
    model_posteriors: dict
    ystar_normalizer: float
    n_admissible: int


def all_models(p):
    for bits in itertools.product((0, 1), repeat=p):
        yield ModelIndicator(np.array((1,) + bits, dtype=bool))


def admissible_ystars(data):
    """All y* in {0,1}^n whose full-model MLE is finite, as an (m, n) array."""
    n = data.n
    out = []
    for bits in itertools.product((0.0, 1.0), repeat=n):
        y = np.array(bits)
        if not detect_separation(data.with_response(y)).separated:
            out.append(y)
    return np.array(out).reshape(-1, n)


def _log_kernel_integral(Xg, y, fit, delta, nodes, logw):
    """log of int exp(loglik(beta; y)) N(beta; bhat, delta H^-1) d beta."""
    bhat, H, LH = fit.beta_hat, fit.info, fit.chol
    q = bhat.size
    half_logdet_H = np.log(np.diag(LH)).sum()

    def g_terms(beta):
        eta = Xg @ beta
        ll = y @ eta - log1pexp(eta).sum()
        d = beta - bhat
        return ll - 0.5 * d @ H @ d / delta

    # Newton for the mode of loglik + log kernel (strictly concave)
    beta = bhat.copy()
    val = g_terms(beta)
    for _ in range(200):
        eta = Xg @ beta
        th = 1.0 / (1.0 + np.exp(-eta))
        grad = Xg.T @ (y - th) - H @ (beta - bhat) / delta
        A = (Xg.T * (th * (1 - th))) @ Xg + H / delta
        LA = np.linalg.cholesky(A)
        step = cho_solve((LA, True), grad)
        t = 1.0
        for _ in range(40):
            cand = beta + t * step
            cv = g_terms(cand)
            if cv >= val - 1e-13 * (1 + abs(val)):
                break
            t *= 0.5
        beta, val = cand, cv
        if np.max(np.abs(grad)) < 1e-12 * (1 + np.abs(beta).max()):
            break
    eta = Xg @ beta
    th = 1.0 / (1.0 + np.exp(-eta))
    A = (Xg.T * (th * (1 - th))) @ Xg + H / delta
    LA = np.linalg.cholesky(A)
    # beta = mode + C x with C C^T = A^-1, C = LA^-T
    C = solve_triangular(LA.T, np.eye(q), lower=False)
    log_det_C = -np.log(np.diag(LA)).sum()

    const = half_logdet_H - 0.5 * q * (LOG_2PI + np.log(delta))
    parts = []
    for s in range(0, nodes.shape[0], _CHUNK):
        x = nodes[s : s + _CHUNK]
        B = beta[None, :] + x @ C.T
        E = B @ Xg.T
        ll = E @ y - log1pexp(E).sum(axis=1)
        D = B - bhat
        quad = np.einsum("ij,jk,ik->i", D, H, D)
        g = ll - 0.5 * quad / delta
        parts.append(g + 0.5 * (x * x).sum(axis=1) + logw[s : s + _CHUNK])
    return float(const + log_det_C + logsumexp(np.concatenate(parts)))


def _tensor_rule(order, q):
    x, w = hermegauss(order)
    grids = np.meshgrid(*([x] * q), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=1)
    lw = np.meshgrid(*([np.log(w)] * q), indexing="ij")
    logw = np.sum([g.ravel() for g in lw], axis=0)
    return nodes, logw


def exact_model_posterior(data, dprior, quad_order=32, model_prior=None,
                          delta_nodes=64, check_bounds=True, ystars=None):
    """Exact posterior over all 2^p models by enumeration and quadrature.

    Parameters
    ----------
    data : Dataset
    dprior : DeltaPrior
        Fixed delta is integrated exactly; random-delta priors use an outer
        Gauss-Legendre rule with ``delta_nodes`` points in probability space.
    quad_order : int
        Gauss-Hermite points per coefficient.
    model_prior : ModelPrior, optional
        Beta-Binomial(1, 1) by default.
    check_bounds : bool
        Refuse instances beyond n <= 12, p <= 3.
    ystars : ndarray, optional
        Precomputed admissible imaginary samples.

    Returns
    -------
    OracleResult
    """
    if model_prior is None:
        model_prior = ModelPrior()
    n, p = data.n, data.p
    if check_bounds and (n > MAX_N or p > MAX_P):
        raise ConfigError(f"oracle limited to n <= {MAX_N}, p <= {MAX_P}")
    if ystars is None:
        ystars = admissible_ystars(data)
    if ystars.shape[0] == 0:
        raise ConfigError("every imaginary sample is separable")
    logw_y = np.array([beta_binomial_half_logpmf(int(v.sum()), n) for v in ystars])
    log_z = float(logsumexp(logw_y))

    if dprior.is_fixed:
        u_nodes, u_logw = np.array([np.nan]), np.array([0.0])
    else:
        u, w = leggauss(delta_nodes)
        u_nodes, u_logw = 0.5 * (u + 1.0), np.log(0.5 * w)

    rules = {}
    log_marg, log_post = {}, {}
    for model in all_models(p):
        q = model.size + 1
        if q not in rules:
            rules[q] = _tensor_rule(quad_order, q)
        nodes, logw = rules[q]
        Xg = data.X[:, model.cols]
        if dprior.is_fixed:
            deltas = np.array([float(dprior.n_star)])
        else:
            deltas = delta_prior_quantile(dprior, u_nodes, model)
        terms = np.empty(ystars.shape[0])
        for k, ys in enumerate(ystars):
            fit = _newton(Xg, ys)
            if not fit.converged:
                raise NumericError("sub-model fit failed on an admissible y*")
            vals = [
                _log_kernel_integral(Xg, data.y, fit, d, nodes, logw) for d in deltas
            ]
            terms[k] = logw_y[k] - log_z + logsumexp(np.asarray(vals) + u_logw)
        lm = float(logsumexp(terms))
        log_marg[model.bits] = lm
        log_post[model.bits] = lm + model_log_prior(model_prior, model, p)
    norm = logsumexp(list(log_post.values()))
    post = {k: float(np.exp(v - norm)) for k, v in log_post.items()}
    return OracleResult(
        model_log_marginals=log_marg,
        model_posteriors=post,
        ystar_normalizer=float(np.exp(log_z)),
        n_admissible=int(ystars.shape[0]),
    )
