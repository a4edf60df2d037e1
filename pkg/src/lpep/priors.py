"""Prior ingredients: hyperpriors on delta, the model-space prior, the
imaginary-sample predictive and the LPEP kernel itself."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import betaln, gammaln

from .errors import NumericError
from .glm import detect_separation, fit_mle

FIXED = "fixed"
HYPER_G_N = "hyper-g/n"
ROBUST = "robust"
_KINDS = (FIXED, HYPER_G_N, ROBUST)
_ALIASES = {"hyper-gn": HYPER_G_N, "hgn": HYPER_G_N, "unit": FIXED}

LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class DeltaPrior:
    """Hyperprior on the power parameter delta.

    ``kind`` is one of ``"fixed"`` (point mass at ``n_star``), ``"hyper-g/n"``
    or ``"robust"``.
    """

    kind: str
    n_star: int

    def __post_init__(self):
        kind = _ALIASES.get(self.kind, self.kind)
        if kind not in _KINDS:
            raise ValueError(f"unknown delta prior {self.kind!r}")
        if self.n_star < 1:
            raise ValueError("n_star must be >= 1")
        object.__setattr__(self, "kind", kind)

    @property
    def is_fixed(self):
        return self.kind == FIXED


@dataclass(frozen=True)
class ModelPrior:
    """Beta-Binomial(a, b) prior on the model space."""

    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError("Beta-Binomial parameters must be positive")


@dataclass(frozen=True, eq=False)
class ImaginarySample:
    """Imaginary response vector together with its admissibility flag."""

    ystar: np.ndarray
    sum: int
    admissible: bool

    @classmethod
    def from_response(cls, ystar, data):
        ystar = np.asarray(ystar, dtype=float)
        sep = detect_separation(data.with_response(ystar)).separated
        return cls(ystar=ystar, sum=int(ystar.sum()), admissible=not sep)


def delta_support_lower(prior, model):
    """Lower end of the delta support for ``model``."""
    if prior.kind == FIXED:
        return float(prior.n_star)
    if prior.kind == HYPER_G_N:
        return 0.0
    pg = model if isinstance(model, (int, np.integer)) else model.size
    return (prior.n_star - pg) / (pg + 1.0)


def delta_log_prior(prior, delta, model):
    """Log-density of delta under ``prior`` given ``model``.

    The hyper-g/n density is normalized, ``(1/n*) (1 + delta/n*)^-2``, so that
    it integrates to one; only its shape matters to the sampler. The fixed
    prior is a point mass and returns 0 at ``n_star``.
    """
    n = float(prior.n_star)
    if prior.kind == FIXED:
        return 0.0 if delta == n else -np.inf
    if not delta > 0:
        return -np.inf
    if prior.kind == HYPER_G_N:
        return -np.log(n) - 2.0 * np.log1p(delta / n)
    pg = model if isinstance(model, (int, np.integer)) else model.size
    if not delta > delta_support_lower(prior, pg):
        return -np.inf
    return (
        0.5 * np.log(n + 1.0) - np.log(2.0) - 0.5 * np.log(pg + 1.0)
        - 1.5 * np.log1p(delta)
    )


def _delta_log_prior_vec(prior, d, model):
    # vectorized form for quadrature; the robust density is taken as
    # right-continuous at its support bound
    n = float(prior.n_star)
    if prior.kind == HYPER_G_N:
        return -np.log(n) - 2.0 * np.log1p(d / n)
    pg = model.size
    out = (
        0.5 * np.log(n + 1.0) - np.log(2.0) - 0.5 * np.log(pg + 1.0)
        - 1.5 * np.log1p(d)
    )
    return np.where(d >= delta_support_lower(prior, pg), out, -np.inf)


def delta_prior_quantile(prior, u, model):
    """Inverse CDF of the delta prior; ``u`` in (0, 1)."""
    u = np.asarray(u, dtype=float)
    n = float(prior.n_star)
    if prior.kind == FIXED:
        return np.full_like(u, n)
    if prior.kind == HYPER_G_N:
        return n * u / (1.0 - u)
    # survival is sqrt((a+1)/(delta+1)) on delta > a
    a = delta_support_lower(prior, model)
    return (a + 1.0) / (1.0 - u) ** 2 - 1.0


def model_log_prior(prior, model, p=None):
    """Beta-Binomial log prior mass of one model."""
    pg = model if isinstance(model, (int, np.integer)) else model.size
    if p is None:
        p = model.p
    if not 0 <= pg <= p:
        raise ValueError("model size out of range")
    return float(betaln(prior.a + pg, prior.b + p - pg) - betaln(prior.a, prior.b))


def beta_binomial_half_logpmf(s, n):
    """Unconstrained Beta-Binomial(1/2, 1/2) log-probability of one binary
    sequence with ``s`` ones out of ``n``."""
    return float(
        gammaln(s + 0.5) + gammaln(n - s + 0.5) - gammaln(n + 1.0) - 2.0 * gammaln(0.5)
    )


def imaginary_log_weight(ys, data=None):
    """Unnormalized log-weight of an imaginary sample.

    Ratios of these weights are exact; the normalizer over admissible
    responses is never needed.
    """
    if not ys.admissible:
        return -np.inf
    return beta_binomial_half_logpmf(ys.sum, len(ys.ystar))


def lpep_conditional_logpdf(beta, fit_star, delta):
    """Gaussian LPEP kernel N(beta; beta_hat, delta * info^-1) on the log scale."""
    beta = np.asarray(beta, dtype=float)
    L = fit_star.chol
    if L is None:
        try:
            L = np.linalg.cholesky(fit_star.info)
        except np.linalg.LinAlgError as exc:
            raise NumericError("information matrix is not positive definite") from exc
    if not delta > 0:
        raise ValueError("delta must be positive")
    q = beta.shape[0]
    if L.shape != (q, q):
        raise ValueError("beta and fit dimensions disagree")
    # (b - bhat)^T H (b - bhat) = ||L^T (b - bhat)||^2
    v = L.T @ (beta - fit_star.beta_hat)
    half_logdet = float(np.log(np.diag(L)).sum())
    return half_logdet - 0.5 * q * (LOG_2PI + np.log(delta)) - 0.5 * float(v @ v) / delta


def _log_trapezoid(logf, logx):
    # integral of f(x) dx over a log-spaced grid, as integral of f(e^u) e^u du
    g = logf + logx
    du = np.diff(logx)
    pair = np.logaddexp(g[:-1], g[1:]) - np.log(2.0)
    finite = np.isfinite(pair)
    if not finite.any():
        return -np.inf
    terms = pair[finite] + np.log(du[finite])
    m = terms.max()
    return float(m + np.log(np.exp(terms - m).sum()))


def lpep_marginal_logpdf(beta, ys, model, dprior, data, fit_star=None, tol=1e-6):
    """LPEP log-density of ``beta`` given one imaginary sample, delta integrated out.

    Parameters
    ----------
    beta : array_like
    ys : ImaginarySample
        Must be admissible.
    model : ModelIndicator
    dprior : DeltaPrior
    data : Dataset
        Supplies the design; its response is ignored.
    fit_star : GlmFit, optional
        Precomputed fit of ``model`` on ``ys.ystar``.
    tol : float
        Grid refinement stops when successive grids agree to ``tol``.
    """
    if not ys.admissible:
        raise ValueError("imaginary sample is not admissible")
    if fit_star is None:
        fit_star = fit_mle(data.with_response(ys.ystar), model)
    if dprior.is_fixed:
        return lpep_conditional_logpdf(beta, fit_star, float(dprior.n_star))

    beta = np.asarray(beta, dtype=float)
    q = beta.shape[0]
    L = fit_star.chol
    v = L.T @ (beta - fit_star.beta_hat)
    Q = float(v @ v)
    half_logdet = float(np.log(np.diag(L)).sum())

    lo = max(delta_support_lower(dprior, model), 1e-6)
    hi = 1e6 * dprior.n_star

    def integrand(d):
        lk = half_logdet - 0.5 * q * (LOG_2PI + np.log(d)) - 0.5 * Q / d
        return lk + _delta_log_prior_vec(dprior, d, model)

    npts = 201
    prev = None
    while True:
        logx = np.linspace(np.log(lo), np.log(hi), npts)
        val = _log_trapezoid(integrand(np.exp(logx)), logx)
        if prev is not None and abs(val - prev) <= tol:
            return val
        if npts > 200_000:
            return val
        prev = val
        npts = 2 * npts - 1
