"""Logistic-likelihood numerics: likelihood, derivatives, MLE and separation.

The public functions take a :class:`Dataset` and a :class:`ModelIndicator`;
the underscore-prefixed kernels work on a column-subset design ``Xg`` and are
what the sampler calls in its inner loop.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve
from scipy.special import expit

from . import _kernels
from .errors import DataError, NumericError
from .simplex import simplex_max

SCORE_TOL = 1e-8
MAX_NEWTON = 100
MAX_HALVINGS = 30
_SATURATED_ETA = 36.0


@dataclass(frozen=True, eq=False)
class Dataset:
    """Binary response with a design whose first column is the intercept.

    Attributes
    ----------
    y : (n,) ndarray of float
        Entries in {0, 1}.
    X : (n, p+1) ndarray
        Column 0 is all ones.
    column_names : list of str
        Names of the ``p`` covariates (intercept excluded).
    """

    y: np.ndarray
    X: np.ndarray
    column_names: list = field(default_factory=list)

    def __post_init__(self):
        y = np.ascontiguousarray(self.y, dtype=float)
        X = np.ascontiguousarray(self.X, dtype=float)
        if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
            raise DataError(f"shape mismatch: X {X.shape}, y {y.shape}")
        if not np.all((y == 0) | (y == 1)):
            raise DataError("response must be binary (0/1)")
        if not np.all(X[:, 0] == 1.0):
            raise DataError("first design column must be the intercept (all ones)")
        if not np.all(np.isfinite(X)):
            raise DataError("design contains non-finite values")
        names = list(self.column_names) or [f"x{j}" for j in range(1, X.shape[1])]
        if len(names) != X.shape[1] - 1:
            raise DataError("column_names must name every covariate")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "column_names", names)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1] - 1

    def with_response(self, y):
        return Dataset(y=y, X=self.X, column_names=self.column_names)

    def check_rank(self):
        """Raise :class:`DataError` unless ``n > p+1`` and X has full column rank."""
        n, q = self.X.shape
        if n <= q:
            raise DataError(f"need n > p+1, got n={n}, p+1={q}")
        s = np.linalg.svd(self.X, compute_uv=False)
        if s[-1] <= s[0] * max(n, q) * np.finfo(float).eps * 10:
            raise DataError("design matrix is rank deficient")


@dataclass(frozen=True, eq=False)
class ModelIndicator:
    """Inclusion vector over ``(intercept, x_1, ..., x_p)`` with the intercept fixed on."""

    gamma: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=bool).copy()
        if g.ndim != 1 or g.size < 1:
            raise ValueError("gamma must be a non-empty vector")
        if not g[0]:
            raise ValueError("gamma[0] (intercept) must be 1")
        g.setflags(write=False)
        object.__setattr__(self, "gamma", g)

    @classmethod
    def from_covariates(cls, p, included=()):
        g = np.zeros(p + 1, dtype=bool)
        g[0] = True
        g[np.asarray(list(included), dtype=int)] = True
        return cls(g)

    @classmethod
    def from_bits(cls, bits):
        """Build from a string of '0'/'1' over covariates 1..p."""
        return cls(np.array([True] + [c == "1" for c in bits]))

    @classmethod
    def null(cls, p):
        return cls.from_covariates(p)

    @classmethod
    def full(cls, p):
        return cls(np.ones(p + 1, dtype=bool))

    @property
    def p(self):
        return self.gamma.size - 1

    @property
    def size(self):
        """Number of included covariates, p_gamma."""
        return int(self.gamma[1:].sum())

    @property
    def cols(self):
        return np.flatnonzero(self.gamma)

    @property
    def bits(self):
        return "".join("1" if g else "0" for g in self.gamma[1:])

    def __eq__(self, other):
        return isinstance(other, ModelIndicator) and np.array_equal(self.gamma, other.gamma)

    def __hash__(self):
        return hash(self.gamma.tobytes())

    def __repr__(self):
        return f"ModelIndicator({self.bits!r})"


@dataclass(frozen=True, eq=False)
class GlmFit:
    """MLE and observed information for one (model, response) pair."""

    beta_hat: np.ndarray
    info: np.ndarray
    log_lik_at_max: float
    converged: bool
    iterations: int
    chol: np.ndarray = field(repr=False, default=None)
    logdet_info: float = field(repr=False, default=None)

    def __post_init__(self):
        if self.chol is None:
            object.__setattr__(self, "chol", _chol(self.info))
        if self.logdet_info is None:
            ld = 2.0 * float(np.log(np.diag(self.chol)).sum())
            object.__setattr__(self, "logdet_info", ld)


@dataclass(frozen=True)
class SeparationReport:
    separated: bool
    witness_direction: np.ndarray | None
    detector: str  # "lp" or "newton"
    lp_objective: float | None = None


def log1pexp(eta):
    """log(1 + exp(eta)) without overflow."""
    eta = np.asarray(eta, dtype=float)
    out = np.empty_like(eta)
    big = eta > 30.0
    out[big] = eta[big] + np.exp(-eta[big])
    out[~big] = np.log1p(np.exp(eta[~big]))
    return out


def _loglik(Xg, y, beta):
    eta = Xg @ beta
    return float(y @ eta - log1pexp(eta).sum())


def _score_info(Xg, y, beta):
    theta = expit(Xg @ beta)
    w = theta * (1.0 - theta)
    score = Xg.T @ (y - theta)
    Xw = Xg * np.sqrt(w)[:, None]
    info = Xw.T @ Xw  # numpy recognises A^T A: exactly symmetric
    return score, info


def _chol(A):
    try:
        return np.linalg.cholesky(A)
    except np.linalg.LinAlgError as exc:
        raise NumericError("information matrix is not positive definite") from exc


def _check_beta(data, model, beta):
    beta = np.asarray(beta, dtype=float)
    if model.p != data.p:
        raise ValueError(f"model has p={model.p}, data has p={data.p}")
    q = model.size + 1
    if beta.shape != (q,):
        raise ValueError(f"beta must have length {q}, got shape {beta.shape}")
    return beta


def log_likelihood(data, model, beta):
    """Bernoulli-logit log-likelihood of ``beta`` under ``model``."""
    beta = _check_beta(data, model, beta)
    return _loglik(data.X[:, model.cols], data.y, beta)


def score_and_information(data, model, beta):
    """Gradient ``X^T (y - theta)`` and observed information ``X^T W X``."""
    beta = _check_beta(data, model, beta)
    return _score_info(data.X[:, model.cols], data.y, beta)


def _newton(Xg, y, init=None, tol=SCORE_TOL, max_iter=MAX_NEWTON):
    """Newton-Raphson with step halving (compiled). Returns a GlmFit."""
    Xg = np.ascontiguousarray(Xg, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    q = Xg.shape[1]
    beta0 = np.zeros(q) if init is None else np.array(init, dtype=float)
    beta, info, L, ll, conv, it, status = _kernels.newton(
        Xg, y, beta0, tol, max_iter, MAX_HALVINGS
    )
    if status != 0:
        raise NumericError("information matrix is not positive definite")
    return GlmFit(
        beta_hat=beta, info=info, log_lik_at_max=ll, converged=bool(conv),
        iterations=int(it), chol=L,
        logdet_info=2.0 * float(np.log(np.diag(L)).sum()),
    )


def _newton_reference(Xg, y, init=None, tol=SCORE_TOL, max_iter=MAX_NEWTON):
    """Plain numpy version of :func:`_newton`, kept as a cross-check."""
    q = Xg.shape[1]
    beta = np.zeros(q) if init is None else np.array(init, dtype=float)
    ll = _loglik(Xg, y, beta)
    it = 0
    converged = False
    while True:
        score, info = _score_info(Xg, y, beta)
        if np.max(np.abs(score)) <= tol:
            converged = True
            break
        if it >= max_iter:
            break
        L = _chol(info)
        step = cho_solve((L, True), score, check_finite=False)
        t = 1.0
        for _ in range(MAX_HALVINGS + 1):
            cand = beta + t * step
            ll_new = _loglik(Xg, y, cand)
            # small slack absorbs rounding once the iterate is essentially optimal
            if ll_new >= ll - 1e-12 * (1.0 + abs(ll)):
                break
            t *= 0.5
        beta, ll = cand, ll_new
        it += 1
    L = _chol(info)
    return GlmFit(
        beta_hat=beta, info=info, log_lik_at_max=ll,
        converged=converged, iterations=it, chol=L,
        logdet_info=2.0 * float(np.log(np.diag(L)).sum()),
    )


def fit_mle(data, model, init=None):
    """Maximum-likelihood fit of ``model`` by damped Newton iterations.

    Parameters
    ----------
    data : Dataset
    model : ModelIndicator
    init : array_like, optional
        Warm start of length ``p_gamma + 1``; zeros when omitted.

    Returns
    -------
    GlmFit
        ``converged`` is False when the score did not reach 1e-8 in sup-norm
        within 100 iterations (typically a separated response).

    Raises
    ------
    NumericError
        If the information matrix is numerically singular.
    """
    if init is not None:
        init = _check_beta(data, model, init)
    return _newton(data.X[:, model.cols], data.y, init)


def _separation_lp(X, y, max_iter=5000):
    s = 2.0 * y - 1.0
    As = X * s[:, None]
    q = X.shape[1]
    # b = bp - bm with bp, bm >= 0
    A = np.block([[As, -As], [-As, As]])
    rhs = np.concatenate([np.ones(len(y)), np.zeros(len(y))])
    c = As.sum(axis=0)
    res = simplex_max(np.concatenate([c, -c]), A, rhs, max_iter=max_iter)
    b = res.x[:q] - res.x[q:]
    return res, b


def detect_separation(data, max_iter=5000):
    """Check whether the MLE of the full model is infinite.

    Solves ``max sum_i s_i x_i^T b`` subject to ``0 <= s_i x_i^T b <= 1`` with
    ``s_i = 2 y_i - 1`` by the dense simplex. A strictly positive optimum
    certifies (quasi-)complete separation and ``b`` is the witness. If the
    simplex exhausts its pivot budget, a Newton divergence check decides.

    Returns
    -------
    SeparationReport
    """
    X, y = data.X, data.y
    res, b = _separation_lp(X, y, max_iter=max_iter)
    if res.status == "optimal":
        if res.objective > 1e-9:
            return SeparationReport(True, b, "lp", res.objective)
        return SeparationReport(False, None, "lp", res.objective)
    # degenerate LP beyond the pivot budget: run the full 100 Newton steps
    # without the score stop and look for divergence. The score of a
    # separated fit decays like exp(-|eta|), so the tolerance test alone
    # would stop near |beta| ~ 100; saturated fitted probabilities
    # (|eta| > 36, theta == 0 or 1 in double precision) also count.
    beta, _, _, _, _, _, status = _kernels.newton(
        np.ascontiguousarray(X), np.ascontiguousarray(y, dtype=float),
        np.zeros(X.shape[1]), 0.0, MAX_NEWTON, MAX_HALVINGS,
    )
    diverged = (
        status != 0
        or np.max(np.abs(beta)) > 1e4
        or np.max(np.abs(X @ beta)) > _SATURATED_ETA
    )
    witness = None
    if diverged and np.all(np.isfinite(beta)) and np.any(beta):
        witness = beta / np.max(np.abs(beta))
    return SeparationReport(bool(diverged), witness, "newton", None)


def separated_fast(X, y, init=None):
    """Separation check that skips the LP when a bounded MLE is found.

    A converged full-model fit with moderate linear predictors proves the MLE
    is finite. Otherwise the LP decides. Returns ``(separated, fit_or_None)``.
    """
    try:
        fit = _newton(X, y, init)
        if fit.converged and np.max(np.abs(X @ fit.beta_hat)) <= 15.0:
            return False, fit
    except NumericError:
        pass
    res, _ = _separation_lp(X, y)
    if res.status == "optimal":
        sep = res.objective > 1e-9
    else:
        try:
            sep = np.max(np.abs(_newton(X, y).beta_hat)) > 1e4
        except NumericError:
            sep = True
    if sep:
        return True, None
    try:
        return False, _newton(X, y, init)
    except NumericError:
        return False, None
