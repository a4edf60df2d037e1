"""MCMC over (model, delta, coefficients, Polya-Gamma latents, imaginary sample).

One iteration runs four updates in a fixed order:

1. joint Metropolis-Hastings move on (gamma, delta) with beta integrated out
   of the Polya-Gamma working likelihood, followed by an exact Gibbs draw of
   beta;
2. Gibbs draw of the latent omegas;
3. local (site flips) or global (independence) move on the imaginary sample;
4. a delta-only random-walk move (skipped for a fixed delta).
"""

from __future__ import annotations

import logging
import os
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import expit

from . import _kernels, glm
from .errors import ConfigError, FailureBudgetError, NumericError
from .glm import GlmFit, ModelIndicator
from .pg import make_rng, sample_pg1
from .priors import (
    LOG_2PI,
    DeltaPrior,
    ModelPrior,
    beta_binomial_half_logpmf,
    delta_log_prior,
    delta_prior_quantile,
    delta_support_lower,
    lpep_conditional_logpdf,
    model_log_prior,
)

log = logging.getLogger(__name__)

MOVES = ("model_delta", "ystar_local", "ystar_global", "delta_extra")
FAILURE_BUDGET = 1e-3


@dataclass
class McmcConfig:
    """Run settings. ``iterations`` counts burn-in; ``delta_walk_scale``
    defaults to n/2 when left as None."""

    delta_prior: DeltaPrior
    model_prior: ModelPrior = field(default_factory=ModelPrior)
    iterations: int = 131072
    burn_in: int = 10000
    seed: int = 0
    move_type_probs: tuple = (0.9, 0.1)
    flip_count_probs: tuple = (0.6, 0.2, 0.15, 0.05)
    ystar_flip_probs: tuple = (0.5, 0.2, 0.15, 0.10, 0.05)
    ystar_local_prob: float = 0.7
    delta_walk_scale: float | None = None
    cache_size: int = 64
    init_ystar: np.ndarray | None = None

    def __post_init__(self):
        if not (self.iterations > self.burn_in >= 0):
            raise ConfigError("need iterations > burn_in >= 0")
        for name in ("move_type_probs", "flip_count_probs", "ystar_flip_probs"):
            v = np.asarray(getattr(self, name), dtype=float)
            if np.any(v < 0) or abs(v.sum() - 1.0) > 1e-12:
                raise ConfigError(f"{name} must be a probability vector")
        if not 0.0 <= self.ystar_local_prob <= 1.0:
            raise ConfigError("ystar_local_prob must lie in [0, 1]")
        if self.delta_walk_scale is not None and not self.delta_walk_scale > 0:
            raise ConfigError("delta_walk_scale must be positive")

    def tau(self, n):
        return n / 2.0 if self.delta_walk_scale is None else float(self.delta_walk_scale)


@dataclass
class ImaginaryState:
    ystar: np.ndarray  # float 0/1
    key: bytes
    log_weight: float


@dataclass
class McmcState:
    """Current position of the chain. Step functions update it in place and
    return it."""

    model: ModelIndicator
    delta: float
    beta: np.ndarray
    omega: np.ndarray
    ystar: ImaginaryState
    fit_star: GlmFit
    ctx: "_Context" = field(repr=False, default=None)


@dataclass
class DrawStore:
    """Post-burn-in draws plus move statistics.

    ``gamma`` is a (T, p) boolean array over covariates, ``beta`` a (T, p+1)
    dense array with zeros for excluded coefficients.
    """

    gamma: np.ndarray
    delta: np.ndarray
    beta: np.ndarray
    counters: dict
    numeric_failures: int = 0
    iterations: int = 0
    column_names: list = field(default_factory=list)

    def __len__(self):
        return self.delta.shape[0]

    @property
    def p(self):
        return self.gamma.shape[1]

    def bits(self):
        """Model of each draw as a '0'/'1' string over covariates."""
        chars = np.where(self.gamma, ord("1"), ord("0")).astype(np.uint8)
        return [row.tobytes().decode() for row in chars]

    def acceptance_rates(self):
        return {k: (a / n if n else float("nan")) for k, (n, a) in self.counters.items()}

    @classmethod
    def merge(cls, stores):
        """Concatenate chains in the given order."""
        stores = list(stores)
        if not stores:
            raise ValueError("nothing to merge")
        counters = {k: [0, 0] for k in MOVES}
        for s in stores:
            for k, (n, a) in s.counters.items():
                counters[k][0] += n
                counters[k][1] += a
        return cls(
            gamma=np.concatenate([s.gamma for s in stores]),
            delta=np.concatenate([s.delta for s in stores]),
            beta=np.concatenate([s.beta for s in stores]),
            counters=counters,
            numeric_failures=sum(s.numeric_failures for s in stores),
            iterations=sum(s.iterations for s in stores),
            column_names=stores[0].column_names,
        )

    def write_csv(self, path, burn_in=0):
        """Write one row per draw: ``iter,delta,gamma_bits,beta_0..beta_p``."""
        q = self.beta.shape[1]
        header = ["iter", "delta", "gamma_bits"] + [f"beta_{j}" for j in range(q)]
        bits = self.bits()
        with open(path, "w", newline="") as fh:
            fh.write(",".join(header) + "\n")
            for t in range(len(self)):
                row = [str(burn_in + t), repr(float(self.delta[t])), bits[t]]
                row += [repr(float(b)) for b in self.beta[t]]
                fh.write(",".join(row) + "\n")


class _LRU:
    def __init__(self, capacity):
        self.capacity = capacity
        self.data = OrderedDict()

    def get(self, key):
        v = self.data.get(key)
        if v is not None:
            self.data.move_to_end(key)
        return v

    def put(self, key, value):
        self.data[key] = value
        self.data.move_to_end(key)
        if len(self.data) > self.capacity:
            self.data.popitem(last=False)


class _Context:
    """Per-chain caches and constants. Never shared between chains."""

    def __init__(self, data, config):
        self.data = data
        self.config = config
        self.X = data.X
        self.y = data.y
        self.n = data.n
        self.p = data.p
        self.kappa = data.y - 0.5
        self.Xt_kappa = data.X.T @ self.kappa
        self.fits = _LRU(config.cache_size)
        self.designs = _LRU(config.cache_size)
        self.admissible_cache = _LRU(4 * config.cache_size)
        self.full_fit = None
        self.tau = config.tau(data.n)
        self.counters = {k: [0, 0] for k in MOVES}
        p2 = np.asarray(config.flip_count_probs[: max(self.p, 1)], dtype=float)
        self.flip_probs = p2 / p2.sum()
        f = np.asarray(config.ystar_flip_probs[: self.n], dtype=float)
        self.ystar_flip = f / f.sum()

    def design(self, model):
        key = model.gamma.tobytes()
        Xg = self.designs.get(key)
        if Xg is None:
            Xg = np.ascontiguousarray(self.X[:, model.cols])
            self.designs.put(key, Xg)
        return Xg

    def fit(self, model, ys, init=None):
        key = (model.gamma.tobytes(), ys.key)
        hit = self.fits.get(key)
        if hit is not None:
            return hit
        res = glm._newton(self.design(model), ys.ystar, init)
        if not res.converged:
            raise NumericError("MLE did not converge on an imaginary sample")
        self.fits.put(key, res)
        return res

    def admissible(self, ystar, key):
        hit = self.admissible_cache.get(key)
        if hit is not None:
            return hit
        init = None if self.full_fit is None else self.full_fit.beta_hat
        sep, fit = glm.separated_fast(self.X, ystar, init)
        if fit is not None:
            self.full_fit = fit
        self.admissible_cache.put(key, not sep)
        return not sep

    def count(self, move, accepted):
        c = self.counters[move]
        c[0] += 1
        c[1] += int(accepted)


def _ystar_state(ystar):
    ystar = np.asarray(ystar, dtype=float)
    s = int(ystar.sum())
    return ImaginaryState(
        ystar=ystar,
        key=ystar.astype(np.uint8).tobytes(),
        log_weight=beta_binomial_half_logpmf(s, ystar.size),
    )


# ---------------------------------------------------------------- proposals


def propose_model(model, p, rng, move_type_probs=(0.9, 0.1),
                  flip_count_probs=(0.6, 0.2, 0.15, 0.05)):
    """Draw a neighbouring model.

    Type 1 flips ``d`` distinct covariates, ``d`` drawn from
    ``flip_count_probs`` (truncated to ``d <= p``). Type 2 swaps one included
    covariate for one excluded covariate and falls back to type 1 when either
    set is empty. The intercept is never touched.
    """
    if p < 1:
        raise ValueError("need at least one covariate")
    g = model.gamma.copy()
    size = int(g[1:].sum())
    if rng.random() >= move_type_probs[0] and 0 < size < p:
        inc = np.flatnonzero(g[1:]) + 1
        exc = np.flatnonzero(~g[1:]) + 1
        i = inc[rng.integers(inc.size)]
        j = exc[rng.integers(exc.size)]
        g[i], g[j] = False, True
        return ModelIndicator(g)
    p2 = np.asarray(flip_count_probs[:p], dtype=float)
    d = 1 + _draw_index(p2 / p2.sum(), rng)
    sites = _distinct(p, d, rng) + 1
    g[sites] = ~g[sites]
    return ModelIndicator(g)


def _draw_index(probs, rng):
    # index k with probability probs[k]
    u = rng.random()
    acc = 0.0
    for k, pk in enumerate(probs):
        acc += pk
        if u < acc:
            return k
    return len(probs) - 1


def _distinct(m, d, rng):
    # d distinct integers from range(m), uniformly (sequential rejection)
    out = []
    while len(out) < d:
        k = int(rng.integers(m))
        if k not in out:
            out.append(k)
    return np.array(out, dtype=np.intp)


def model_proposal_logprob(frm, to, move_type_probs=(0.9, 0.1),
                           flip_count_probs=(0.6, 0.2, 0.15, 0.05)):
    """log q(to | frm) for :func:`propose_model`.

    The swap move's fallback at the empty and full models makes the kernel
    asymmetric there, so the sampler applies this as a Hastings correction.
    """
    p = frm.p
    diff = frm.gamma[1:] != to.gamma[1:]
    h = int(diff.sum())
    p2 = np.asarray(flip_count_probs[:p], dtype=float)
    p2 = p2 / p2.sum()
    q1 = p2[h - 1] / comb(p, h) if 1 <= h <= p2.size else 0.0
    size = frm.size
    if 0 < size < p:
        q2 = 1.0 / (size * (p - size)) if (h == 2 and to.size == size) else 0.0
    else:
        q2 = q1
    q = move_type_probs[0] * q1 + move_type_probs[1] * q2
    return float(np.log(q)) if q > 0 else -np.inf


def reflective_normal_logpdf(dprop, dcur, a, tau):
    """Log-density of ``a + |eps - a|`` with ``eps ~ N(dcur, tau^2)`` at ``dprop``."""
    if dprop < a:
        raise ValueError("proposal lies below the reflection boundary")
    z1 = (dprop - dcur) / tau
    z2 = (2.0 * a - dprop - dcur) / tau
    return float(
        np.logaddexp(-0.5 * z1 * z1, -0.5 * z2 * z2) - 0.5 * LOG_2PI - np.log(tau)
    )


def _reflect_draw(dcur, a, tau, rng):
    eps = dcur + tau * rng.standard_normal()
    return a + abs(eps - a)


def _embed(beta, frm, to):
    # project/extend coefficients from one model's layout to another's
    dense = np.zeros(frm.gamma.size)
    dense[frm.gamma] = beta
    return dense[to.gamma]


# ----------------------------------------------------------- target pieces


def _zlik(Xg, kappa, omega, sum_log_omega, fit, delta):
    # log N(z; Xg bhat, Omega^-1 + delta Xg H^-1 Xg^T) through the q x q
    # matrix M = H/delta + Xg^T Omega Xg; returns the Cholesky of M as well
    q = fit.beta_hat.size
    LM = np.zeros((q, q))
    val, ok = _kernels.zlik(Xg, kappa, omega, sum_log_omega, fit.beta_hat,
                            fit.info, fit.logdet_info, float(delta), LM)
    if not ok:
        raise NumericError("M is not positive definite")
    return val, LM


def zlik_woodbury_reference(Xg, kappa, omega, fit, delta):
    """Plain numpy version of the Woodbury evaluation (cross-check)."""
    n, q = Xg.shape
    m = Xg @ fit.beta_hat
    om_r = kappa - omega * m
    r = kappa / omega - m
    u = Xg.T @ om_r
    M = fit.info / delta + (Xg.T * omega) @ Xg
    LM = np.linalg.cholesky(M)
    v = solve_triangular(LM, u, lower=True)
    quad = float(r @ om_r - v @ v)
    logdet = (
        q * np.log(delta) + 2.0 * np.log(np.diag(LM)).sum()
        - fit.logdet_info - np.log(omega).sum()
    )
    return -0.5 * (n * LOG_2PI + logdet + quad)


def marginal_logpost_gamma_delta(data, omega, model, delta, fit_star, priors):
    """Unnormalized log posterior of (gamma, delta) given omega and y*.

    Parameters
    ----------
    data : Dataset
    omega : (n,) ndarray
        Polya-Gamma latents, all positive.
    model : ModelIndicator
    delta : float
    fit_star : GlmFit
        Fit of ``model`` on the current imaginary sample.
    priors : tuple of (DeltaPrior, ModelPrior)

    Returns
    -------
    float
        Model prior + delta prior + log-density of the working response
        ``z = (y - 1/2) / omega`` with beta integrated out.
    """
    dprior, mprior = priors
    lp = model_log_prior(mprior, model, data.p) + delta_log_prior(dprior, delta, model)
    if not np.isfinite(lp):
        return -np.inf
    omega = np.asarray(omega, dtype=float)
    val, _ = _zlik(
        data.X[:, model.cols], data.y - 0.5, omega, float(np.log(omega).sum()),
        fit_star, delta,
    )
    return lp + val


def zlik_dense(data, omega, model, delta, fit_star):
    """Reference n x n evaluation of the working-response log-density."""
    Xg = data.X[:, model.cols]
    z = (data.y - 0.5) / omega
    m = Xg @ fit_star.beta_hat
    V = np.diag(1.0 / omega) + delta * Xg @ np.linalg.solve(fit_star.info, Xg.T)
    sign, logdet = np.linalg.slogdet(V)
    r = z - m
    return float(-0.5 * (len(z) * LOG_2PI + logdet + r @ np.linalg.solve(V, r)))


def _draw_beta(Xg_t_kappa, fit, delta, LM, rng):
    xi = rng.standard_normal(fit.beta_hat.size)
    return _kernels.beta_draw(Xg_t_kappa, fit.info, fit.beta_hat, float(delta), LM, xi)


# ------------------------------------------------------------------- steps


def _ctx(state, data, config):
    if state.ctx is None:
        state.ctx = _Context(data, config)
    return state.ctx


def step_model_delta(state, data, config, rng):
    """Joint (gamma, delta) MH move, then an exact draw of beta."""
    ctx = _ctx(state, data, config)
    dprior, mprior = config.delta_prior, config.model_prior
    cur = state.model
    sum_log_omega = float(np.log(state.omega).sum())

    if ctx.p >= 1:
        new = propose_model(cur, ctx.p, rng, config.move_type_probs,
                            config.flip_count_probs)
    else:
        new = cur
    log_ratio = 0.0
    if new is not cur:
        log_ratio += model_proposal_logprob(
            new, cur, config.move_type_probs, config.flip_count_probs
        ) - model_proposal_logprob(cur, new, config.move_type_probs,
                                   config.flip_count_probs)
    if dprior.is_fixed:
        d_new = state.delta
    else:
        a_new = delta_support_lower(dprior, new)
        a_cur = delta_support_lower(dprior, cur)
        d_new = _reflect_draw(state.delta, a_new, ctx.tau, rng)
        log_ratio += reflective_normal_logpdf(state.delta, d_new, a_cur, ctx.tau)
        log_ratio -= reflective_normal_logpdf(d_new, state.delta, a_new, ctx.tau)
    log_u = np.log(rng.random())

    Xc = ctx.design(cur)
    lp_cur, LM_cur = _zlik(Xc, ctx.kappa, state.omega, sum_log_omega,
                           state.fit_star, state.delta)
    lp_cur += model_log_prior(mprior, cur, ctx.p) + delta_log_prior(dprior, state.delta, cur)

    accepted = False
    prior_new = model_log_prior(mprior, new, ctx.p) + delta_log_prior(dprior, d_new, new)
    if np.isfinite(prior_new):
        fit_new = ctx.fit(new, state.ystar, _embed(state.fit_star.beta_hat, cur, new))
        Xn = ctx.design(new)
        lp_new, LM_new = _zlik(Xn, ctx.kappa, state.omega, sum_log_omega,
                               fit_new, d_new)
        accepted = log_u < lp_new + prior_new - lp_cur + log_ratio
    ctx.count("model_delta", accepted)
    if accepted:
        state.model, state.delta, state.fit_star = new, d_new, fit_new
        Xc, LM_cur = Xn, LM_new
    state.beta = _draw_beta(ctx.Xt_kappa[state.model.cols], state.fit_star,
                            state.delta, LM_cur, rng)
    return state


def step_omega(state, data, rng):
    """Redraw every latent omega_i ~ PG(1, x_i^T beta)."""
    if state.ctx is not None:
        eta = _kernels.linear_predictor(state.ctx.design(state.model), state.beta)
    else:
        eta = data.X[:, state.model.cols] @ state.beta
    state.omega = sample_pg1(eta, rng)
    return state


def step_ystar(state, data, config, rng):
    """Local or global MH move on the imaginary sample."""
    ctx = _ctx(state, data, config)
    n = ctx.n
    model, beta, delta = state.model, state.beta, state.delta
    cur = state.ystar
    if rng.random() < config.ystar_local_prob:
        move = "ystar_local"
        d = 1 + _draw_index(ctx.ystar_flip, rng)
        sites = _distinct(n, d, rng)
        y_new = cur.ystar.copy()
        y_new[sites] = 1.0 - y_new[sites]
        log_q = 0.0
    else:
        move = "ystar_global"
        cols = model.cols
        eta = ctx.X[:, cols[1:]] @ beta[1:]
        logit = beta[0] / n + eta / delta
        y_new = (rng.random(n) < expit(logit)).astype(float)
        # log q(y*) - log q(y*'); log q(y) = sum(y*logit - log(1 + e^logit))
        log_q = float((cur.ystar - y_new) @ logit)
    log_u = np.log(rng.random())
    new = _ystar_state(y_new)

    try:
        fit_new = ctx.fit(model, new, state.fit_star.beta_hat)
    except NumericError:
        # a diverging submodel fit means the full design separates too
        if ctx.admissible(new.ystar, new.key):
            raise
        ctx.count(move, False)
        return state

    fc = state.fit_star
    l_new = _kernels.gauss_kernel_logpdf(beta, fit_new.beta_hat, fit_new.chol, delta)
    l_cur = _kernels.gauss_kernel_logpdf(beta, fc.beta_hat, fc.chol, delta)
    l_new += new.log_weight
    l_cur += cur.log_weight
    accepted = log_u < l_new - l_cur + log_q and ctx.admissible(new.ystar, new.key)
    ctx.count(move, accepted)
    if accepted:
        state.ystar, state.fit_star = new, fit_new
    return state


def step_delta_extra(state, config, rng, data=None):
    """Random-walk MH on delta alone given beta, y* and gamma."""
    dprior = config.delta_prior
    if dprior.is_fixed:
        return state
    ctx = state.ctx
    a = delta_support_lower(dprior, state.model)
    tau = ctx.tau if ctx is not None else config.tau(len(state.omega))
    d_new = _reflect_draw(state.delta, a, tau, rng)
    log_u = np.log(rng.random())
    lp_new = delta_log_prior(dprior, d_new, state.model)
    accepted = False
    if np.isfinite(lp_new):
        log_ratio = (
            lpep_conditional_logpdf(state.beta, state.fit_star, d_new) + lp_new
            - lpep_conditional_logpdf(state.beta, state.fit_star, state.delta)
            - delta_log_prior(dprior, state.delta, state.model)
            + reflective_normal_logpdf(state.delta, d_new, a, tau)
            - reflective_normal_logpdf(d_new, state.delta, a, tau)
        )
        accepted = log_u < log_ratio
    if ctx is not None:
        ctx.count("delta_extra", accepted)
    if accepted:
        state.delta = d_new
    return state


# ------------------------------------------------------------------ driver


def init_state(data, config, rng):
    """Starting state: null model, delta at n (or a prior draw), observed y as
    the imaginary sample when admissible, else balanced random draws."""
    ctx = _Context(data, config)
    n, p = data.n, data.p
    model = ModelIndicator.null(p)
    dprior = config.delta_prior
    if dprior.is_fixed:
        delta = float(dprior.n_star)
    else:
        delta = float(delta_prior_quantile(dprior, rng.random(), model))
        delta = max(delta, np.nextafter(delta_support_lower(dprior, model), np.inf))

    if config.init_ystar is not None:
        ys = _ystar_state(config.init_ystar)
        if not ctx.admissible(ys.ystar, ys.key):
            raise ConfigError("supplied initial imaginary sample is separable")
    else:
        ys = _ystar_state(data.y)
        if not ctx.admissible(ys.ystar, ys.key):
            base = np.zeros(n)
            base[: n // 2] = 1.0
            for _ in range(10_000):
                ys = _ystar_state(rng.permutation(base))
                if ctx.admissible(ys.ystar, ys.key):
                    break
            else:
                raise ConfigError(
                    "design admits no balanced admissible y* found; supply one"
                )
    fit = ctx.fit(model, ys)
    L = fit.chol
    beta = fit.beta_hat + np.sqrt(delta) * solve_triangular(
        L.T, rng.standard_normal(fit.beta_hat.size), lower=False
    )
    state = McmcState(model=model, delta=delta, beta=beta, omega=np.ones(n),
                      ystar=ys, fit_star=fit, ctx=ctx)
    return step_omega(state, data, rng)


def check_state(state, data, config):
    """Assert the chain invariants; used by tests and debug runs."""
    dprior = config.delta_prior
    assert state.model.gamma[0]
    if dprior.is_fixed:
        assert state.delta == dprior.n_star
    else:
        assert state.delta > delta_support_lower(dprior, state.model)
    assert np.all(state.omega > 0)
    assert state.beta.shape == (state.model.size + 1,)
    sep = glm.detect_separation(data.with_response(state.ystar.ystar)).separated
    assert not sep
    ref = glm._newton(data.X[:, state.model.cols], state.ystar.ystar)
    assert np.allclose(ref.beta_hat, state.fit_star.beta_hat, atol=1e-6)


def run_chain(data, config, rng=None):
    """Run one chain and return its post-burn-in draws.

    Parameters
    ----------
    data : Dataset
    config : McmcConfig
    rng : numpy.random.Generator, optional
        Defaults to the stream ``(config.seed, 0)``.

    Returns
    -------
    DrawStore

    Raises
    ------
    ConfigError
        If no admissible starting imaginary sample is found.
    FailureBudgetError
        If more than 0.1% of iterations fail numerically.
    """
    if rng is None:
        rng = make_rng(config.seed, 0)
    state = init_state(data, config, rng)
    ctx = state.ctx
    T = config.iterations - config.burn_in
    p = data.p
    gam = np.zeros((T, p), dtype=bool)
    dl = np.empty(T)
    bt = np.zeros((T, p + 1))
    failures = 0
    for it in range(config.iterations):
        try:
            step_model_delta(state, data, config, rng)
            step_omega(state, data, rng)
            step_ystar(state, data, config, rng)
            step_delta_extra(state, config, rng)
        except NumericError as exc:
            failures += 1
            log.warning("iteration %d failed numerically: %s", it, exc)
        t = it - config.burn_in
        if t >= 0:
            g = state.model.gamma
            gam[t] = g[1:]
            dl[t] = state.delta
            bt[t, g] = state.beta
    if failures > FAILURE_BUDGET * config.iterations:
        raise FailureBudgetError(failures, config.iterations)
    return DrawStore(
        gamma=gam, delta=dl, beta=bt,
        counters={k: list(v) for k, v in ctx.counters.items()},
        numeric_failures=failures, iterations=config.iterations,
        column_names=list(data.column_names),
    )


def worker_count(requested=None):
    """Thread count: ``requested`` capped by ``LPEP_THREADS`` and the CPU count."""
    cap = os.cpu_count() or 1
    env = os.environ.get("LPEP_THREADS")
    if env:
        try:
            cap = max(1, min(cap, int(env)))
        except ValueError:
            raise ConfigError("LPEP_THREADS must be an integer") from None
    return cap if requested is None else max(1, min(cap, requested))


def run_chains(data, config, chains=1, threads=None):
    """Run independent chains on streams ``(seed, k)`` and merge them in chain order."""
    if chains < 1:
        raise ConfigError("chains must be >= 1")

    def one(k):
        return run_chain(data, config, make_rng(config.seed, k))

    workers = worker_count(threads)
    if chains == 1 or workers == 1:
        stores = [one(k) for k in range(chains)]
    else:
        with ThreadPoolExecutor(max_workers=min(workers, chains)) as pool:
            stores = list(pool.map(one, range(chains)))
    return DrawStore.merge(stores)
