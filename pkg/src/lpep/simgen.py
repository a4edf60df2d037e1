"""Simulation scenarios: AR(1)-correlated Gaussian designs and sparse truths."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .glm import Dataset, ModelIndicator
from .pg import make_rng

B_BLOCK = np.array([2.0, -1.0, -1.0, 0.5, -0.5])
INTERCEPT = -0.5
# stream id reserved for data generation; chains use streams 0, 1, ...
DATA_STREAM = 1 << 32
# block multipliers for covariates 1:5, 6:10, 11:15, 16:20
_LAYOUT = {
    0: (0.0, 0.0, 0.0, 0.0),
    5: (1.0, 0.0, 0.0, 0.0),
    10: (1.0, 0.0, 1.0, 0.0),
    20: (1.0, 0.5, 1.0, 0.5),
}


@dataclass(frozen=True)
class Scenario:
    n: int
    p: int
    p_true: int
    r: float
    replication_seed: int = 0

    def __post_init__(self):
        if self.p_true not in _LAYOUT:
            raise ValueError("p_true must be one of 0, 5, 10, 20")
        needed = {0: 0, 5: 5, 10: 15, 20: 20}[self.p_true]
        if self.p < needed:
            raise ValueError(f"p_true={self.p_true} needs p >= {needed}")
        if not 0.0 <= self.r < 1.0:
            raise ValueError("r must lie in [0, 1)")
        if self.n <= self.p + 1:
            raise ValueError("need n > p + 1")


def true_coefficients(p_true, p):
    """Intercept plus ``p`` coefficients of the data-generating model."""
    if p_true not in _LAYOUT:
        raise ValueError("p_true must be one of 0, 5, 10, 20")
    beta = np.zeros(p + 1)
    beta[0] = INTERCEPT
    for k, mult in enumerate(_LAYOUT[p_true]):
        if mult:
            if p < 5 * (k + 1):
                raise ValueError(f"p_true={p_true} needs p >= {5 * (k + 1)}")
            beta[1 + 5 * k : 6 + 5 * k] = mult * B_BLOCK
    return beta


def true_model(p_true, p):
    return ModelIndicator(true_coefficients(p_true, p) != 0)


def gen_design(n, p, r, rng):
    """Intercept column followed by ``p`` standard normal covariates with
    correlation ``r**|j-k|``, built by the AR(1) recursion."""
    if not 0.0 <= r < 1.0:
        raise ValueError("r must lie in [0, 1)")
    eps = rng.standard_normal((n, p))
    X = np.empty((n, p + 1))
    X[:, 0] = 1.0
    if p:
        X[:, 1] = eps[:, 0]
        s = np.sqrt(1.0 - r * r)
        for j in range(1, p):
            X[:, j + 1] = r * X[:, j] + s * eps[:, j]
    return X


def gen_response(X, beta_true, rng):
    """Bernoulli draws with success probability ``expit(X @ beta_true)``."""
    X = np.asarray(X, dtype=float)
    beta_true = np.asarray(beta_true, dtype=float)
    if X.shape[1] != beta_true.size:
        raise ValueError("X and beta_true dimensions disagree")
    return (rng.random(X.shape[0]) < expit(X @ beta_true)).astype(float)


def simulate(scenario):
    """Dataset and true coefficients for one replication.

    The stream ``(replication_seed, DATA_STREAM)`` drives both design and
    response, so a scenario always maps to the same bytes and never shares
    random numbers with a chain seeded by the same value.
    """
    rng = make_rng(scenario.replication_seed, DATA_STREAM)
    X = gen_design(scenario.n, scenario.p, scenario.r, rng)
    beta = true_coefficients(scenario.p_true, scenario.p)
    y = gen_response(X, beta, rng)
    names = [f"x{j}" for j in range(1, scenario.p + 1)]
    return Dataset(y=y, X=X, column_names=names), beta
