"""Posterior summaries and evaluation metrics computed from a DrawStore."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, logit
from scipy.stats import rankdata

from .errors import NumericError
from .glm import ModelIndicator, _newton


@dataclass
class PosteriorSummary:
    """Model-averaged summary of a chain.

    ``top_models`` holds ``(bits, probability)`` pairs, most visited first,
    where ``bits`` is the covariate inclusion string. Intervals are 95%
    equal-tailed over the dense draws, so exclusion draws contribute zeros.
    """

    pip: np.ndarray
    top_models: list
    map_model: ModelIndicator
    bma_mean: np.ndarray
    ci_lower: np.ndarray
    ci_upper: np.ndarray
    mean_model_size: float
    mean_delta: float

    def model_prob(self, bits):
        return dict(self.top_models).get(bits, 0.0)

    def to_dict(self, max_models=None):
        models = self.top_models if max_models is None else self.top_models[:max_models]
        return {
            "pips": [float(v) for v in self.pip],
            "models": [{"bits": b, "prob": float(pr)} for b, pr in models],
            "map": {"bits": self.map_model.bits, "size": self.map_model.size},
            "bma": {
                "mean": [float(v) for v in self.bma_mean],
                "lo": [float(v) for v in self.ci_lower],
                "hi": [float(v) for v in self.ci_upper],
            },
            "delta_mean": float(self.mean_delta),
            "mean_model_size": float(self.mean_model_size),
        }


def _model_key(bits):
    # posterior mass desc, then fewer covariates, then lexicographic bits
    return bits.count("1"), bits


def summarize(draws):
    """Reduce draws to PIPs, model probabilities, MAP and BMA estimates.

    Raises
    ------
    ValueError
        If the store holds no draws.
    """
    T = len(draws)
    if T == 0:
        raise ValueError("no draws to summarize")
    gamma = draws.gamma
    pip = gamma.mean(axis=0)
    if draws.p:
        uniq, counts = np.unique(gamma, axis=0, return_counts=True)
        chars = np.where(uniq, ord("1"), ord("0")).astype(np.uint8)
        bits = [row.tobytes().decode() for row in chars]
    else:
        bits, counts = [""], np.array([T])
    order = sorted(range(len(bits)), key=lambda k: (-counts[k], *_model_key(bits[k])))
    top = [(bits[k], counts[k] / T) for k in order]
    map_bits = top[0][0]
    lo, hi = np.percentile(draws.beta, [2.5, 97.5], axis=0)
    return PosteriorSummary(
        pip=pip,
        top_models=top,
        map_model=ModelIndicator.from_bits(map_bits),
        bma_mean=draws.beta.mean(axis=0),
        ci_lower=lo,
        ci_upper=hi,
        mean_model_size=float(gamma.sum(axis=1).mean()),
        mean_delta=float(draws.delta.mean()),
    )


def selection_metrics(map_model, truth):
    """F1 score, exact-match flag and size of the selected model.

    F1 is NaN when the true model is empty (precision and recall are then
    not informative).
    """
    sel = np.asarray(map_model.gamma[1:], dtype=bool)
    tru = np.asarray(truth.gamma[1:], dtype=bool)
    if sel.shape != tru.shape:
        raise ValueError("models have different p")
    size = int(sel.sum())
    exact = bool(np.array_equal(sel, tru))
    if not tru.any():
        return float("nan"), exact, size
    tp = int((sel & tru).sum())
    if tp == 0:
        return 0.0, exact, size
    precision = tp / size
    recall = tp / int(tru.sum())
    return 2 * precision * recall / (precision + recall), exact, size


def amse(bma_mean, truth_beta, p):
    """Mean squared error over the ``p`` covariate coefficients (intercept excluded)."""
    est = np.asarray(bma_mean, dtype=float)
    tru = np.asarray(truth_beta, dtype=float)
    if est.size == p + 1:
        est = est[1:]
    if tru.size == p + 1:
        tru = tru[1:]
    if est.size != p or tru.size != p:
        raise ValueError("coefficient vectors must cover the p covariates")
    return float(np.mean((est - tru) ** 2))


def predict_bma(draws, X_new, chunk=4096):
    """Model-averaged success probabilities for the rows of ``X_new``."""
    X_new = np.asarray(X_new, dtype=float)
    if X_new.ndim != 2 or X_new.shape[1] != draws.beta.shape[1]:
        raise ValueError(
            f"X_new must have {draws.beta.shape[1]} columns (intercept included)"
        )
    acc = np.zeros(X_new.shape[0])
    for s in range(0, len(draws), chunk):
        acc += expit(X_new @ draws.beta[s : s + chunk].T).sum(axis=1)
    return acc / len(draws)


def auc(y, phat):
    """Area under the ROC curve via the rank-sum statistic (midranks for ties)."""
    y = np.asarray(y, dtype=float)
    n1 = int(y.sum())
    n0 = y.size - n1
    if n1 == 0 or n0 == 0:
        return float("nan")
    r = rankdata(phat)
    return float((r[y == 1].sum() - n1 * (n1 + 1) / 2.0) / (n1 * n0))


def calibration_slope(y, phat):
    """Slope of the logistic regression of ``y`` on ``logit(phat)``; NaN if undefined."""
    y = np.asarray(y, dtype=float)
    if y.min() == y.max():
        return float("nan")
    z = logit(np.clip(phat, 1e-12, 1 - 1e-12))
    X = np.column_stack([np.ones_like(z), z])
    try:
        fit = _newton(X, y)
    except NumericError:
        return float("nan")
    return float(fit.beta_hat[1]) if fit.converged else float("nan")


def prediction_metrics(y, phat):
    """Return ``(auc, calibration_slope, log_score, brier)``.

    The log score is the mean negative log predictive probability, so lower is
    better; probabilities are clipped to [1e-12, 1 - 1e-12].
    """
    y = np.asarray(y, dtype=float)
    phat = np.asarray(phat, dtype=float)
    if y.shape != phat.shape:
        raise ValueError("y and phat must have equal length")
    pc = np.clip(phat, 1e-12, 1 - 1e-12)
    ls = float(-np.mean(y * np.log(pc) + (1 - y) * np.log1p(-pc)))
    brier = float(np.mean((phat - y) ** 2))
    return auc(y, phat), calibration_slope(y, phat), ls, brier
