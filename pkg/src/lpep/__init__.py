"""Bayesian variable selection for logistic regression under the Laplace
power-expected-posterior (LPEP) prior."""

__version__ = "0.1.0"

from .errors import ConfigError, DataError, FailureBudgetError, LpepError, NumericError
from .glm import (
    Dataset,
    GlmFit,
    ModelIndicator,
    SeparationReport,
    detect_separation,
    fit_mle,
    log_likelihood,
    score_and_information,
)
from .inference import PosteriorSummary, predict_bma, prediction_metrics, summarize
from .io import RunConfig, load_csv, write_csv
from .oracle import OracleResult, exact_model_posterior
from .pg import make_rng, sample_pg1
from .priors import DeltaPrior, ImaginarySample, ModelPrior
from .sampler import DrawStore, McmcConfig, run_chain, run_chains
from .simgen import Scenario, simulate

__all__ = [
    "ConfigError", "DataError", "FailureBudgetError", "LpepError", "NumericError",
    "Dataset", "GlmFit", "ModelIndicator", "SeparationReport", "detect_separation",
    "fit_mle", "log_likelihood", "score_and_information",
    "PosteriorSummary", "predict_bma", "prediction_metrics", "summarize",
    "RunConfig", "load_csv", "write_csv",
    "OracleResult", "exact_model_posterior",
    "make_rng", "sample_pg1",
    "DeltaPrior", "ImaginarySample", "ModelPrior",
    "DrawStore", "McmcConfig", "run_chain", "run_chains",
    "Scenario", "simulate",
]
