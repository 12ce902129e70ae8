"""Spike-and-slab variable selection on top of the thin R updates."""

from .cv import log_predictive_score, predictive_logpdf
from .data import generate_design, generate_response
from .metrics import auc, selection_metrics
from .model import (
    Hyperparams,
    ModelState,
    RegressionData,
    build_state,
    coefficient_mean,
    default_hyperparams,
    log_marginal,
    log_prior_gamma,
)
from .sampler import ChainSummary, enumerate_posterior, rj_step, run_chain
from .simulate import SimSetting, aggregate, run_replication, run_simulation

__all__ = [
    "Hyperparams",
    "ModelState",
    "RegressionData",
    "ChainSummary",
    "SimSetting",
    "auc",
    "aggregate",
    "build_state",
    "coefficient_mean",
    "default_hyperparams",
    "enumerate_posterior",
    "generate_design",
    "generate_response",
    "log_marginal",
    "log_predictive_score",
    "log_prior_gamma",
    "predictive_logpdf",
    "rj_step",
    "run_chain",
    "run_replication",
    "run_simulation",
    "selection_metrics",
]
