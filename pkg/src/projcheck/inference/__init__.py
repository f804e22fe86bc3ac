"""Fitting, sampling, scaling and consistency experiments."""

from .experiments import ExperimentTable, consistency_experiment
from .mle import MLEResult, fit_mle_exact, fit_mle_mcmc
from .sampling import GibbsRun, SamplerConfig, gibbs_chain, gibbs_sample
from .scaling import (
    ClosedFormLogPartition,
    ExactLogPartition,
    RateFunctionEval,
    ScalingProfile,
    rate_function,
    scaling_profile,
)
