"""Supervised hidden-Markov outbreak detection for weekly count series."""

from ._core import (
    DataError,
    HmmModel,
    NumericError,
    UsageError,
    auc_of,
    baseline_score,
    calibrate_outbreak_mean,
    endemic_mean,
    estimate_transitions,
    fit_hmm,
    match_threshold,
    nb_alarm_threshold,
    nb_log_pmf,
    nb_upper_tail,
    outbreak_posterior,
    scenario_params,
    simulate_series,
)

__all__ = [
    "DataError",
    "HmmModel",
    "NumericError",
    "UsageError",
    "auc_of",
    "baseline_score",
    "calibrate_outbreak_mean",
    "endemic_mean",
    "estimate_transitions",
    "fit_hmm",
    "match_threshold",
    "nb_alarm_threshold",
    "nb_log_pmf",
    "nb_upper_tail",
    "outbreak_posterior",
    "scenario_params",
    "simulate_series",
]
