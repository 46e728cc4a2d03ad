#pragma once

#include "epihmm/nbglm.hpp"
#include "epihmm/timeseries.hpp"

namespace epihmm {

/// Single-series seasonal NB fit for the plug-in quantile comparator.
/// Covariate weeks are absolute; labeled outbreak weeks are dropped from
/// the fit, unknown and endemic weeks are kept.
struct BaselineFit {
  double beta0 = 0.0;
  double beta_trend = 0.0;
  double beta_cos = 0.0;
  double beta_sin = 0.0;
  double size_r = 1.0;
  bool poisson_fallback = false; // degenerate fit, Poisson at the window mean
  double fallback_mean = 0.0;
  int n_rows = 0;
};

struct BaselineScore {
  double p_value = 1.0; // upper tail at the observed count
  bool alarm = false;
  long threshold = 0; // smallest count that would alarm
  double mu = 0.0;
  double size_r = 0.0;
  bool poisson_fallback = false;
};

/// Fit on local weeks 1..train_len of the slice (absolute covariate week of
/// local t is window_start + t - 1). Degenerate fits fall back to Poisson
/// with mean = max(window average, 1e-3), flagged.
BaselineFit fit_baseline(const SurveillanceSeries &slice, WeekIndex window_start,
                         WeekIndex train_len);

/// Predictive mean at an absolute week under the fit.
double baseline_mu_at(const BaselineFit &fit, WeekIndex t_abs);

BaselineScore score_with_fit(const BaselineFit &fit, WeekIndex t_abs, int observed, double alpha);

/// Convenience one-shot path: split the series at current_week (trailing
/// holdout_u weeks excluded from the fit, matching the training protocol)
/// and score the current week's count.
BaselineScore baseline_score(const SurveillanceSeries &series, WeekIndex current_week,
                             double alpha = 0.01, int window_years = 5, int holdout_u = 26);

} // namespace epihmm
