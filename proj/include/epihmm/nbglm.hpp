#ifndef EPIHMM_NBGLM_HPP
#define EPIHMM_NBGLM_HPP

#include <cmath>
#include <string>
#include <vector>

#include "epihmm/timeseries.hpp"

namespace epihmm {

// ---------------------------------------------------------------------------
// Negative binomial distribution utilities (mean/size parameterization,
// variance = mu + mu^2/r). Sizes >= 1e10 are evaluated as the Poisson limit.
// ---------------------------------------------------------------------------

/// log P(K = k) for K ~ NB(mean mu, size r). Stable for k up to 1e6.
double nb_log_pmf(long k, double mu, double r);

double poisson_log_pmf(long k, double mu);

/// Upper tail P(K >= k); exact summation, small tails keep relative accuracy.
double nb_upper_tail(long k, double mu, double r);

/// Smallest k with P(K >= k) < alpha.
long nb_alarm_threshold(double alpha, double mu, double r);

// ---------------------------------------------------------------------------
// Pooled negative binomial regression with log link.
//
// Columns: per-series blocks (intercept, trend, cos, sin) and, when
// outbreak_column is set, one outbreak-indicator column shared by all series.
// Each row touches exactly its own series block plus the shared column.
// ---------------------------------------------------------------------------

struct DesignRow {
  int series = 0; // 0-based series index within the pool
  WeekIndex t = 0;
  double trend = 0.0;
  double cos_term = 0.0;
  double sin_term = 0.0;
  int outbreak = 0; // state s in {0,1}
  int count = 0;    // response o
};

struct PooledDesign {
  int n_series = 0;
  bool outbreak_column = true;
  std::vector<DesignRow> rows;

  int n_cols() const { return 4 * n_series + (outbreak_column ? 1 : 0); }
  void validate() const;
};

/// One design row per (series, week) whose label is known; the outbreak
/// indicator is the label. Covariates use absolute week indices
/// window_start + local - 1 so fits extrapolate onto the parent grid.
PooledDesign build_pooled_design(const SeriesGroup &training, WeekIndex window_start);

struct IrlsOptions {
  int max_iter = 2000; // accepted beta steps, totalled across epochs
  double tol = 1e-8;   // relative deviance change
  bool update_dispersion = true;
  int max_epochs = 100; // beta/dispersion alternation rounds
  std::vector<double> dispersion_init; // per series; empty = method of moments
};

struct GlmFit {
  int n_series = 0;
  bool outbreak_column = true;
  std::vector<double> beta;   // [4n+0..3] per series, last entry = shared outbreak effect
  std::vector<double> size_r; // per-series NB size, > 0
  bool converged = false;
  int iterations = 0;
  double log_likelihood = 0.0; // over fitted (non-clamped) rows, at the final r
  double deviance = 0.0;
  bool beta4_capped = false;
  std::vector<bool> series_all_zero; // all-zero training counts, coefficients clamped

  // Deviance after each accepted beta step; epoch_starts marks where each
  // fixed-dispersion block begins (the deviance definition changes with r).
  std::vector<double> deviance_history;
  std::vector<int> epoch_starts;

  double beta0(int n) const { return beta[4 * static_cast<size_t>(n)]; }
  double beta_trend(int n) const { return beta[4 * static_cast<size_t>(n) + 1]; }
  double beta_cos(int n) const { return beta[4 * static_cast<size_t>(n) + 2]; }
  double beta_sin(int n) const { return beta[4 * static_cast<size_t>(n) + 3]; }
  double beta_outbreak() const { return outbreak_column ? beta.back() : 0.0; }

  double linear_predictor(int series_index, const CovariateRow &z, int state) const;
};

/// Expected cases exp(beta_{n,0} + beta_{n,1} t + beta_{n,2} cos + beta_{n,3} sin
/// + beta4 * state).
double predict_mu(const GlmFit &fit, int series_index, const CovariateRow &z, int state);

/// Sum of nb_log_pmf over the design's non-clamped rows at the given
/// coefficients; the objective irls_fit maximizes over beta at fixed r.
double pooled_log_likelihood(const PooledDesign &design, const std::vector<double> &beta,
                             const std::vector<double> &size_r,
                             const std::vector<bool> &series_all_zero);

/// Alternates IRLS for beta at fixed per-series dispersions with 1-D
/// profile-likelihood Newton updates of each r_n (bracketed [1e-3, 1e6]),
/// until the relative deviance change drops below tol. Deviance is
/// non-increasing across accepted steps within an epoch; steps that would
/// increase it are halved up to 10 times, then the previous beta is kept.
GlmFit irls_fit(const PooledDesign &design, const IrlsOptions &options = {});

} // namespace epihmm

#endif
