#include "epihmm/baseline.hpp"

#include <algorithm>
#include <cmath>

#include "epihmm/errors.hpp"

namespace epihmm {

namespace {

constexpr double kPoissonSize = 1e12;

BaselineFit poisson_fallback_fit(const SurveillanceSeries &slice, WeekIndex train_len) {
  BaselineFit fit;
  fit.poisson_fallback = true;
  double sum = 0.0;
  int n = 0;
  for (WeekIndex t = 1; t <= train_len; ++t) {
    sum += slice.count_at(t);
    ++n;
  }
  fit.fallback_mean = std::max(n > 0 ? sum / n : 0.0, 1e-3);
  fit.n_rows = n;
  return fit;
}

} // namespace

BaselineFit fit_baseline(const SurveillanceSeries &slice, WeekIndex window_start,
                         WeekIndex train_len) {
  if (train_len < 1 || train_len > slice.length())
    throw std::invalid_argument("fit_baseline: train_len outside the series");

  PooledDesign design;
  design.n_series = 1;
  design.outbreak_column = false;
  for (WeekIndex t = 1; t <= train_len; ++t) {
    if (slice.label_at(t) == Label::Outbreak) continue;
    const CovariateRow z = covariate_at(window_start + t - 1);
    design.rows.push_back(DesignRow{0, z.t, z.trend, z.cos_term, z.sin_term, 0, slice.count_at(t)});
  }

  GlmFit glm;
  try {
    glm = irls_fit(design);
  } catch (const NumericError &) {
    return poisson_fallback_fit(slice, train_len);
  } catch (const DataError &) {
    return poisson_fallback_fit(slice, train_len);
  }
  if (!glm.converged || glm.series_all_zero[0]) return poisson_fallback_fit(slice, train_len);

  BaselineFit fit;
  fit.beta0 = glm.beta0(0);
  fit.beta_trend = glm.beta_trend(0);
  fit.beta_cos = glm.beta_cos(0);
  fit.beta_sin = glm.beta_sin(0);
  fit.size_r = glm.size_r[0];
  fit.n_rows = static_cast<int>(design.rows.size());
  return fit;
}

double baseline_mu_at(const BaselineFit &fit, WeekIndex t_abs) {
  if (fit.poisson_fallback) return fit.fallback_mean;
  const CovariateRow z = covariate_at(t_abs);
  const double eta = fit.beta0 + fit.beta_trend * z.trend + fit.beta_cos * z.cos_term +
                     fit.beta_sin * z.sin_term;
  return std::exp(std::clamp(eta, -500.0, 500.0));
}

BaselineScore score_with_fit(const BaselineFit &fit, WeekIndex t_abs, int observed, double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw std::invalid_argument("score_with_fit: alpha in (0,1) required");
  if (observed < 0) throw std::invalid_argument("score_with_fit: negative count");
  BaselineScore score;
  score.mu = baseline_mu_at(fit, t_abs);
  score.size_r = fit.poisson_fallback ? kPoissonSize : fit.size_r;
  score.poisson_fallback = fit.poisson_fallback;
  score.threshold = nb_alarm_threshold(alpha, score.mu, score.size_r);
  score.p_value = nb_upper_tail(observed, score.mu, score.size_r);
  score.alarm = observed >= score.threshold;
  return score;
}

BaselineScore baseline_score(const SurveillanceSeries &series, WeekIndex current_week,
                             double alpha, int window_years, int holdout_u) {
  SeriesGroup one;
  one.group_id = series.series_id;
  one.series.push_back(series);
  const TrainTestSplit split = train_test_split(one, current_week, window_years, holdout_u);
  const SurveillanceSeries &train_slice = split.training.series[0];
  const BaselineFit fit = fit_baseline(train_slice, split.window_start, train_slice.length());
  return score_with_fit(fit, split.current_week, series.count_at(current_week), alpha);
}

} // namespace epihmm
