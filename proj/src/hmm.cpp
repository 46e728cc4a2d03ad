#include "epihmm/hmm.hpp"

#include <cmath>
#include <limits>

#include "epihmm/errors.hpp"

namespace epihmm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_or_neg_inf(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

double log_sum_exp2(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

} // namespace

TransitionEstimate estimate_transitions(const SeriesGroup &group, double pseudocount) {
  if (group.series.empty()) throw DataError("estimate_transitions: empty group");
  if (pseudocount < 0.0)
    throw std::invalid_argument("estimate_transitions: pseudocount must be >= 0");

  TransitionEstimate est;
  for (const auto &s : group.series) {
    if (s.length() >= 1 && is_known(s.label_at(1)))
      ++est.start_counts[static_cast<size_t>(s.label_at(1))];
    for (WeekIndex t = 1; t + 1 <= s.length(); ++t) {
      const Label from = s.label_at(t);
      const Label to = s.label_at(t + 1);
      if (!is_known(from) || !is_known(to)) continue;
      ++est.pair_counts[static_cast<size_t>(from)][static_cast<size_t>(to)];
    }
  }

  const double n_starts = static_cast<double>(est.start_counts[0] + est.start_counts[1]);
  if (n_starts + pseudocount > 0.0) {
    for (int i = 0; i < 2; ++i)
      est.pi[static_cast<size_t>(i)] =
          (static_cast<double>(est.start_counts[static_cast<size_t>(i)]) + pseudocount) /
          (n_starts + 2.0 * pseudocount);
  }
  for (int i = 0; i < 2; ++i) {
    const double departures = static_cast<double>(est.pair_counts[static_cast<size_t>(i)][0] +
                                                  est.pair_counts[static_cast<size_t>(i)][1]);
    if (departures + pseudocount <= 0.0) continue; // keep the uniform default
    for (int j = 0; j < 2; ++j)
      est.trans[static_cast<size_t>(i)][static_cast<size_t>(j)] =
          (static_cast<double>(est.pair_counts[static_cast<size_t>(i)][static_cast<size_t>(j)]) +
           pseudocount) /
          (departures + 2.0 * pseudocount);
  }
  return est;
}

HmmModel train_hmm(const SeriesGroup &training, WeekIndex window_start,
                   const TrainOptions &options) {
  training.validate();
  if (training.outbreak_label_count() < 1)
    throw TrainingError("train_hmm: group '" + training.group_id +
                        "' has no labeled outbreak week in the training window");

  HmmModel model;
  const TransitionEstimate est = estimate_transitions(training, options.pseudocount);
  model.pi = est.pi;
  model.trans = est.trans;

  const PooledDesign design = build_pooled_design(training, window_start);
  model.glm = irls_fit(design, options.irls);
  if (!model.glm.converged)
    throw TrainingError("train_hmm: emission regression did not converge for group '" +
                        training.group_id + "'");
  return model;
}

double log_emission(const HmmModel &model, int series_index, WeekIndex t_abs, int state,
                    int count) {
  const CovariateRow z = covariate_at(t_abs);
  const double mu = predict_mu(model.glm, series_index, z, state);
  const double r = model.glm.size_r[static_cast<size_t>(series_index)];
  return std::max(nb_log_pmf(count, mu, r), kEmissionFloor);
}

PosteriorResult forward_posterior(const HmmModel &model, const SurveillanceSeries &series,
                                  int series_index, WeekIndex window_start, WeekIndex upto_week,
                                  bool clamp_labels, bool capture_filtered) {
  if (upto_week < 1 || upto_week > series.length())
    throw std::invalid_argument("forward_posterior: upto_week outside the series");

  PosteriorResult result;
  if (capture_filtered) result.filtered.reserve(static_cast<size_t>(upto_week));

  const std::array<std::array<double, 2>, 2> log_a = {
      {{log_or_neg_inf(model.trans[0][0]), log_or_neg_inf(model.trans[0][1])},
       {log_or_neg_inf(model.trans[1][0]), log_or_neg_inf(model.trans[1][1])}}};

  std::array<double, 2> alpha{kNegInf, kNegInf};
  for (WeekIndex t = 1; t <= upto_week; ++t) {
    const Label label = series.label_at(t);
    const int count = series.count_at(t);
    const WeekIndex t_abs = window_start + t - 1;
    std::array<double, 2> emit{};
    for (int i = 0; i < 2; ++i) {
      if (clamp_labels && is_known(label) && static_cast<int>(label) != i)
        emit[static_cast<size_t>(i)] = kNegInf;
      else
        emit[static_cast<size_t>(i)] = log_emission(model, series_index, t_abs, i, count);
    }

    std::array<double, 2> next{};
    if (t == 1) {
      for (int i = 0; i < 2; ++i)
        next[static_cast<size_t>(i)] =
            log_or_neg_inf(model.pi[static_cast<size_t>(i)]) + emit[static_cast<size_t>(i)];
    } else {
      for (int j = 0; j < 2; ++j)
        next[static_cast<size_t>(j)] =
            log_sum_exp2(alpha[0] + log_a[0][static_cast<size_t>(j)],
                         alpha[1] + log_a[1][static_cast<size_t>(j)]) +
            emit[static_cast<size_t>(j)];
    }
    alpha = next;

    const double total = log_sum_exp2(alpha[0], alpha[1]);
    if (total == kNegInf)
      throw NumericError("forward_posterior: zero likelihood at week " + std::to_string(t) +
                         " (labels impossible under the model)");
    if (capture_filtered) result.filtered.push_back(std::exp(alpha[1] - total));
    if (t == upto_week) {
      result.log_likelihood = total;
      result.p_outbreak = std::exp(alpha[1] - total);
    }
  }
  return result;
}

} // namespace epihmm
