#pragma once

#include <array>
#include <vector>

#include "epihmm/nbglm.hpp"
#include "epihmm/timeseries.hpp"

namespace epihmm {

struct TransitionEstimate {
  std::array<double, 2> pi{0.5, 0.5};
  std::array<std::array<double, 2>, 2> trans{{{0.5, 0.5}, {0.5, 0.5}}};
  std::array<long, 2> start_counts{0, 0};
  std::array<std::array<long, 2>, 2> pair_counts{{{{0, 0}}, {{0, 0}}}};
};

/// Closed-form supervised MLE by counting, pooled over the group's series:
/// a_ij = (n_ij + pc) / (n_i + 2 pc), pi_i = (starts_i + pc) / (starts + 2 pc).
/// Week pairs with an unknown label on either side are skipped; a row whose
/// denominator is zero stays uniform.
TransitionEstimate estimate_transitions(const SeriesGroup &group, double pseudocount = 0.0);

struct HmmModel {
  std::array<double, 2> pi{};
  std::array<std::array<double, 2>, 2> trans{};
  GlmFit glm;
};

struct TrainOptions {
  IrlsOptions irls{};
  double pseudocount = 0.0;
};

/// Supervised training over a labeled window. The labeled-path likelihood
/// factorizes, so transitions come from counting and emissions from the
/// pooled regression independently. Requires at least one outbreak label in
/// the group; throws TrainingError otherwise or when the fit fails.
HmmModel train_hmm(const SeriesGroup &training, WeekIndex window_start,
                   const TrainOptions &options = {});

// Log emissions below this are floored so a single extreme count cannot
// zero out the whole forward pass.
constexpr double kEmissionFloor = -700.0;

double log_emission(const HmmModel &model, int series_index, WeekIndex t_abs, int state,
                    int count);

struct PosteriorResult {
  double log_likelihood = 0.0;
  double p_outbreak = 0.0;      // filtered P(state = 1 | counts up to upto_week)
  std::vector<double> filtered; // same quantity per week when captured
};

/// Log-space forward pass over local weeks 1..upto_week; the absolute
/// covariate week of local t is window_start + t - 1. Weeks with a known
/// label are clamped to that state (the other state's emission is -inf)
/// unless clamp_labels is off; unknown weeks are marginalized.
PosteriorResult forward_posterior(const HmmModel &model, const SurveillanceSeries &series,
                                  int series_index, WeekIndex window_start, WeekIndex upto_week,
                                  bool clamp_labels = true, bool capture_filtered = false);

} // namespace epihmm
