#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "epihmm/baseline.hpp"
#include "epihmm/errors.hpp"
#include "epihmm/nbglm.hpp"
#include "epihmm/rng.hpp"
#include "testutil.hpp"

using namespace epihmm;

namespace {

SurveillanceSeries seasonal_series(uint64_t seed, int T, double r,
                                    std::vector<int> *spike_weeks = nullptr) {
  Rng rng(seed);
  std::vector<int> counts, labels;
  for (int t = 1; t <= T; ++t) {
    const CovariateRow z = covariate_at(t);
    const double mu = std::exp(2.0 + 0.001 * z.trend + 0.4 * z.cos_term - 0.3 * z.sin_term);
    counts.push_back(static_cast<int>(rng.nb_mean_size(mu, r)));
    labels.push_back(0);
  }
  if (spike_weeks)
    for (int t : *spike_weeks) {
      counts[static_cast<size_t>(t - 1)] = 900;
      labels[static_cast<size_t>(t - 1)] = 1;
    }
  return testutil::make_series("a", counts, labels);
}

} // namespace

TEST_SUITE("baseline") {

TEST_CASE("the score is the NB tail under the fitted seasonal model") {
  const SurveillanceSeries s = seasonal_series(5, 312, 8.0);
  const BaselineScore score = baseline_score(s, 312, 0.01, 5, 26);
  CHECK_FALSE(score.poisson_fallback);
  // the pieces must be mutually consistent
  CHECK(score.p_value == nb_upper_tail(s.count_at(312), score.mu, score.size_r));
  CHECK(score.threshold == nb_alarm_threshold(0.01, score.mu, score.size_r));
  CHECK(score.alarm == (s.count_at(312) >= score.threshold));
  // and the fitted mean should sit near the generating one
  const CovariateRow z = covariate_at(312);
  const double truth = std::exp(2.0 + 0.001 * z.trend + 0.4 * z.cos_term - 0.3 * z.sin_term);
  CHECK(score.mu == doctest::Approx(truth).epsilon(0.30));
}

TEST_CASE("outbreak-labeled weeks are left out of the fit") {
  // spikes inside the training window, labeled: the fit should shrug them off
  std::vector<int> spikes{30, 31, 32, 80, 81, 82, 130, 131, 132, 180, 181, 182};
  const SurveillanceSeries labeled = seasonal_series(5, 312, 8.0, &spikes);
  SurveillanceSeries unlabeled = labeled;
  for (int t : spikes) unlabeled.labels[static_cast<size_t>(t - 1)] = Label::Endemic;

  const BaselineScore clean = baseline_score(seasonal_series(5, 312, 8.0), 312);
  const BaselineScore dropped = baseline_score(labeled, 312);
  const BaselineScore polluted = baseline_score(unlabeled, 312);
  CHECK(dropped.mu == doctest::Approx(clean.mu).epsilon(0.10));
  CHECK(dropped.size_r == doctest::Approx(clean.size_r).epsilon(0.25));
  // keeping the spikes wrecks the fit: dispersion explodes (size collapses)
  // and the level shifts well away from the clean one
  CHECK(polluted.size_r < dropped.size_r * 0.25);
  CHECK(std::abs(polluted.mu - dropped.mu) > 0.3 * dropped.mu);
}

TEST_CASE("the holdout shields the fit from recent weeks") {
  const SurveillanceSeries clean = seasonal_series(9, 312, 8.0);
  SurveillanceSeries poisoned = clean;
  // corrupt only the final 25 weeks before the current one
  for (int t = 288; t <= 311; ++t) poisoned.counts[static_cast<size_t>(t - 1)] = 5000;
  const BaselineScore a = baseline_score(clean, 312, 0.01, 5, 26);
  const BaselineScore b = baseline_score(poisoned, 312, 0.01, 5, 26);
  CHECK(a.mu == b.mu); // identical training rows, identical fit
  CHECK(a.size_r == b.size_r);
}

TEST_CASE("degenerate windows fall back to a small-mean rule") {
  const SurveillanceSeries zeros =
      testutil::make_series("z", std::vector<int>(312, 0), std::vector<int>(312, 0));
  const BaselineScore score = baseline_score(zeros, 312);
  CHECK(score.poisson_fallback);
  // Poisson(1e-3): P(X >= 1) ~ 1e-3 < alpha, so any case at all alarms
  CHECK(score.threshold == 1);
  CHECK_FALSE(score.alarm);
  CHECK(score.p_value == 1.0); // P(X >= 0)

  SurveillanceSeries one_case = zeros;
  one_case.counts[311] = 1;
  CHECK(baseline_score(one_case, 312).alarm);
}

TEST_CASE("window arithmetic and argument checks") {
  const SurveillanceSeries s = seasonal_series(3, 312, 8.0);
  // needs 5*52+26 = 286 weeks of history
  CHECK_THROWS_AS(static_cast<void>(baseline_score(s, 285)), DataError);
  CHECK_NOTHROW(static_cast<void>(baseline_score(s, 286)));
  CHECK_THROWS_AS(static_cast<void>(baseline_score(s, 312, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(static_cast<void>(baseline_score(s, 312, 1.0)), std::invalid_argument);

  const BaselineFit fit = fit_baseline(slice_series(s, 1, 260, 261), 1, 260);
  CHECK_THROWS_AS(static_cast<void>(score_with_fit(fit, 261, -1, 0.01)),
                  std::invalid_argument);
}

} // TEST_SUITE
