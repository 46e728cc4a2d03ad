#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "epihmm/timeseries.hpp"

namespace epihmm {

struct ScenarioSpec {
  int id = 0;
  double beta0 = 0.0;
  double beta1 = 0.0; // trend per week
  double beta2 = 0.0; // cos amplitude
  double beta3 = 0.0; // sin amplitude
  double phi = 1.0;   // count variance is phi * mean
  int length_T = 624;
};

const std::array<ScenarioSpec, 14> &scenario_table();

/// Lookup by 1-based id; UsageError outside 1..14.
const ScenarioSpec &scenario_spec(int id);

/// exp(beta0 + beta1 t + beta2 cos(2 pi t / 52) + beta3 sin(2 pi t / 52)).
double endemic_mean(const ScenarioSpec &spec, WeekIndex t);

/// NB size for variance phi * mu; phi = 1 maps to the Poisson limit.
double size_from_phi(double mu, double phi);

/// Smallest count whose upper tail under NB(mean mu, variance phi mu) is
/// below alpha; the alarm count the outbreak magnitude is calibrated against.
long endemic_alarm_count(double endemic_mu, double phi, double alpha = 0.01);

/// Outbreak mean m with P(X >= c) = target_power for X ~ NB(mean m,
/// variance phi m), c the endemic alarm count; monotone bisection on
/// [endemic_mu, 1e4 endemic_mu] to 1e-6 relative width.
double calibrate_outbreak_mean(double endemic_mu, double phi, double target_power = 0.5,
                               double alpha = 0.01);

struct SimulatedSeries {
  SurveillanceSeries series; // labels hold the true states
  uint64_t seed = 0;
  double a00 = 0.0;
  double a11 = 0.0;
  std::vector<double> endemic_mu;  // per week
  std::vector<double> outbreak_mu; // per week, calibrated
};

/// One series under the scenario. Draw order per seed: a00, a11, then per
/// week the state transition (weeks 2..T) followed by the count.
SimulatedSeries simulate_series(const ScenarioSpec &spec, uint64_t seed,
                                IsoWeek start_week = IsoWeek{2004, 1},
                                const std::string &series_id = "sim");

struct ScenarioBatch {
  std::vector<SimulatedSeries> series;
  SeriesGroup as_group(const std::string &group_id) const;
};

/// n_series independent series with sub-seeds derive_seed(master_seed, i)
/// and ids <prefix>_r<i, 3 digits>; the outbreak calibration table is
/// computed once and shared.
ScenarioBatch simulate_scenario(const ScenarioSpec &spec, int n_series, uint64_t master_seed,
                                IsoWeek start_week = IsoWeek{2004, 1},
                                const std::string &id_prefix = "sim");

} // namespace epihmm
