#include "epihmm/simulator.hpp"

#include <cmath>
#include <cstdio>

#include "epihmm/errors.hpp"
#include "epihmm/nbglm.hpp"
#include "epihmm/rng.hpp"

namespace epihmm {

namespace {

constexpr double kPoissonSize = 1e12; // beyond the nb_* Poisson-limit cutoff

std::vector<double> outbreak_mean_table(const ScenarioSpec &spec,
                                        const std::vector<double> &endemic) {
  std::vector<double> out(endemic.size());
  for (size_t i = 0; i < endemic.size(); ++i)
    out[i] = calibrate_outbreak_mean(endemic[i], spec.phi);
  return out;
}

std::vector<double> endemic_mean_table(const ScenarioSpec &spec) {
  std::vector<double> mu(static_cast<size_t>(spec.length_T));
  for (int t = 1; t <= spec.length_T; ++t)
    mu[static_cast<size_t>(t - 1)] = endemic_mean(spec, t);
  return mu;
}

SimulatedSeries simulate_with_tables(const ScenarioSpec &spec, uint64_t seed, IsoWeek start_week,
                                     const std::string &series_id,
                                     const std::vector<double> &endemic,
                                     const std::vector<double> &outbreak) {
  SimulatedSeries sim;
  sim.seed = seed;
  sim.endemic_mu = endemic;
  sim.outbreak_mu = outbreak;
  sim.series.series_id = series_id;
  sim.series.start_week = start_week;
  sim.series.counts.reserve(static_cast<size_t>(spec.length_T));
  sim.series.labels.reserve(static_cast<size_t>(spec.length_T));

  Rng rng(seed);
  sim.a00 = rng.uniform(0.9, 1.0);
  sim.a11 = rng.uniform(0.4, 0.6);

  int state = 0; // the chain starts endemic
  for (int t = 1; t <= spec.length_T; ++t) {
    if (t > 1) {
      const double stay = state == 0 ? sim.a00 : sim.a11;
      if (!rng.bernoulli(stay)) state = 1 - state;
    }
    const double mu = state == 0 ? endemic[static_cast<size_t>(t - 1)]
                                 : outbreak[static_cast<size_t>(t - 1)];
    sim.series.counts.push_back(static_cast<int>(rng.nb_mean_phi(mu, spec.phi)));
    sim.series.labels.push_back(state == 0 ? Label::Endemic : Label::Outbreak);
  }
  return sim;
}

} // namespace

const std::array<ScenarioSpec, 14> &scenario_table() {
  static const std::array<ScenarioSpec, 14> table = {{
      {1, 0.1, 0.0, 0.6, 0.6, 1.5, 624},
      {2, 0.1, 0.0025, 0.6, 0.6, 1.5, 624},
      {3, -2.0, 0.0, 0.1, 0.3, 2.0, 624},
      {4, -2.0, 0.005, 0.1, 0.3, 2.0, 624},
      {5, 1.5, 0.0, 0.2, -0.4, 1.0, 624},
      {6, 1.5, 0.003, 0.2, -0.4, 1.0, 624},
      {7, 0.5, 0.0, 0.5, 0.5, 5.0, 624},
      {8, 0.5, 0.002, 0.5, 0.5, 5.0, 624},
      {9, 2.5, 0.0, 1.0, 0.1, 3.0, 624},
      {10, 2.5, 0.001, 1.0, 0.1, 3.0, 624},
      {11, 3.75, 0.0, 0.1, -0.1, 1.1, 624},
      {12, 3.75, 0.001, 0.1, -0.1, 1.1, 624},
      {13, 5.0, 0.0, 0.05, 0.01, 1.2, 624},
      {14, 5.0, 0.0001, 0.05, 0.01, 1.2, 624},
  }};
  return table;
}

const ScenarioSpec &scenario_spec(int id) {
  if (id < 1 || id > 14)
    throw UsageError("scenario id must be in 1..14, got " + std::to_string(id));
  return scenario_table()[static_cast<size_t>(id - 1)];
}

double endemic_mean(const ScenarioSpec &spec, WeekIndex t) {
  const CovariateRow z = covariate_at(t);
  return std::exp(spec.beta0 + spec.beta1 * z.trend + spec.beta2 * z.cos_term +
                  spec.beta3 * z.sin_term);
}

double size_from_phi(double mu, double phi) {
  if (!(mu > 0.0) || !(phi >= 1.0))
    throw std::invalid_argument("size_from_phi: mu > 0 and phi >= 1 required");
  if (phi == 1.0) return kPoissonSize;
  return mu / (phi - 1.0);
}

long endemic_alarm_count(double endemic_mu, double phi, double alpha) {
  return nb_alarm_threshold(alpha, endemic_mu, size_from_phi(endemic_mu, phi));
}

double calibrate_outbreak_mean(double endemic_mu, double phi, double target_power, double alpha) {
  if (!(endemic_mu > 0.0) || !(phi >= 1.0) || !(alpha > 0.0) || !(target_power < 1.0) ||
      !(alpha < target_power))
    throw std::invalid_argument(
        "calibrate_outbreak_mean: need endemic_mu > 0, phi >= 1, 0 < alpha < target_power < 1");
  const long c = endemic_alarm_count(endemic_mu, phi, alpha);
  auto power_at = [&](double mu) { return nb_upper_tail(c, mu, size_from_phi(mu, phi)); };

  double lo = endemic_mu;
  double hi = 1e4 * endemic_mu;
  if (power_at(lo) > target_power || power_at(hi) < target_power)
    throw NumericError("calibrate_outbreak_mean: power target not bracketed on [mu, 1e4 mu]" +
                       std::string(" (endemic_mu = ") + std::to_string(endemic_mu) +
                       ", phi = " + std::to_string(phi) + ")");
  for (int iter = 0; iter < 200 && (hi - lo) > 1e-6 * lo; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (power_at(mid) < target_power)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

SimulatedSeries simulate_series(const ScenarioSpec &spec, uint64_t seed, IsoWeek start_week,
                                const std::string &series_id) {
  const std::vector<double> endemic = endemic_mean_table(spec);
  const std::vector<double> outbreak = outbreak_mean_table(spec, endemic);
  return simulate_with_tables(spec, seed, start_week, series_id, endemic, outbreak);
}

SeriesGroup ScenarioBatch::as_group(const std::string &group_id) const {
  SeriesGroup group;
  group.group_id = group_id;
  group.series.reserve(series.size());
  for (const auto &sim : series) group.series.push_back(sim.series);
  group.validate();
  return group;
}

ScenarioBatch simulate_scenario(const ScenarioSpec &spec, int n_series, uint64_t master_seed,
                                IsoWeek start_week, const std::string &id_prefix) {
  if (n_series < 1) throw UsageError("simulate_scenario: n_series must be >= 1");
  const std::vector<double> endemic = endemic_mean_table(spec);
  const std::vector<double> outbreak = outbreak_mean_table(spec, endemic);

  ScenarioBatch batch;
  batch.series.reserve(static_cast<size_t>(n_series));
  for (int i = 0; i < n_series; ++i) {
    char suffix[16];
    std::snprintf(suffix, sizeof(suffix), "_r%03d", i);
    batch.series.push_back(simulate_with_tables(spec, derive_seed(master_seed, i), start_week,
                                                id_prefix + suffix, endemic, outbreak));
  }
  return batch;
}

} // namespace epihmm
