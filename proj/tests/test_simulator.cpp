#include <doctest.h>

#include <cmath>

#include "epihmm/errors.hpp"
#include "epihmm/nbglm.hpp"
#include "epihmm/rng.hpp"
#include "epihmm/simulator.hpp"

using namespace epihmm;

TEST_SUITE("simulator") {

TEST_CASE("the scenario table is frozen") {
  struct Row {
    int id;
    double beta0, beta1, beta2, beta3, phi;
  };
  const Row want[] = {
      {1, 0.1, 0.0, 0.6, 0.6, 1.5},     {2, 0.1, 0.0025, 0.6, 0.6, 1.5},
      {3, -2.0, 0.0, 0.1, 0.3, 2.0},    {4, -2.0, 0.005, 0.1, 0.3, 2.0},
      {5, 1.5, 0.0, 0.2, -0.4, 1.0},    {6, 1.5, 0.003, 0.2, -0.4, 1.0},
      {7, 0.5, 0.0, 0.5, 0.5, 5.0},     {8, 0.5, 0.002, 0.5, 0.5, 5.0},
      {9, 2.5, 0.0, 1.0, 0.1, 3.0},     {10, 2.5, 0.001, 1.0, 0.1, 3.0},
      {11, 3.75, 0.0, 0.1, -0.1, 1.1},  {12, 3.75, 0.001, 0.1, -0.1, 1.1},
      {13, 5.0, 0.0, 0.05, 0.01, 1.2},  {14, 5.0, 0.0001, 0.05, 0.01, 1.2},
  };
  REQUIRE(scenario_table().size() == 14);
  for (const Row &row : want) {
    const ScenarioSpec &s = scenario_spec(row.id);
    CHECK(s.id == row.id);
    CHECK(s.beta0 == row.beta0);
    CHECK(s.beta1 == row.beta1);
    CHECK(s.beta2 == row.beta2);
    CHECK(s.beta3 == row.beta3);
    CHECK(s.phi == row.phi);
    CHECK(s.length_T == 624);
  }
  CHECK_THROWS_AS(scenario_spec(0), UsageError);
  CHECK_THROWS_AS(scenario_spec(15), UsageError);
}

TEST_CASE("endemic mean evaluates the log-linear predictor") {
  // t=52: cos=1, sin=0 -> exp(0.1 + 0.6); t=26: cos=-1 -> exp(0.1 - 0.6)
  CHECK(endemic_mean(scenario_spec(1), 52) == doctest::Approx(std::exp(0.7)).epsilon(1e-12));
  CHECK(endemic_mean(scenario_spec(1), 26) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  // trend scenarios accumulate: scenario 2 at t=104 is exp(0.0025*104) above t=52... modulo phase
  CHECK(endemic_mean(scenario_spec(2), 104) ==
        doctest::Approx(std::exp(0.0025 * 104) / std::exp(0.0025 * 52) *
                        endemic_mean(scenario_spec(2), 52))
            .epsilon(1e-12));
}

TEST_CASE("variance inflation maps to the NB size") {
  CHECK(size_from_phi(10.0, 2.0) == doctest::Approx(10.0));
  CHECK(size_from_phi(6.0, 1.5) == doctest::Approx(12.0));
  CHECK(size_from_phi(10.0, 1.0) >= 1e10); // Poisson limit
}

TEST_CASE("the endemic alarm count is the alpha quantile") {
  for (int id : {1, 3, 7, 13}) {
    const ScenarioSpec &s = scenario_spec(id);
    const double mu = endemic_mean(s, 26);
    const long c = endemic_alarm_count(mu, s.phi, 0.01);
    CHECK(nb_upper_tail(c, mu, size_from_phi(mu, s.phi)) < 0.01);
    if (c > 0) CHECK(nb_upper_tail(c - 1, mu, size_from_phi(mu, s.phi)) >= 0.01);
  }
}

TEST_CASE("outbreak means are calibrated to even odds of alarm") {
  for (int id = 1; id <= 14; ++id) {
    const ScenarioSpec &s = scenario_spec(id);
    for (WeekIndex t : {1, 26, 52}) {
      const double mu = endemic_mean(s, t);
      const long c = endemic_alarm_count(mu, s.phi, 0.01);
      const double m = calibrate_outbreak_mean(mu, s.phi);
      CHECK(m > mu);
      CHECK(nb_upper_tail(c, m, size_from_phi(m, s.phi)) ==
            doctest::Approx(0.5).epsilon(2e-4));
    }
  }
}

TEST_CASE("series simulation is seeded and self-consistent") {
  const ScenarioSpec &spec = scenario_spec(9);
  const SimulatedSeries a = simulate_series(spec, 12345);
  const SimulatedSeries b = simulate_series(spec, 12345);
  const SimulatedSeries c = simulate_series(spec, 54321);
  CHECK(a.series.counts == b.series.counts);
  CHECK(a.series.labels == b.series.labels);
  CHECK(a.a00 == b.a00);
  CHECK(a.series.counts != c.series.counts);

  CHECK(a.series.length() == 624);
  CHECK(a.series.start_week == IsoWeek{2004, 1});
  CHECK(a.a00 >= 0.9);
  CHECK(a.a00 <= 1.0);
  CHECK(a.a11 >= 0.4);
  CHECK(a.a11 <= 0.6);
  CHECK(a.series.label_at(1) == Label::Endemic); // chains start endemic
  for (WeekIndex t = 1; t <= 624; ++t) {
    CHECK(is_known(a.series.label_at(t)));
    CHECK(a.endemic_mu[static_cast<size_t>(t - 1)] ==
          doctest::Approx(endemic_mean(spec, t)).epsilon(1e-12));
    CHECK(a.outbreak_mu[static_cast<size_t>(t - 1)] >
          a.endemic_mu[static_cast<size_t>(t - 1)]);
  }
}

TEST_CASE("endemic weeks track the endemic mean on average") {
  const ScenarioSpec &spec = scenario_spec(1);
  double got = 0.0, want = 0.0;
  long n = 0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const SimulatedSeries sim = simulate_series(spec, 1000 + seed);
    for (WeekIndex t = 1; t <= 624; ++t)
      if (sim.series.label_at(t) == Label::Endemic) {
        got += sim.series.count_at(t);
        want += sim.endemic_mu[static_cast<size_t>(t - 1)];
        ++n;
      }
  }
  REQUIRE(n > 5000);
  CHECK(got / static_cast<double>(n) ==
        doctest::Approx(want / static_cast<double>(n)).epsilon(0.05));
}

TEST_CASE("scenario batches derive per-series seeds and ids") {
  const ScenarioBatch batch = simulate_scenario(scenario_spec(3), 3, 42, IsoWeek{2004, 1}, "s03");
  REQUIRE(batch.series.size() == 3);
  for (int i = 0; i < 3; ++i)
    CHECK(batch.series[static_cast<size_t>(i)].seed ==
          derive_seed(42, static_cast<uint64_t>(i)));
  const SeriesGroup g = batch.as_group("s03");
  CHECK(g.group_id == "s03");
  CHECK(g.series[0].series_id == "s03_r000");
  CHECK(g.series[2].series_id == "s03_r002");
  CHECK(g.series[0].counts == batch.series[0].series.counts);
  // a lone series equals the batch member with the same sub-seed
  const SimulatedSeries solo = simulate_series(scenario_spec(3), derive_seed(42, 1));
  CHECK(solo.series.counts == batch.series[1].series.counts);
}

} // TEST_SUITE
