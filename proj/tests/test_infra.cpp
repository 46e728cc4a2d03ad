#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "epihmm/parallel.hpp"
#include "epihmm/rng.hpp"

using namespace epihmm;

TEST_SUITE("infra") {

TEST_CASE("seed derivation matches the splitmix64 stream") {
  // mix64 is one full splitmix64 step, increment included
  CHECK(mix64(0) == 0xE220A8397B1DCDAFULL);
  // canonical splitmix64 outputs for master seed 0
  CHECK(derive_seed(0, 0) == 0xE220A8397B1DCDAFull);
  CHECK(derive_seed(0, 1) == 0x6E789E6AA1B965F4ull);
  CHECK(derive_seed(0, 2) == 0x06C45D188009454Full);
  CHECK(derive_seed(42, 0) != derive_seed(42, 1));
  CHECK(derive_seed(42, 0) != derive_seed(43, 0));
}

TEST_CASE("uniforms live in [0,1) and reproduce") {
  Rng a(7), b(7);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(u == b.uniform01());
  }
  CHECK(Rng(7).uniform(2.0, 5.0) >= 2.0);
  CHECK(Rng(7).uniform(2.0, 5.0) < 5.0);
}

TEST_CASE("samplers hit their moments") {
  Rng rng(123);
  const int n = 20000;

  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sq += x * x;
  }
  CHECK(sum / n == doctest::Approx(0.0).epsilon(0.05));
  CHECK(sq / n == doctest::Approx(1.0).epsilon(0.05));

  sum = 0.0;
  for (int i = 0; i < n; ++i) sum += static_cast<double>(rng.poisson(4.2));
  CHECK(sum / n == doctest::Approx(4.2).epsilon(0.03));

  // large means split recursively instead of underflowing
  sum = 0.0;
  for (int i = 0; i < 2000; ++i) sum += static_cast<double>(rng.poisson(900.0));
  CHECK(sum / 2000 == doctest::Approx(900.0).epsilon(0.01));

  sum = 0.0;
  for (int i = 0; i < n; ++i) sum += rng.gamma(3.0, 2.0);
  CHECK(sum / n == doctest::Approx(6.0).epsilon(0.03));

  // nb with variance phi*mu: check both moments
  sum = 0.0;
  sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = static_cast<double>(rng.nb_mean_phi(10.0, 3.0));
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  CHECK(mean == doctest::Approx(10.0).epsilon(0.03));
  CHECK(sq / n - mean * mean == doctest::Approx(30.0).epsilon(0.12));

  // phi = 1 degenerates to Poisson
  sum = 0.0;
  sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = static_cast<double>(rng.nb_mean_phi(10.0, 1.0));
    sum += x;
    sq += x * x;
  }
  CHECK(sq / n - (sum / n) * (sum / n) == doctest::Approx(10.0).epsilon(0.12));
}

TEST_CASE("parallel_for touches every index exactly once") {
  for (int workers : {1, 4}) {
    const int n = 500;
    std::vector<std::atomic<int>> hits(n);
    parallel_for(n, workers, [&](int i) { hits[static_cast<size_t>(i)] += 1; });
    for (int i = 0; i < n; ++i) CHECK(hits[static_cast<size_t>(i)] == 1);
  }
  parallel_for(0, 4, [&](int) { FAIL("no work expected"); });
}

TEST_CASE("exceptions cross the thread boundary") {
  CHECK_THROWS_WITH_AS(parallel_for(100, 4,
                                    [&](int i) {
                                      if (i == 37) throw std::runtime_error("boom at 37");
                                    }),
                       "boom at 37", std::runtime_error);
}

TEST_CASE("worker count resolution order") {
  CHECK(worker_count(3) == 3);
  ::setenv("EPIHMM_WORKERS", "2", 1);
  CHECK(worker_count(0) == 2);
  CHECK(worker_count(5) == 5); // explicit beats the environment
  ::unsetenv("EPIHMM_WORKERS");
  CHECK(worker_count(0) >= 1);
}

} // TEST_SUITE
