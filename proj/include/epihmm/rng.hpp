#ifndef EPIHMM_RNG_HPP
#define EPIHMM_RNG_HPP

#include <cstdint>
#include <random>

namespace epihmm {

/// splitmix64 finalizer. Seed derivation for parallel work items:
/// derive_seed(master, i) = mix64(master + (i+1) * 0x9E3779B97F4A7C15),
/// i.e. the i-th output of a splitmix64 stream seeded with `master`.
std::uint64_t mix64(std::uint64_t z);

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Seedable portable sampler: std::mt19937_64 engine (whose stream the
/// standard pins down) plus hand-rolled distributions, because the std::
/// distribution objects are implementation-defined and would not reproduce
/// byte-identical output across standard libraries.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Standard normal via Box-Muller (one value per uniform pair).
  double normal();

  /// Gamma(shape, scale), Marsaglia-Tsang; shape boosting for shape < 1.
  double gamma(double shape, double scale);

  /// Poisson by CDF inversion; exact and portable. Means above 700 are
  /// split recursively so the p0 term cannot underflow.
  long poisson(double mean);

  /// Negative binomial with the given mean and size r (variance mu + mu^2/r),
  /// sampled as Poisson(Gamma(r, mu/r)).
  long nb_mean_size(double mean, double size_r);

  /// Negative binomial with mean mu and variance phi*mu; phi == 1 is Poisson.
  long nb_mean_phi(double mean, double phi);

private:
  std::mt19937_64 engine_;
};

} // namespace epihmm

#endif
