#include "epihmm/rng.hpp"

#include <cmath>
#include <numbers>

#include "epihmm/errors.hpp"

namespace epihmm {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(master + index * 0x9E3779B97F4A7C15ULL);
}

double Rng::normal() {
  // u1 in (0,1] so the log is finite.
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::gamma(double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0))
    throw NumericError("gamma sampler requires positive shape and scale");
  if (shape < 1.0) {
    const double u = 1.0 - uniform01();
    return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = 1.0 - uniform01();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
  }
}

long Rng::poisson(double mean) {
  if (mean < 0.0) throw NumericError("poisson sampler requires a non-negative mean");
  if (mean == 0.0) return 0;
  if (mean > 700.0) {
    // Poisson(a+b) = Poisson(a) + Poisson(b); keeps exp(-mean) representable.
    const double half = mean / 2.0;
    return poisson(half) + poisson(mean - half);
  }
  const double u = uniform01();
  double p = std::exp(-mean);
  double cdf = p;
  long k = 0;
  // Bound is ~60 sd above the mean; unreachable in practice.
  const long cap = static_cast<long>(mean + 60.0 * std::sqrt(mean) + 100.0);
  while (u >= cdf && k < cap) {
    ++k;
    p *= mean / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

long Rng::nb_mean_size(double mean, double size_r) {
  if (!(mean >= 0.0) || !(size_r > 0.0))
    throw NumericError("negative binomial sampler requires mean >= 0 and size > 0");
  if (mean == 0.0) return 0;
  return poisson(gamma(size_r, mean / size_r));
}

long Rng::nb_mean_phi(double mean, double phi) {
  if (!(phi >= 1.0)) throw NumericError("dispersion phi must be >= 1");
  if (phi == 1.0) return poisson(mean);
  return nb_mean_size(mean, mean / (phi - 1.0));
}

} // namespace epihmm
