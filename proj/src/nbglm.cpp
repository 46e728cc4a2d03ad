#include "epihmm/nbglm.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "epihmm/errors.hpp"

namespace epihmm {

namespace {

constexpr double kPoissonSizeLimit = 1e10; // sizes beyond this are the Poisson limit
constexpr double kSizeLo = 1e-3;
constexpr double kSizeHi = 1e6;
constexpr double kBeta4Cap = 6.907755278982137; // log(1000)
constexpr double kAllZeroIntercept = -6.907755278982137; // log(1e-3)
constexpr double kAllZeroSize = 1e3;
constexpr double kLogUnderflow = -745.0;

double log_gamma(double x) { return std::lgamma(x); }

/// log Gamma(k+r) - log Gamma(r). Summation for small k; for large r the
/// lgamma difference cancels badly, so use Gamma(k+r)/Gamma(r) = r^k
/// prod_j (1 + j/r) instead.
double log_gamma_ratio(long k, double r) {
  if (k < 64) {
    double s = 0.0;
    for (long j = 0; j < k; ++j) s += std::log(r + static_cast<double>(j));
    return s;
  }
  if (r > 1e6) {
    double s = 0.0;
    for (long j = 0; j < k; ++j) s += std::log1p(static_cast<double>(j) / r);
    return static_cast<double>(k) * std::log(r) + s;
  }
  return log_gamma(static_cast<double>(k) + r) - log_gamma(r);
}

/// log of pmf(j+1)/pmf(j).
double nb_log_step(long j, double mu, double r) {
  const double jd = static_cast<double>(j);
  return std::log(((jd + r) * mu) / ((jd + 1.0) * (mu + r)));
}

double poisson_log_step(long j, double mu) {
  return std::log(mu / (static_cast<double>(j) + 1.0));
}

// Sum_{j=0}^{y-1} 1/(r+j), i.e. digamma(r+y) - digamma(r) for integer y.
double digamma_diff(long y, double r) {
  const long exact = std::min<long>(y, 4096);
  double s = 0.0;
  for (long j = 0; j < exact; ++j) s += 1.0 / (r + static_cast<double>(j));
  if (y > exact)
    s += std::log((r + static_cast<double>(y) - 0.5) /
                  (r + static_cast<double>(exact) - 0.5));
  return s;
}

// Sum_{j=0}^{y-1} 1/(r+j)^2, i.e. trigamma(r) - trigamma(r+y) for integer y.
double trigamma_diff(long y, double r) {
  const long exact = std::min<long>(y, 4096);
  double s = 0.0;
  for (long j = 0; j < exact; ++j) {
    const double d = r + static_cast<double>(j);
    s += 1.0 / (d * d);
  }
  if (y > exact)
    s += 1.0 / (r + static_cast<double>(exact) - 0.5) -
         1.0 / (r + static_cast<double>(y) - 0.5);
  return s;
}

} // namespace

double poisson_log_pmf(long k, double mu) {
  if (k < 0 || !(mu > 0.0)) throw std::invalid_argument("poisson_log_pmf: k >= 0, mu > 0 required");
  return static_cast<double>(k) * std::log(mu) - mu - log_gamma(static_cast<double>(k) + 1.0);
}

double nb_log_pmf(long k, double mu, double r) {
  if (k < 0 || !(mu > 0.0) || !(r > 0.0))
    throw std::invalid_argument("nb_log_pmf: k >= 0, mu > 0, r > 0 required");
  if (r >= kPoissonSizeLimit) return poisson_log_pmf(k, mu);
  return log_gamma_ratio(k, r) - log_gamma(static_cast<double>(k) + 1.0) -
         r * std::log1p(mu / r) +
         static_cast<double>(k) * (std::log(mu) - std::log(r + mu));
}

double nb_upper_tail(long k, double mu, double r) {
  if (!(mu > 0.0) || !(r > 0.0))
    throw std::invalid_argument("nb_upper_tail: mu > 0, r > 0 required");
  if (k <= 0) return 1.0;
  const bool poisson = r >= kPoissonSizeLimit;
  auto log_p0 = [&]() { return poisson ? -mu : -r * std::log1p(mu / r); };
  auto step = [&](long j) { return poisson ? poisson_log_step(j, mu) : nb_log_step(j, mu, r); };

  if (static_cast<double>(k) <= mu) {
    // Below the bulk the complement is well-conditioned.
    double lp = log_p0();
    double cdf = 0.0;
    for (long j = 0; j < k; ++j) {
      if (lp > kLogUnderflow) cdf += std::exp(lp);
      lp += step(j);
    }
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }

  // Above the bulk terms decrease; summing upward keeps small tails accurate.
  double lp = poisson ? poisson_log_pmf(k, mu) : nb_log_pmf(k, mu, r);
  if (lp < kLogUnderflow) return 0.0;
  double total = 0.0;
  long j = k;
  const long cap = k + 20000000;
  while (j < cap) {
    const double term = std::exp(lp);
    total += term;
    if (term <= total * 1e-17 + 1e-320) break;
    lp += step(j);
    ++j;
  }
  if (j >= cap) throw NumericError("nb_upper_tail: tail summation did not converge");
  return std::min(total, 1.0);
}

long nb_alarm_threshold(double alpha, double mu, double r) {
  if (!(alpha > 0.0) || !(alpha < 1.0) || !(mu > 0.0) || !(r > 0.0))
    throw std::invalid_argument("nb_alarm_threshold: alpha in (0,1), mu > 0, r > 0 required");
  const bool poisson = r >= kPoissonSizeLimit;
  const double var = poisson ? mu : mu + mu * mu / r;
  const long cap = static_cast<long>(mu + 50.0 * std::sqrt(var) + 1000.0);
  double lp = poisson ? -mu : -r * std::log1p(mu / r);
  double cdf = 0.0;
  for (long k = 0; k <= cap; ++k) {
    if (1.0 - cdf < alpha) return k;
    if (lp > kLogUnderflow) cdf += std::exp(lp);
    lp += poisson ? poisson_log_step(k, mu) : nb_log_step(k, mu, r);
  }
  throw NumericError("nb_alarm_threshold: no quantile below the scan cap (alpha too small?)");
}

// ---------------------------------------------------------------------------
// Pooled design
// ---------------------------------------------------------------------------

void PooledDesign::validate() const {
  if (n_series < 1) throw DataError("pooled design: no series");
  if (static_cast<int>(rows.size()) < n_cols())
    throw DataError("pooled design: " + std::to_string(rows.size()) + " rows for " +
                    std::to_string(n_cols()) + " columns");
  for (const auto &row : rows) {
    if (row.series < 0 || row.series >= n_series)
      throw DataError("pooled design: series index out of range");
    if (row.count < 0) throw DataError("pooled design: negative response");
    if (row.outbreak != 0 && row.outbreak != 1)
      throw DataError("pooled design: outbreak indicator must be 0 or 1");
  }
}

PooledDesign build_pooled_design(const SeriesGroup &training, WeekIndex window_start) {
  PooledDesign design;
  design.n_series = training.n_series();
  design.outbreak_column = true;
  for (int n = 0; n < training.n_series(); ++n) {
    const auto &s = training.series[static_cast<size_t>(n)];
    for (WeekIndex local = 1; local <= s.length(); ++local) {
      const Label label = s.label_at(local);
      if (!is_known(label)) continue;
      const CovariateRow z = covariate_at(window_start + local - 1);
      design.rows.push_back(DesignRow{n, z.t, z.trend, z.cos_term, z.sin_term,
                                      label == Label::Outbreak ? 1 : 0, s.count_at(local)});
    }
  }
  return design;
}

double GlmFit::linear_predictor(int series_index, const CovariateRow &z, int state) const {
  if (series_index < 0 || series_index >= n_series)
    throw std::out_of_range("GlmFit: series index out of range");
  double eta = beta0(series_index) + beta_trend(series_index) * z.trend +
               beta_cos(series_index) * z.cos_term + beta_sin(series_index) * z.sin_term;
  if (state != 0) eta += beta_outbreak();
  return eta;
}

double predict_mu(const GlmFit &fit, int series_index, const CovariateRow &z, int state) {
  return std::exp(fit.linear_predictor(series_index, z, state));
}

double pooled_log_likelihood(const PooledDesign &design, const std::vector<double> &beta,
                             const std::vector<double> &size_r,
                             const std::vector<bool> &series_all_zero) {
  double ll = 0.0;
  for (const auto &row : design.rows) {
    if (!series_all_zero.empty() && series_all_zero[static_cast<size_t>(row.series)]) continue;
    double eta = beta[4 * static_cast<size_t>(row.series)] +
                 beta[4 * static_cast<size_t>(row.series) + 1] * row.trend +
                 beta[4 * static_cast<size_t>(row.series) + 2] * row.cos_term +
                 beta[4 * static_cast<size_t>(row.series) + 3] * row.sin_term;
    if (design.outbreak_column && row.outbreak) eta += beta.back();
    const double mu = std::exp(std::clamp(eta, -500.0, 500.0));
    ll += nb_log_pmf(row.count, mu, size_r[static_cast<size_t>(row.series)]);
  }
  return ll;
}

namespace {

double nb_deviance_term(int y, double mu, double r) {
  const double yd = static_cast<double>(y);
  double d = -(yd + r) * std::log((yd + r) / (mu + r));
  if (y > 0) d += yd * std::log(yd / mu);
  return 2.0 * d;
}

struct FitWorkspace {
  const PooledDesign &design;
  std::vector<char> clamped;             // per series
  std::vector<int> active_rows;          // indices into design.rows
  std::vector<std::vector<int>> rows_of; // active rows per series
  std::vector<double> eta, mu;           // per design row (active entries used)

  explicit FitWorkspace(const PooledDesign &d) : design(d) {
    const int N = d.n_series;
    clamped.assign(static_cast<size_t>(N), 1);
    rows_of.resize(static_cast<size_t>(N));
    for (size_t i = 0; i < d.rows.size(); ++i) {
      if (d.rows[i].count > 0) clamped[static_cast<size_t>(d.rows[i].series)] = 0;
    }
    for (size_t i = 0; i < d.rows.size(); ++i) {
      const auto &row = d.rows[i];
      if (clamped[static_cast<size_t>(row.series)]) continue;
      active_rows.push_back(static_cast<int>(i));
      rows_of[static_cast<size_t>(row.series)].push_back(static_cast<int>(i));
    }
    eta.assign(d.rows.size(), 0.0);
    mu.assign(d.rows.size(), 0.0);
  }

  void refresh_means(const std::vector<double> &beta) {
    for (int i : active_rows) {
      const auto &row = design.rows[static_cast<size_t>(i)];
      double e = beta[4 * static_cast<size_t>(row.series)] +
                 beta[4 * static_cast<size_t>(row.series) + 1] * row.trend +
                 beta[4 * static_cast<size_t>(row.series) + 2] * row.cos_term +
                 beta[4 * static_cast<size_t>(row.series) + 3] * row.sin_term;
      if (design.outbreak_column && row.outbreak) e += beta.back();
      eta[static_cast<size_t>(i)] = e;
      mu[static_cast<size_t>(i)] = std::exp(std::clamp(e, -500.0, 500.0));
    }
  }

  double deviance(const std::vector<double> &size_r) const {
    double d = 0.0;
    for (int i : active_rows) {
      const auto &row = design.rows[static_cast<size_t>(i)];
      d += nb_deviance_term(row.count, mu[static_cast<size_t>(i)],
                            size_r[static_cast<size_t>(row.series)]);
    }
    return d;
  }
};

double moment_dispersion(const std::vector<int> &rows, const PooledDesign &design) {
  double mean = 0.0;
  for (int i : rows) mean += design.rows[static_cast<size_t>(i)].count;
  mean /= static_cast<double>(rows.size());
  double var = 0.0;
  for (int i : rows) {
    const double d = design.rows[static_cast<size_t>(i)].count - mean;
    var += d * d;
  }
  var /= std::max(1.0, static_cast<double>(rows.size() - 1));
  const double r = mean * mean / std::max(var - mean, 1e-6);
  return std::clamp(r, kSizeLo, kSizeHi);
}

/// Profile-likelihood Newton for the per-series size, bracketed [1e-3, 1e6].
double profile_dispersion(const std::vector<int> &rows, const FitWorkspace &ws, double r_init) {
  const auto &design = ws.design;
  auto score = [&](double r) {
    double s = 0.0;
    for (int i : rows) {
      const auto &row = design.rows[static_cast<size_t>(i)];
      const double m = ws.mu[static_cast<size_t>(i)];
      s += digamma_diff(row.count, r) - std::log1p(m / r) + (m - row.count) / (m + r);
    }
    return s;
  };
  auto curvature = [&](double r) { // -d2l/dr2
    double s = 0.0;
    for (int i : rows) {
      const auto &row = design.rows[static_cast<size_t>(i)];
      const double m = ws.mu[static_cast<size_t>(i)];
      const double mr = m + r;
      s += trigamma_diff(row.count, r) - 1.0 / r + 2.0 / mr -
           (row.count + r) / (mr * mr);
    }
    return s;
  };

  double lo = kSizeLo, hi = kSizeHi;
  double r = std::clamp(r_init, lo, hi);
  for (int iter = 0; iter < 60; ++iter) {
    const double s = score(r);
    if (!std::isfinite(s)) return std::clamp(r, kSizeLo, kSizeHi);
    if (s > 0.0)
      lo = r; // likelihood still increasing in r
    else
      hi = r;
    if (hi / lo < 1.0 + 1e-9) break;
    const double c = curvature(r);
    double next = (std::isfinite(c) && c > 0.0) ? r + s / c : std::sqrt(lo * hi);
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = std::sqrt(lo * hi);
    if (std::abs(next - r) <= 1e-8 * (1.0 + r)) {
      r = next;
      break;
    }
    r = next;
  }
  return std::clamp(r, kSizeLo, kSizeHi);
}

} // namespace

GlmFit irls_fit(const PooledDesign &design, const IrlsOptions &options) {
  design.validate();
  const int N = design.n_series;
  const int P = design.n_cols();
  FitWorkspace ws(design);

  GlmFit fit;
  fit.n_series = N;
  fit.outbreak_column = design.outbreak_column;
  fit.beta.assign(static_cast<size_t>(P), 0.0);
  fit.size_r.assign(static_cast<size_t>(N), kAllZeroSize);
  fit.series_all_zero.assign(static_cast<size_t>(N), false);
  for (int n = 0; n < N; ++n) {
    if (ws.clamped[static_cast<size_t>(n)]) {
      fit.series_all_zero[static_cast<size_t>(n)] = true;
      fit.beta[4 * static_cast<size_t>(n)] = kAllZeroIntercept;
    } else if (!options.dispersion_init.empty()) {
      fit.size_r[static_cast<size_t>(n)] =
          std::clamp(options.dispersion_init[static_cast<size_t>(n)], kSizeLo, kSizeHi);
    } else {
      fit.size_r[static_cast<size_t>(n)] = moment_dispersion(ws.rows_of[static_cast<size_t>(n)], design);
    }
  }
  if (ws.active_rows.empty())
    throw DataError("pooled design: every series has all-zero training counts");

  // Working means for the first step come straight from the response.
  for (int i : ws.active_rows) {
    const double y = design.rows[static_cast<size_t>(i)].count;
    ws.mu[static_cast<size_t>(i)] = std::max(y, 0.5);
    ws.eta[static_cast<size_t>(i)] = std::log(ws.mu[static_cast<size_t>(i)]);
  }

  Eigen::MatrixXd A(P, P);
  Eigen::VectorXd b(P);
  bool beta_converged = false;
  bool have_beta = false; // true once a solved beta defines the means
  double prev_deviance = std::numeric_limits<double>::infinity();

  for (int epoch = 0; epoch < options.max_epochs; ++epoch) {
    fit.epoch_starts.push_back(static_cast<int>(fit.deviance_history.size()));
    if (have_beta) {
      // Dispersion changed; restate the baseline under the new definition.
      ws.refresh_means(fit.beta);
      prev_deviance = ws.deviance(fit.size_r);
      fit.deviance_history.push_back(prev_deviance);
    }

    beta_converged = false;
    while (fit.iterations < options.max_iter) {
      A.setZero();
      b.setZero();
      for (int i : ws.active_rows) {
        const auto &row = design.rows[static_cast<size_t>(i)];
        const double m = ws.mu[static_cast<size_t>(i)];
        const double r = fit.size_r[static_cast<size_t>(row.series)];
        double w = m * r / (r + m);
        if (!std::isfinite(w) || w < 1e-12) w = 1e-12;
        const double z = ws.eta[static_cast<size_t>(i)] + (row.count - m) / m;

        double xval[5];
        int xcol[5];
        int nx = 0;
        const int base = 4 * row.series;
        xcol[nx] = base; xval[nx++] = 1.0;
        xcol[nx] = base + 1; xval[nx++] = row.trend;
        xcol[nx] = base + 2; xval[nx++] = row.cos_term;
        xcol[nx] = base + 3; xval[nx++] = row.sin_term;
        if (design.outbreak_column && row.outbreak) {
          xcol[nx] = 4 * N;
          xval[nx++] = 1.0;
        }
        for (int a = 0; a < nx; ++a) {
          b(xcol[a]) += w * xval[a] * z;
          for (int c = a; c < nx; ++c) {
            A(xcol[a], xcol[c]) += w * xval[a] * xval[c];
            if (c != a) A(xcol[c], xcol[a]) = A(xcol[a], xcol[c]);
          }
        }
      }
      // Pin the columns of clamped series so the system stays full rank.
      for (int n = 0; n < N; ++n) {
        if (!ws.clamped[static_cast<size_t>(n)]) continue;
        for (int j = 4 * n; j < 4 * n + 4; ++j) {
          A.row(j).setZero();
          A.col(j).setZero();
          A(j, j) = 1.0;
          b(j) = (j == 4 * n) ? kAllZeroIntercept : 0.0;
        }
      }
      for (int j = 0; j < P; ++j) {
        if (!(A(j, j) > 0.0) || !std::isfinite(A(j, j)))
          throw NumericError("irls_fit: singular weighted normal equations at column " +
                             std::to_string(j));
      }

      Eigen::VectorXd solution = A.ldlt().solve(b);
      if (!solution.allFinite())
        throw NumericError("irls_fit: weighted least-squares solve produced non-finite coefficients");

      std::vector<double> candidate(solution.data(), solution.data() + P);
      const std::vector<double> previous = fit.beta;
      auto apply_cap = [&](std::vector<double> &beta_vec) {
        if (!design.outbreak_column) return;
        double &b4 = beta_vec.back();
        if (std::abs(b4) > kBeta4Cap) {
          b4 = std::clamp(b4, -kBeta4Cap, kBeta4Cap);
          fit.beta4_capped = true;
        }
      };
      apply_cap(candidate);

      fit.beta = candidate;
      ws.refresh_means(fit.beta);
      double dev = ws.deviance(fit.size_r);
      const double slack = 1e-10 * (1.0 + std::abs(prev_deviance));
      if (have_beta) {
        int halvings = 0;
        while (dev > prev_deviance + slack && halvings < 10) {
          for (int j = 0; j < P; ++j)
            fit.beta[static_cast<size_t>(j)] =
                0.5 * (fit.beta[static_cast<size_t>(j)] + previous[static_cast<size_t>(j)]);
          apply_cap(fit.beta);
          ws.refresh_means(fit.beta);
          dev = ws.deviance(fit.size_r);
          ++halvings;
        }
        if (dev > prev_deviance + slack) {
          // No downhill step left at this dispersion.
          fit.beta = previous;
          ws.refresh_means(fit.beta);
          beta_converged = true;
          break;
        }
      }
      have_beta = true;
      fit.deviance_history.push_back(dev);
      ++fit.iterations;
      const bool small_change =
          std::abs(prev_deviance - dev) <= options.tol * (std::abs(dev) + 0.1);
      prev_deviance = dev;
      if (small_change) {
        beta_converged = true;
        break;
      }
    }

    if (!options.update_dispersion) break;
    double max_rel_change = 0.0;
    for (int n = 0; n < N; ++n) {
      if (ws.clamped[static_cast<size_t>(n)]) continue;
      const double old_r = fit.size_r[static_cast<size_t>(n)];
      const double new_r = profile_dispersion(ws.rows_of[static_cast<size_t>(n)], ws, old_r);
      max_rel_change = std::max(max_rel_change, std::abs(new_r - old_r) / (1.0 + old_r));
      fit.size_r[static_cast<size_t>(n)] = new_r;
    }
    if (beta_converged && max_rel_change < 1e-6) break;
    if (fit.iterations >= options.max_iter) {
      beta_converged = false;
      break;
    }
  }

  fit.converged = beta_converged;
  ws.refresh_means(fit.beta);
  fit.deviance = ws.deviance(fit.size_r);
  fit.log_likelihood = pooled_log_likelihood(design, fit.beta, fit.size_r, fit.series_all_zero);
  return fit;
}

} // namespace epihmm
