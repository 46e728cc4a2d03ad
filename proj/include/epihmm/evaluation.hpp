#pragma once

#include <optional>
#include <string>
#include <vector>

#include "epihmm/timeseries.hpp"

namespace epihmm {

/// One evaluated (series, week) with both detectors' scores on [0,1]:
/// the posterior outbreak probability and 1 - p_value. week is a serial
/// index, consecutive for consecutive calendar weeks. outbreak_size is the
/// week's excess case count when truth is available.
struct ScoredWeek {
  std::string series_id;
  WeekIndex week = 0;
  int label = 0; // 0/1
  double hmm_score = 0.0;
  double baseline_score = 0.0;
  std::optional<long> outbreak_size;
};

enum class Method { Hmm, Baseline };

double score_of(const ScoredWeek &w, Method method);

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double sensitivity = 0.0;
};

/// Sweep over distinct score thresholds, descending; starts at (0,0) with an
/// infinite threshold and ends at (1,1). Throws DataError on single-class
/// input.
std::vector<RocPoint> roc_curve(const std::vector<ScoredWeek> &scored, Method method);

/// Trapezoid area under the curve.
double auc(const std::vector<RocPoint> &curve);

/// Largest threshold whose sensitivity is >= reference (the largest also has
/// the smallest FPR). Throws DataError when the reference is unattainable.
double match_sensitivity(const std::vector<ScoredWeek> &scored, Method method,
                         double reference_sensitivity);

struct OperatingPoint {
  long tp = 0, fp = 0, fn = 0, tn = 0;
  double sensitivity = 0.0;
  double fpr = 0.0;
  double specificity = 0.0;
  std::optional<double> precision; // empty when nothing is flagged
};

/// Alarm rule: score >= threshold.
OperatingPoint metrics_at(const std::vector<ScoredWeek> &scored, Method method, double threshold);

struct OverlapCounts {
  long both = 0;
  long hmm_only = 0;
  long baseline_only = 0;
  long labeled_missed = 0;
};

/// Recall overlap over labeled outbreak weeks only.
OverlapCounts overlap_counts(const std::vector<ScoredWeek> &scored, double hmm_threshold,
                             double baseline_threshold);

/// A contiguous run of outbreak weeks within one series; size is the summed
/// weekly excess (absent when any member week lacks one).
struct Episode {
  std::string series_id;
  WeekIndex first_week = 0;
  int n_weeks = 0;
  std::optional<long> size;
  std::vector<size_t> member_rows; // indices into the scored vector
};

std::vector<Episode> find_episodes(const std::vector<ScoredWeek> &scored);

struct SizeStratum {
  long min_size = 0; // inclusive; the first stratum is open below
  long max_size = 0; // inclusive; < min_size means unbounded above
  long episodes = 0;
  long episodes_hit_hmm = 0;
  long episodes_hit_baseline = 0;
  long weeks = 0;
  long weeks_flagged_hmm = 0;
  long weeks_flagged_baseline = 0;
  double median_hmm_score = 0.0;
  double median_baseline_score = 0.0;
};

/// Default episode-size bins <=1, 2, 3, 4-5, 6-10, 11+.
extern const std::vector<long> kDefaultSizeBounds;

/// Buckets outbreak episodes by total size using the given inclusive upper
/// bounds (plus one unbounded stratum); episodes without a size are skipped.
/// Week-level flags use score >= threshold, an episode is hit when any of
/// its weeks is flagged.
std::vector<SizeStratum> size_strata(const std::vector<ScoredWeek> &scored, double hmm_threshold,
                                     double baseline_threshold,
                                     const std::vector<long> &upper_bounds = kDefaultSizeBounds);

} // namespace epihmm
