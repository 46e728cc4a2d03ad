#ifndef EPIHMM_TIMESERIES_HPP
#define EPIHMM_TIMESERIES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "epihmm/week.hpp"

namespace epihmm {

/// Week-level state label. Unknown marks the reporting-delay holdout and
/// unlabeled imports; it is excluded from every supervised computation.
enum class Label : std::uint8_t { Endemic = 0, Outbreak = 1, Unknown = 2 };

inline bool is_known(Label l) { return l != Label::Unknown; }

/// One region's weekly case counts on a contiguous week grid, with optional
/// per-week outbreak labels. Index t=1 is start_week.
struct SurveillanceSeries {
  std::string series_id;
  IsoWeek start_week{};
  std::vector<int> counts;   // cases per week, >= 0
  std::vector<Label> labels; // same length as counts

  int length() const { return static_cast<int>(counts.size()); }
  int count_at(WeekIndex t) const { return counts[static_cast<size_t>(t - 1)]; }
  Label label_at(WeekIndex t) const { return labels[static_cast<size_t>(t - 1)]; }

  /// Throws DataError on negative counts, length mismatch, or empty series.
  void validate() const;
};

/// N series sharing one model (and one grid). The training unit.
struct SeriesGroup {
  std::string group_id;
  std::vector<SurveillanceSeries> series;

  int n_series() const { return static_cast<int>(series.size()); }
  int length() const { return series.empty() ? 0 : series.front().length(); }
  IsoWeek start_week() const { return series.empty() ? IsoWeek{} : series.front().start_week; }

  /// Throws DataError unless all members share start_week and length.
  void validate() const;

  /// Number of weeks labeled Outbreak anywhere in the group.
  int outbreak_label_count() const;
};

/// Deterministic covariates for one week: z_t = (t, cos(2*pi*t/52), sin(2*pi*t/52)).
struct CovariateRow {
  WeekIndex t = 0;
  double trend = 0.0;
  double cos_term = 0.0;
  double sin_term = 0.0;
};

CovariateRow covariate_at(WeekIndex t);

/// One row per t in [t_start, t_end]. Throws UsageError on an invalid range.
std::vector<CovariateRow> build_covariates(WeekIndex t_start, WeekIndex t_end);

/// Copy of parent weeks [from, to], re-anchored so the slice starts at week
/// 1; labels at parent positions >= unknown_from become Unknown.
SurveillanceSeries slice_series(const SurveillanceSeries &s, WeekIndex from, WeekIndex to,
                                WeekIndex unknown_from);

/// Result of carving the rolling training window out of a group's history.
///
/// Both groups are slices of the parent grid. `window_start` is the absolute
/// parent index of slice position 1, so absolute covariates for slice week k
/// use t = window_start + k - 1. The training slice ends holdout_u weeks
/// before current_week; the full slice ends at current_week with holdout
/// labels forced to Unknown.
struct TrainTestSplit {
  SeriesGroup training;
  SeriesGroup full_window;
  WeekIndex window_start = 0; // absolute index on the parent grid
  WeekIndex train_end = 0;    // absolute index of the last training week
  WeekIndex current_week = 0;
};

/// The full window spans window_years*52 + holdout_u weeks ending at
/// current_week. Throws DataError when the group's history is too short.
TrainTestSplit train_test_split(const SeriesGroup &group, WeekIndex current_week,
                                int window_years = 5, int holdout_u = 26);

} // namespace epihmm

#endif
