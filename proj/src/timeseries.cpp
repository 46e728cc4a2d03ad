#include "epihmm/timeseries.hpp"

#include <cmath>
#include <numbers>

#include "epihmm/errors.hpp"

namespace epihmm {

void SurveillanceSeries::validate() const {
  if (counts.empty())
    throw DataError("series '" + series_id + "': empty count sequence");
  if (labels.size() != counts.size())
    throw DataError("series '" + series_id + "': counts and labels differ in length");
  for (size_t i = 0; i < counts.size(); ++i)
    if (counts[i] < 0)
      throw DataError("series '" + series_id + "': negative count at position " +
                      std::to_string(i + 1));
}

void SeriesGroup::validate() const {
  if (series.empty()) throw DataError("group '" + group_id + "': no member series");
  const IsoWeek anchor = series.front().start_week;
  const int T = series.front().length();
  for (const auto &s : series) {
    s.validate();
    if (s.start_week != anchor || s.length() != T)
      throw DataError("group '" + group_id + "': series '" + s.series_id +
                      "' is not on the shared week grid");
  }
}

int SeriesGroup::outbreak_label_count() const {
  int n = 0;
  for (const auto &s : series)
    for (Label l : s.labels)
      if (l == Label::Outbreak) ++n;
  return n;
}

CovariateRow covariate_at(WeekIndex t) {
  const double phase = 2.0 * std::numbers::pi * static_cast<double>(t) / 52.0;
  return CovariateRow{t, static_cast<double>(t), std::cos(phase), std::sin(phase)};
}

std::vector<CovariateRow> build_covariates(WeekIndex t_start, WeekIndex t_end) {
  if (t_start < 1 || t_end < t_start)
    throw UsageError("invalid covariate range [" + std::to_string(t_start) + ", " +
                     std::to_string(t_end) + "]");
  std::vector<CovariateRow> rows;
  rows.reserve(static_cast<size_t>(t_end - t_start + 1));
  for (WeekIndex t = t_start; t <= t_end; ++t) rows.push_back(covariate_at(t));
  return rows;
}

SurveillanceSeries slice_series(const SurveillanceSeries &s, WeekIndex from, WeekIndex to,
                                WeekIndex unknown_from) {
  SurveillanceSeries out;
  out.series_id = s.series_id;
  out.start_week = week_at_index(s.start_week, from);
  out.counts.reserve(static_cast<size_t>(to - from + 1));
  out.labels.reserve(static_cast<size_t>(to - from + 1));
  for (WeekIndex t = from; t <= to; ++t) {
    out.counts.push_back(s.count_at(t));
    out.labels.push_back(t >= unknown_from ? Label::Unknown : s.label_at(t));
  }
  return out;
}

TrainTestSplit train_test_split(const SeriesGroup &group, WeekIndex current_week,
                                int window_years, int holdout_u) {
  group.validate();
  if (window_years < 1) throw UsageError("window_years must be >= 1");
  if (holdout_u < 0) throw UsageError("holdout_u must be >= 0");
  const int train_len = window_years * 52;
  const int full_len = train_len + holdout_u;
  const WeekIndex window_start = current_week - full_len + 1;
  if (current_week > group.length())
    throw DataError("group '" + group.group_id + "': current week " +
                    std::to_string(current_week) + " beyond series end " +
                    std::to_string(group.length()));
  if (window_start < 1)
    throw DataError("group '" + group.group_id + "': series '" +
                    group.series.front().series_id + "' has " +
                    std::to_string(current_week) + " weeks of history, needs " +
                    std::to_string(full_len));
  const WeekIndex train_end = current_week - holdout_u;

  TrainTestSplit split;
  split.window_start = window_start;
  split.train_end = train_end;
  split.current_week = current_week;
  split.training.group_id = group.group_id;
  split.full_window.group_id = group.group_id;
  for (const auto &s : group.series) {
    split.training.series.push_back(slice_series(s, window_start, train_end, train_end + 1));
    split.full_window.series.push_back(slice_series(s, window_start, current_week, train_end + 1));
  }
  return split;
}

} // namespace epihmm
