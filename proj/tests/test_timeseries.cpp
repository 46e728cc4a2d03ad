#include <doctest.h>

#include <cmath>

#include "epihmm/errors.hpp"
#include "epihmm/timeseries.hpp"
#include "testutil.hpp"

using namespace epihmm;
using testutil::make_series;

TEST_SUITE("timeseries") {

TEST_CASE("covariates carry the annual harmonic") {
  const CovariateRow z52 = covariate_at(52);
  CHECK(z52.t == 52);
  CHECK(z52.trend == 52.0);
  CHECK(z52.cos_term == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(z52.sin_term == doctest::Approx(0.0).epsilon(1e-12));

  const CovariateRow z13 = covariate_at(13); // quarter period
  CHECK(z13.cos_term == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(z13.sin_term == doctest::Approx(1.0).epsilon(1e-12));

  // period 52: same phase one year apart
  const CovariateRow a = covariate_at(7), b = covariate_at(7 + 52);
  CHECK(a.cos_term == doctest::Approx(b.cos_term).epsilon(1e-12));
  CHECK(a.sin_term == doctest::Approx(b.sin_term).epsilon(1e-12));

  const auto rows = build_covariates(3, 7);
  REQUIRE(rows.size() == 5);
  CHECK(rows.front().t == 3);
  CHECK(rows.back().t == 7);
  CHECK_THROWS_AS(build_covariates(5, 4), UsageError);
}

TEST_CASE("series validation") {
  SurveillanceSeries s = make_series("a", {1, 2, 3}, {0, 1, -1});
  CHECK_NOTHROW(s.validate());
  CHECK(s.length() == 3);
  CHECK(s.count_at(2) == 2);
  CHECK(s.label_at(2) == Label::Outbreak);
  CHECK(s.label_at(3) == Label::Unknown);

  SurveillanceSeries negative = make_series("a", {1, -2, 3}, {0, 0, 0});
  CHECK_THROWS_AS(negative.validate(), DataError);
  SurveillanceSeries mismatch = make_series("a", {1, 2, 3}, {0, 0});
  CHECK_THROWS_AS(mismatch.validate(), DataError);
  SurveillanceSeries empty;
  empty.series_id = "a";
  CHECK_THROWS_AS(empty.validate(), DataError);
}

TEST_CASE("group validation wants one shared grid") {
  SeriesGroup g;
  g.group_id = "g";
  g.series.push_back(make_series("a", {1, 2, 3}, {0, 1, 0}));
  g.series.push_back(make_series("b", {4, 5, 6}, {0, 0, 1}));
  CHECK_NOTHROW(g.validate());
  CHECK(g.outbreak_label_count() == 2);

  g.series.push_back(make_series("c", {7, 8}, {0, 0}));
  CHECK_THROWS_AS(g.validate(), DataError);
  g.series.pop_back();
  g.series.push_back(make_series("d", {7, 8, 9}, {0, 0, 0}, IsoWeek{2005, 1}));
  CHECK_THROWS_AS(g.validate(), DataError);
}

TEST_CASE("slice_series re-anchors and masks") {
  const SurveillanceSeries parent =
      make_series("p", {10, 11, 12, 13, 14, 15}, {0, 0, 1, 1, 0, 0});
  const SurveillanceSeries slice = slice_series(parent, 2, 5, 4);
  CHECK(slice.length() == 4);
  CHECK(slice.count_at(1) == 11);
  CHECK(slice.count_at(4) == 14);
  CHECK(slice.start_week == week_at_index(parent.start_week, 2));
  // parent positions 2,3 keep labels; 4,5 fall at or past unknown_from
  CHECK(slice.label_at(1) == Label::Endemic);
  CHECK(slice.label_at(2) == Label::Outbreak);
  CHECK(slice.label_at(3) == Label::Unknown);
  CHECK(slice.label_at(4) == Label::Unknown);
}

TEST_CASE("train test split windows") {
  // 6 years of data; current week at the end, 1-year window, 26-week holdout
  const int T = 312;
  std::vector<int> counts(T, 1), labels(T, 0);
  labels[100] = 1;
  SeriesGroup g;
  g.group_id = "g";
  g.series.push_back(make_series("a", counts, labels));

  const TrainTestSplit split = train_test_split(g, T, 1, 26);
  CHECK(split.current_week == T);
  CHECK(split.window_start == T - (52 + 26) + 1);
  CHECK(split.train_end == T - 26);
  CHECK(split.training.length() == 52);
  CHECK(split.full_window.length() == 78);
  // holdout labels are masked in the full window
  for (WeekIndex t = 53; t <= 78; ++t)
    CHECK(split.full_window.series[0].label_at(t) == Label::Unknown);
  for (WeekIndex t = 1; t <= 52; ++t)
    CHECK(split.full_window.series[0].label_at(t) == Label::Endemic);

  // too little history
  CHECK_THROWS_AS(train_test_split(g, 77, 1, 26), DataError);
  // a mid-grid current week anchors the same arithmetic
  const TrainTestSplit mid = train_test_split(g, 200, 1, 26);
  CHECK(mid.window_start == 123);
  CHECK(mid.train_end == 174);
  CHECK(mid.training.series[0].count_at(1) == g.series[0].count_at(123));
}

} // TEST_SUITE
