#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "epihmm/errors.hpp"
#include "epihmm/evaluation.hpp"
#include "epihmm/rng.hpp"
#include "oracles.hpp"

using namespace epihmm;

namespace {

std::vector<ScoredWeek> rows_from(const std::vector<double> &hmm, const std::vector<int> &labels,
                                  const std::vector<double> *baseline = nullptr) {
  std::vector<ScoredWeek> rows;
  for (size_t i = 0; i < hmm.size(); ++i) {
    ScoredWeek w;
    w.series_id = "a";
    w.week = static_cast<WeekIndex>(i + 1);
    w.label = labels[i];
    w.hmm_score = hmm[i];
    w.baseline_score = baseline ? (*baseline)[i] : hmm[i];
    rows.push_back(w);
  }
  return rows;
}

} // namespace

TEST_SUITE("evaluation") {

TEST_CASE("roc curve: a worked example with a tie") {
  const auto rows = rows_from({0.9, 0.8, 0.8, 0.1}, {1, 1, 0, 0});
  const auto curve = roc_curve(rows, Method::Hmm);
  REQUIRE(curve.size() == 4);
  CHECK(curve[0].threshold == std::numeric_limits<double>::infinity());
  CHECK(curve[0].fpr == 0.0);
  CHECK(curve[0].sensitivity == 0.0);
  CHECK(curve[1].threshold == 0.9);
  CHECK(curve[1].sensitivity == 0.5);
  CHECK(curve[1].fpr == 0.0);
  // the tied 0.8 scores move one positive and one negative together
  CHECK(curve[2].threshold == 0.8);
  CHECK(curve[2].sensitivity == 1.0);
  CHECK(curve[2].fpr == 0.5);
  CHECK(curve[3].fpr == 1.0);
  CHECK(curve[3].sensitivity == 1.0);
  CHECK(auc(curve) == doctest::Approx(0.875).epsilon(1e-15)); // 0.5*1 + 0.25*1.5
}

TEST_CASE("auc endpoints") {
  CHECK(auc(roc_curve(rows_from({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}), Method::Hmm)) == 1.0);
  CHECK(auc(roc_curve(rows_from({0.1, 0.2, 0.8, 0.9}, {1, 1, 0, 0}), Method::Hmm)) == 0.0);
  CHECK(auc(roc_curve(rows_from({0.4, 0.4, 0.4, 0.4}, {1, 1, 0, 0}), Method::Hmm)) == 0.5);
}

TEST_CASE("trapezoid auc equals the Mann-Whitney statistic") {
  Rng rng(31415);
  for (int rep = 0; rep < 30; ++rep) {
    std::vector<double> scores;
    std::vector<int> labels;
    const int n = 20 + static_cast<int>(rng.uniform01() * 60);
    for (int i = 0; i < n; ++i) {
      // coarse grid forces plenty of ties
      scores.push_back(std::floor(rng.uniform01() * 8.0) / 8.0);
      labels.push_back(rng.uniform01() < 0.3 ? 1 : 0);
    }
    if (std::count(labels.begin(), labels.end(), 1) == 0) labels[0] = 1;
    if (std::count(labels.begin(), labels.end(), 0) == 0) labels[1] = 0;
    const double got = auc(roc_curve(rows_from(scores, labels), Method::Hmm));
    CHECK(got == doctest::Approx(oracles::mann_whitney_auc(scores, labels)).epsilon(1e-12));
  }
}

TEST_CASE("single-class inputs cannot be ranked") {
  CHECK_THROWS_AS(static_cast<void>(roc_curve(rows_from({0.1, 0.2}, {0, 0}), Method::Hmm)),
                  DataError);
  CHECK_THROWS_AS(static_cast<void>(roc_curve(rows_from({0.1, 0.2}, {1, 1}), Method::Hmm)),
                  DataError);
}

TEST_CASE("sensitivity matching picks the largest qualifying threshold") {
  const auto rows = rows_from({0.9, 0.8, 0.8, 0.7, 0.1}, {1, 0, 1, 1, 0});
  CHECK(match_sensitivity(rows, Method::Hmm, 0.2) == 0.9);
  CHECK(match_sensitivity(rows, Method::Hmm, 0.5) == 0.8);
  CHECK(match_sensitivity(rows, Method::Hmm, 2.0 / 3.0) == 0.8); // exact hit stays
  CHECK(match_sensitivity(rows, Method::Hmm, 0.9) == 0.7);
  CHECK(match_sensitivity(rows, Method::Hmm, 1.0) == 0.7);
  CHECK_THROWS_AS(static_cast<void>(match_sensitivity(rows, Method::Hmm, 0.0)), DataError);
  CHECK_THROWS_AS(static_cast<void>(match_sensitivity(rows, Method::Hmm, 1.1)), DataError);
}

TEST_CASE("operating point counts: 3 true and 1 false alarm in 100 weeks") {
  std::vector<double> scores(100, 0.0);
  std::vector<int> labels(100, 0);
  for (int i = 0; i < 12; ++i) labels[static_cast<size_t>(i)] = 1;
  scores[0] = scores[1] = scores[2] = 1.0; // hits
  scores[50] = 1.0;                        // false alarm
  const OperatingPoint point = metrics_at(rows_from(scores, labels), Method::Hmm, 0.5);
  CHECK(point.tp == 3);
  CHECK(point.fp == 1);
  CHECK(point.fn == 9);
  CHECK(point.tn == 87);
  CHECK(point.sensitivity == doctest::Approx(0.25));
  CHECK(point.fpr == doctest::Approx(1.0 / 88.0));
  CHECK(point.specificity == doctest::Approx(87.0 / 88.0));
  REQUIRE(point.precision.has_value());
  CHECK(*point.precision == doctest::Approx(0.75));

  SUBCASE("precision is undefined with no alarms at all") {
    const OperatingPoint silent = metrics_at(rows_from(scores, labels), Method::Hmm,
                                             std::numeric_limits<double>::infinity());
    CHECK(silent.tp == 0);
    CHECK(silent.fp == 0);
    CHECK_FALSE(silent.precision.has_value());
  }
}

TEST_CASE("overlap partitions the outbreak weeks") {
  //               both  hmm   base  miss miss  base both  (labels 1)
  const std::vector<double> hmm{0.9, 0.8, 0.1, 0.2, 0.0, 0.3, 0.9, 0.9, 0.0};
  const std::vector<double> base{0.9, 0.1, 0.8, 0.2, 0.0, 0.9, 0.9, 0.1, 0.9};
  const std::vector<int> labels{1, 1, 1, 1, 1, 1, 1, 0, 0};
  const OverlapCounts got = overlap_counts(rows_from(hmm, labels, &base), 0.5, 0.5);
  CHECK(got.both == 2);
  CHECK(got.hmm_only == 1);
  CHECK(got.baseline_only == 2);
  CHECK(got.labeled_missed == 2);
}

TEST_CASE("episodes are runs of labeled weeks within one series") {
  std::vector<ScoredWeek> rows;
  auto add = [&](const std::string &sid, int week, int label, double h,
                 std::optional<long> size) {
    ScoredWeek w;
    w.series_id = sid;
    w.week = week;
    w.label = label;
    w.hmm_score = h;
    w.baseline_score = 0.0;
    w.outbreak_size = size;
    rows.push_back(w);
  };
  add("a", 4, 0, 0.0, std::nullopt);
  add("a", 5, 1, 0.9, 2);
  add("a", 6, 1, 0.2, 3);
  add("a", 7, 1, 0.1, 4);
  add("a", 8, 0, 0.0, std::nullopt);
  add("a", 9, 1, 0.7, 6);
  add("b", 7, 1, 0.1, std::nullopt); // same week as series a, separate run
  const auto episodes = find_episodes(rows);
  REQUIRE(episodes.size() == 3);
  CHECK(episodes[0].series_id == "a");
  CHECK(episodes[0].first_week == 5);
  CHECK(episodes[0].n_weeks == 3);
  REQUIRE(episodes[0].size.has_value());
  CHECK(*episodes[0].size == 9);
  CHECK(episodes[0].member_rows == std::vector<size_t>{1, 2, 3});
  CHECK(episodes[1].n_weeks == 1);
  CHECK(*episodes[1].size == 6);
  CHECK_FALSE(episodes[2].size.has_value()); // week without a size poisons the sum

  SUBCASE("a single missing size anywhere in a run drops that run's size") {
    rows[2].outbreak_size = std::nullopt;
    const auto again = find_episodes(rows);
    CHECK_FALSE(again[0].size.has_value());
    CHECK(again[0].n_weeks == 3);
  }
}

TEST_CASE("size strata bucket episodes by summed excess") {
  std::vector<ScoredWeek> rows;
  int week = 1;
  auto episode = [&](long size, double hmm_score) {
    ScoredWeek w;
    w.series_id = "a";
    w.week = week;
    w.label = 1;
    w.hmm_score = hmm_score;
    w.baseline_score = 1.0 - hmm_score;
    w.outbreak_size = size;
    rows.push_back(w);
    ScoredWeek gap;
    gap.series_id = "a";
    gap.week = week + 1;
    gap.label = 0;
    gap.hmm_score = 0.0;
    gap.baseline_score = 0.0;
    rows.push_back(gap);
    week += 2;
  };
  for (long size : {1L, 2L, 3L, 4L, 5L, 6L, 10L, 11L, 200L}) episode(size, size >= 5 ? 0.9 : 0.1);

  const auto strata = size_strata(rows, 0.5, 0.5);
  REQUIRE(strata.size() == 6); // <=1, 2, 3, 4-5, 6-10, 11+
  CHECK(strata[0].max_size == 1); // first stratum catches everything below its bound
  CHECK(strata[0].episodes == 1);
  CHECK(strata[1].episodes == 1);
  CHECK(strata[2].episodes == 1);
  CHECK(strata[3].min_size == 4);
  CHECK(strata[3].max_size == 5);
  CHECK(strata[3].episodes == 2);
  CHECK(strata[4].min_size == 6);
  CHECK(strata[4].max_size == 10);
  CHECK(strata[4].episodes == 2);
  CHECK(strata[5].min_size == 11);
  CHECK(strata[5].max_size < strata[5].min_size); // unbounded above
  CHECK(strata[5].episodes == 2);
  CHECK(strata[3].episodes_hit_hmm == 1); // only the size-5 episode scored 0.9
  CHECK(strata[4].episodes_hit_hmm == 2);
  CHECK(strata[4].weeks == 2);
  CHECK(strata[4].weeks_flagged_hmm == 2);
  CHECK(strata[4].median_hmm_score == doctest::Approx(0.9));
  CHECK(strata[0].median_hmm_score == doctest::Approx(0.1));
  CHECK(strata[0].episodes_hit_baseline == 1); // baseline = 1 - hmm here

  SUBCASE("custom bounds") {
    const auto coarse = size_strata(rows, 0.5, 0.5, {5});
    REQUIRE(coarse.size() == 2);
    CHECK(coarse[0].episodes == 5);
    CHECK(coarse[1].episodes == 4);
    CHECK_THROWS_AS(static_cast<void>(size_strata(rows, 0.5, 0.5, {3, 3})),
                    std::invalid_argument);
    // no bounds at all collapses to one catch-all stratum
    CHECK(size_strata(rows, 0.5, 0.5, {}).size() == 1);
  }

  SUBCASE("episodes without sizes are skipped") {
    rows[0].outbreak_size = std::nullopt;
    const auto pruned = size_strata(rows, 0.5, 0.5);
    CHECK(pruned[0].episodes == 0);
  }
}

} // TEST_SUITE
