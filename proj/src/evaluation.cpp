#include "epihmm/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "epihmm/errors.hpp"

namespace epihmm {

const std::vector<long> kDefaultSizeBounds = {1, 2, 3, 5, 10};

double score_of(const ScoredWeek &w, Method method) {
  return method == Method::Hmm ? w.hmm_score : w.baseline_score;
}

namespace {

std::pair<long, long> class_counts(const std::vector<ScoredWeek> &scored) {
  long pos = 0, neg = 0;
  for (const auto &w : scored) (w.label == 1 ? pos : neg) += 1;
  return {pos, neg};
}

double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

} // namespace

std::vector<RocPoint> roc_curve(const std::vector<ScoredWeek> &scored, Method method) {
  const auto [pos, neg] = class_counts(scored);
  if (pos == 0 || neg == 0)
    throw DataError("roc_curve: need both an outbreak and an endemic week");

  std::vector<std::pair<double, int>> ranked;
  ranked.reserve(scored.size());
  for (const auto &w : scored) ranked.emplace_back(score_of(w, method), w.label);
  std::sort(ranked.begin(), ranked.end(),
            [](const auto &a, const auto &b) { return a.first > b.first; });

  std::vector<RocPoint> curve;
  curve.push_back(RocPoint{std::numeric_limits<double>::infinity(), 0.0, 0.0});
  long tp = 0, fp = 0;
  for (size_t i = 0; i < ranked.size(); ++i) {
    (ranked[i].second == 1 ? tp : fp) += 1;
    if (i + 1 < ranked.size() && ranked[i + 1].first == ranked[i].first) continue;
    curve.push_back(RocPoint{ranked[i].first, static_cast<double>(fp) / static_cast<double>(neg),
                             static_cast<double>(tp) / static_cast<double>(pos)});
  }
  return curve;
}

double auc(const std::vector<RocPoint> &curve) {
  double area = 0.0;
  for (size_t i = 1; i < curve.size(); ++i)
    area += (curve[i].fpr - curve[i - 1].fpr) * 0.5 *
            (curve[i].sensitivity + curve[i - 1].sensitivity);
  return area;
}

double match_sensitivity(const std::vector<ScoredWeek> &scored, Method method,
                         double reference_sensitivity) {
  if (!(reference_sensitivity > 0.0) || reference_sensitivity > 1.0)
    throw DataError("match_sensitivity: reference sensitivity must be in (0, 1]");
  const std::vector<RocPoint> curve = roc_curve(scored, method);
  for (const auto &point : curve) {
    if (point.sensitivity >= reference_sensitivity) return point.threshold;
  }
  throw DataError("match_sensitivity: reference sensitivity unattainable");
}

OperatingPoint metrics_at(const std::vector<ScoredWeek> &scored, Method method, double threshold) {
  OperatingPoint op;
  for (const auto &w : scored) {
    const bool alarm = score_of(w, method) >= threshold;
    if (w.label == 1)
      (alarm ? op.tp : op.fn) += 1;
    else
      (alarm ? op.fp : op.tn) += 1;
  }
  const long pos = op.tp + op.fn, neg = op.fp + op.tn;
  op.sensitivity = pos > 0 ? static_cast<double>(op.tp) / static_cast<double>(pos) : 0.0;
  op.fpr = neg > 0 ? static_cast<double>(op.fp) / static_cast<double>(neg) : 0.0;
  op.specificity = neg > 0 ? static_cast<double>(op.tn) / static_cast<double>(neg) : 0.0;
  if (op.tp + op.fp > 0)
    op.precision = static_cast<double>(op.tp) / static_cast<double>(op.tp + op.fp);
  return op;
}

OverlapCounts overlap_counts(const std::vector<ScoredWeek> &scored, double hmm_threshold,
                             double baseline_threshold) {
  OverlapCounts counts;
  for (const auto &w : scored) {
    if (w.label != 1) continue;
    const bool h = w.hmm_score >= hmm_threshold;
    const bool b = w.baseline_score >= baseline_threshold;
    if (h && b)
      ++counts.both;
    else if (h)
      ++counts.hmm_only;
    else if (b)
      ++counts.baseline_only;
    else
      ++counts.labeled_missed;
  }
  return counts;
}

std::vector<Episode> find_episodes(const std::vector<ScoredWeek> &scored) {
  std::vector<size_t> order(scored.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (scored[a].series_id != scored[b].series_id)
      return scored[a].series_id < scored[b].series_id;
    return scored[a].week < scored[b].week;
  });

  std::vector<Episode> episodes;
  for (size_t k = 0; k < order.size(); ++k) {
    const ScoredWeek &w = scored[order[k]];
    if (w.label != 1) continue;
    const bool continues = !episodes.empty() && k > 0 &&
                           scored[order[k - 1]].series_id == w.series_id &&
                           scored[order[k - 1]].week + 1 == w.week &&
                           scored[order[k - 1]].label == 1 &&
                           episodes.back().series_id == w.series_id &&
                           episodes.back().first_week + episodes.back().n_weeks == w.week;
    if (!continues) {
      Episode e;
      e.series_id = w.series_id;
      e.first_week = w.week;
      e.size = 0;
      episodes.push_back(std::move(e));
    }
    Episode &e = episodes.back();
    ++e.n_weeks;
    e.member_rows.push_back(order[k]);
    if (e.size && w.outbreak_size)
      e.size = *e.size + *w.outbreak_size;
    else
      e.size.reset();
  }
  return episodes;
}

std::vector<SizeStratum> size_strata(const std::vector<ScoredWeek> &scored, double hmm_threshold,
                                     double baseline_threshold,
                                     const std::vector<long> &upper_bounds) {
  for (size_t i = 1; i < upper_bounds.size(); ++i)
    if (upper_bounds[i] <= upper_bounds[i - 1])
      throw std::invalid_argument("size_strata: bounds must be strictly increasing");

  std::vector<SizeStratum> strata(upper_bounds.size() + 1);
  for (size_t k = 0; k < upper_bounds.size(); ++k) {
    strata[k].min_size = k == 0 ? upper_bounds[0] : upper_bounds[k - 1] + 1;
    strata[k].max_size = upper_bounds[k];
  }
  // The last stratum is unbounded above (max < min marks it).
  strata.back().min_size = upper_bounds.empty() ? 0 : upper_bounds.back() + 1;
  strata.back().max_size = strata.back().min_size - 1;

  std::vector<std::vector<double>> hmm_scores(strata.size());
  std::vector<std::vector<double>> baseline_scores(strata.size());
  for (const Episode &e : find_episodes(scored)) {
    if (!e.size) continue;
    size_t k = upper_bounds.size();
    for (size_t i = 0; i < upper_bounds.size(); ++i) {
      if (*e.size <= upper_bounds[i]) {
        k = i;
        break;
      }
    }
    SizeStratum &s = strata[k];
    ++s.episodes;
    bool hit_hmm = false, hit_baseline = false;
    for (size_t row : e.member_rows) {
      const ScoredWeek &w = scored[row];
      ++s.weeks;
      hmm_scores[k].push_back(w.hmm_score);
      baseline_scores[k].push_back(w.baseline_score);
      if (w.hmm_score >= hmm_threshold) {
        ++s.weeks_flagged_hmm;
        hit_hmm = true;
      }
      if (w.baseline_score >= baseline_threshold) {
        ++s.weeks_flagged_baseline;
        hit_baseline = true;
      }
    }
    if (hit_hmm) ++s.episodes_hit_hmm;
    if (hit_baseline) ++s.episodes_hit_baseline;
  }
  for (size_t k = 0; k < strata.size(); ++k) {
    strata[k].median_hmm_score = median_of(hmm_scores[k]);
    strata[k].median_baseline_score = median_of(baseline_scores[k]);
  }
  return strata;
}

} // namespace epihmm
