#include "epihmm/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <set>

#include <json.hpp>

#include "epihmm/baseline.hpp"
#include "epihmm/csv_io.hpp"
#include "epihmm/errors.hpp"
#include "epihmm/parallel.hpp"
#include "epihmm/rng.hpp"

namespace epihmm {

using nlohmann::json;

namespace {

void ensure_dir(const std::string &dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir + ": " + ec.message());
}

std::string join_path(const std::string &dir, const std::string &name) {
  return (std::filesystem::path(dir) / name).string();
}

std::string scenario_prefix(int id) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "s%02d", id);
  return buf;
}

void print_warnings(const IngestWarnings &warnings) {
  for (const auto &[sid, n] : warnings.folded_week53)
    std::cerr << "warning: series " << sid << ": folded " << n << " week-53 row(s) into week 52\n";
  for (const auto &[sid, n] : warnings.zero_filled_weeks)
    std::cerr << "warning: series " << sid << ": zero-filled " << n << " missing week(s)\n";
}

std::string prefix_of(const std::string &series_id) {
  const size_t pos = series_id.find('_');
  return pos == std::string::npos ? series_id : series_id.substr(0, pos);
}

} // namespace

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

std::vector<std::string> run_simulate(const SimulateParams &params, int workers) {
  std::vector<int> ids = params.scenario_ids;
  if (ids.empty()) {
    ids.resize(14);
    for (int i = 0; i < 14; ++i) ids[static_cast<size_t>(i)] = i + 1;
  }
  std::set<int> seen;
  for (int id : ids) {
    scenario_spec(id); // validates the range
    if (!seen.insert(id).second)
      throw UsageError("duplicate scenario id " + std::to_string(id));
  }
  if (params.n_series < 1) throw UsageError("n-series must be >= 1");
  if (params.out_dir.empty()) throw UsageError("output directory required");
  ensure_dir(params.out_dir);

  std::vector<std::string> files(ids.size() * 3);
  parallel_for(static_cast<int>(ids.size()), worker_count(workers), [&](int i) {
    const int id = ids[static_cast<size_t>(i)];
    const std::string prefix = scenario_prefix(id);
    const ScenarioBatch batch =
        simulate_scenario(scenario_spec(id), params.n_series, derive_seed(params.seed, id),
                          params.start_week, prefix);
    const SeriesGroup group = batch.as_group(prefix);
    const std::string counts = join_path(params.out_dir, prefix + "_counts.csv");
    const std::string labels = join_path(params.out_dir, prefix + "_labels.csv");
    const std::string truth = join_path(params.out_dir, prefix + "_truth.json");
    write_counts_csv(counts, group);
    write_labels_csv(labels, group);
    write_truth_json(truth, batch, id, params.start_week);
    files[3 * static_cast<size_t>(i)] = counts;
    files[3 * static_cast<size_t>(i) + 1] = labels;
    files[3 * static_cast<size_t>(i) + 2] = truth;
  });
  std::sort(files.begin(), files.end());
  return files;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

namespace {

struct GroupAssignment {
  std::string group_id;
  std::vector<size_t> members; // indices into the full group, ordered by id
};

std::string group_name(int index, int n_groups) {
  int width = 2;
  for (int v = n_groups - 1; v >= 100; v /= 10) ++width;
  char buf[16];
  std::snprintf(buf, sizeof(buf), "g%0*d", width, index);
  return buf;
}

bool has_outbreak_in_training(const SeriesGroup &full, const std::vector<size_t> &members,
                              WeekIndex train_start, WeekIndex train_end) {
  for (size_t idx : members) {
    const auto &s = full.series[idx];
    for (WeekIndex t = train_start; t <= train_end; ++t)
      if (s.label_at(t) == Label::Outbreak) return true;
  }
  return false;
}

std::vector<GroupAssignment> read_group_map(const std::string &path, const SeriesGroup &full) {
  std::map<std::string, std::vector<size_t>> by_group;
  std::map<std::string, size_t> index_of;
  for (size_t i = 0; i < full.series.size(); ++i) index_of[full.series[i].series_id] = i;

  const std::string text = read_text_file(path);
  std::set<std::string> assigned;
  size_t pos = 0;
  long line_no = 0;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != "series_id,group_id")
        throw DataError(path + ":1: expected header 'series_id,group_id'");
      continue;
    }
    if (line.empty()) continue;
    const size_t comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
      throw DataError(path + ":" + std::to_string(line_no) + ": expected 2 fields");
    const std::string sid = line.substr(0, comma);
    const std::string gid = line.substr(comma + 1);
    if (gid.empty() || gid.find_first_not_of("abcdefghijklmnopqrstuvwxyz"
                                             "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-") !=
                           std::string::npos)
      throw DataError(path + ":" + std::to_string(line_no) + ": bad group id '" + gid + "'");
    const auto it = index_of.find(sid);
    if (it == index_of.end())
      throw DataError(path + ":" + std::to_string(line_no) + ": series " + sid +
                      " not in the counts file");
    if (!assigned.insert(sid).second)
      throw DataError(path + ":" + std::to_string(line_no) + ": series " + sid +
                      " assigned twice");
    by_group[gid].push_back(it->second);
  }
  if (assigned.size() != full.series.size()) {
    for (const auto &s : full.series)
      if (!assigned.count(s.series_id))
        throw DataError(path + ": series " + s.series_id + " has no group assignment");
  }

  std::vector<GroupAssignment> groups;
  for (auto &[gid, members] : by_group) {
    std::sort(members.begin(), members.end());
    groups.push_back(GroupAssignment{gid, std::move(members)});
  }
  return groups;
}

std::vector<GroupAssignment> random_groups(const SeriesGroup &full, int n_groups,
                                           std::uint64_t seed, WeekIndex train_start,
                                           WeekIndex train_end) {
  const int n = static_cast<int>(full.series.size());
  if (n_groups < 1) throw UsageError("n-groups must be >= 1");
  if (n_groups > n)
    throw UsageError("n-groups (" + std::to_string(n_groups) + ") exceeds the series count (" +
                     std::to_string(n) + ")");

  for (int attempt = 0; attempt < 100; ++attempt) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    std::vector<size_t> perm(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<size_t>(i)] = static_cast<size_t>(i);
    for (int i = n - 1; i > 0; --i) {
      const int j = std::min(i, static_cast<int>(rng.uniform01() * (i + 1)));
      std::swap(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(j)]);
    }

    std::vector<GroupAssignment> groups(static_cast<size_t>(n_groups));
    const int base = n / n_groups, extra = n % n_groups;
    size_t cursor = 0;
    bool ok = true;
    for (int g = 0; g < n_groups; ++g) {
      const int size = base + (g < extra ? 1 : 0);
      auto &members = groups[static_cast<size_t>(g)].members;
      members.assign(perm.begin() + static_cast<long>(cursor),
                     perm.begin() + static_cast<long>(cursor) + size);
      cursor += static_cast<size_t>(size);
      std::sort(members.begin(), members.end());
      groups[static_cast<size_t>(g)].group_id = group_name(g, n_groups);
      if (!has_outbreak_in_training(full, members, train_start, train_end)) ok = false;
    }
    if (ok) return groups;
  }
  throw TrainingError("grouping failed: no assignment with an outbreak label per group's "
                      "training window in 100 attempts; use fewer groups or a group map");
}

SeriesGroup subgroup_of(const SeriesGroup &full, const GroupAssignment &assignment) {
  SeriesGroup sub;
  sub.group_id = assignment.group_id;
  for (size_t idx : assignment.members) sub.series.push_back(full.series[idx]);
  return sub;
}

} // namespace

std::vector<std::string> run_train(const TrainParams &params, int workers) {
  if (params.labels_path.empty())
    throw UsageError("supervised training requires a labels file");
  if (params.out_dir.empty()) throw UsageError("output directory required");

  IngestWarnings warnings;
  const SeriesGroup full = read_group_csv(params.counts_path, params.labels_path, &warnings);
  print_warnings(warnings);

  const WeekIndex grid_len = full.series.front().length();
  WeekIndex cur = grid_len;
  if (params.current_week) {
    cur = index_on_grid(full.series.front().start_week, *params.current_week);
    if (cur < 1 || cur > grid_len)
      throw DataError("current week " + format_iso_week(*params.current_week) +
                      " outside the data grid");
  }
  const WeekIndex full_len = static_cast<WeekIndex>(params.window_years) * 52 + params.holdout_u;
  const WeekIndex train_start = cur - full_len + 1;
  const WeekIndex train_end = cur - params.holdout_u;
  if (train_start < 1)
    throw DataError("history too short: the window needs " + std::to_string(full_len) +
                    " weeks ending at the current week");

  const std::vector<GroupAssignment> groups =
      params.group_map_path.empty()
          ? random_groups(full, params.n_groups, params.seed, train_start, train_end)
          : read_group_map(params.group_map_path, full);

  ensure_dir(params.out_dir);
  std::vector<std::string> files(groups.size());
  parallel_for(static_cast<int>(groups.size()), worker_count(workers), [&](int g) {
    const GroupAssignment &assignment = groups[static_cast<size_t>(g)];
    const SeriesGroup sub = subgroup_of(full, assignment);
    const TrainTestSplit split =
        train_test_split(sub, cur, params.window_years, params.holdout_u);

    TrainedModel model;
    model.group_id = assignment.group_id;
    for (const auto &s : sub.series) model.series_ids.push_back(s.series_id);
    model.t_origin = full.series.front().start_week;
    model.window_start = split.window_start;
    model.train_end = split.train_end;
    model.current_week = split.current_week;
    model.window_years = params.window_years;
    model.holdout_u = params.holdout_u;
    model.hmm = train_hmm(split.training, split.window_start);

    const std::string path =
        join_path(params.out_dir, "model_" + assignment.group_id + ".json");
    write_model_json(path, model);
    files[static_cast<size_t>(g)] = path;
  });

  std::string map_csv = "series_id,group_id\n";
  std::map<std::string, std::string> group_of;
  for (const auto &g : groups)
    for (size_t idx : g.members) group_of[full.series[idx].series_id] = g.group_id;
  for (const auto &[sid, gid] : group_of) map_csv += sid + "," + gid + "\n";
  const std::string map_path = join_path(params.out_dir, "groups.csv");
  write_text_atomic(map_path, map_csv);
  files.push_back(map_path);
  std::sort(files.begin(), files.end());
  return files;
}

// ---------------------------------------------------------------------------
// detect
// ---------------------------------------------------------------------------

namespace {

struct WeekRange {
  WeekIndex from = 0;
  WeekIndex to = 0;
};

WeekRange resolve_range(const DetectParams &params, const SeriesGroup &full) {
  const IsoWeek start = full.series.front().start_week;
  const WeekIndex grid_len = full.series.front().length();
  WeekRange range{grid_len, grid_len};
  if (params.week_from) range.from = index_on_grid(start, *params.week_from);
  if (params.week_to) range.to = index_on_grid(start, *params.week_to);
  if (params.week_from && !params.week_to) range.to = range.from;
  if (!params.week_from && params.week_to) range.from = range.to;
  if (range.from < 1 || range.to > grid_len || range.from > range.to)
    throw DataError("week range " + format_iso_week(week_at_index(start, range.from)) + ".." +
                    format_iso_week(week_at_index(start, range.to)) +
                    " outside the data grid");
  return range;
}

/// The slice scored by one forward pass: window weeks [win_start, upto] with
/// labels unknown from mask_from on.
struct ScoringWindow {
  WeekIndex win_start = 0;
  WeekIndex mask_from = 0;
  WeekIndex upto = 0;
};

ScoringWindow block_window(WeekIndex anchor, WeekIndex block_end, int window_years, int holdout_u,
                           const std::string &context) {
  ScoringWindow w;
  const WeekIndex full_len = static_cast<WeekIndex>(window_years) * 52 + holdout_u;
  w.win_start = anchor - full_len + 1;
  w.mask_from = anchor - holdout_u + 1;
  w.upto = block_end;
  if (w.win_start < 1)
    throw DataError(context + ": history too short, the window needs " +
                    std::to_string(full_len) + " weeks ending at week index " +
                    std::to_string(anchor));
  return w;
}

void run_detect_hmm(const DetectParams &params, const SeriesGroup &full, const WeekRange &range,
                    int workers, std::vector<std::vector<double>> &scores) {
  if (params.model_dir.empty()) throw UsageError("the hmm detector needs --models");
  const std::vector<TrainedModel> models = read_model_dir(params.model_dir);

  std::map<std::string, size_t> index_of;
  for (size_t i = 0; i < full.series.size(); ++i) index_of[full.series[i].series_id] = i;
  std::vector<std::vector<size_t>> members(models.size());
  std::set<std::string> covered;
  for (size_t m = 0; m < models.size(); ++m) {
    for (const auto &sid : models[m].series_ids) {
      const auto it = index_of.find(sid);
      if (it == index_of.end())
        throw DataError("model " + models[m].group_id + " expects series " + sid +
                        " which is not in the counts file");
      if (!covered.insert(sid).second)
        throw DataError("series " + sid + " appears in more than one model");
      members[m].push_back(it->second);
    }
  }
  std::string orphans;
  for (const auto &s : full.series)
    if (!covered.count(s.series_id)) orphans += (orphans.empty() ? "" : ", ") + s.series_id;
  if (!orphans.empty()) throw DataError("no model covers series: " + orphans);

  const bool rolling = params.refit_every > 0;
  if (rolling && params.labels_path.empty())
    throw UsageError("rolling refits need --labels; pass --refit-every 0 to score with the "
                     "stored models");
  const long t_offset =
      serial_of(full.series.front().start_week) - serial_of(models.front().t_origin);
  for (const auto &m : models)
    if (serial_of(m.t_origin) != serial_of(models.front().t_origin))
      throw DataError("models disagree on their week origin");

  const int block_len = rolling ? params.refit_every
                                : static_cast<int>(range.to - range.from + 1);
  const int n_blocks =
      static_cast<int>((range.to - range.from) / block_len) + 1;
  const int n_jobs = static_cast<int>(models.size()) * n_blocks;

  parallel_for(n_jobs, worker_count(workers), [&](int job) {
    const size_t m = static_cast<size_t>(job) / static_cast<size_t>(n_blocks);
    const int b = job % n_blocks;
    const TrainedModel &stored = models[m];
    const WeekIndex anchor = range.from + static_cast<WeekIndex>(b) * block_len;
    const WeekIndex block_end =
        std::min<WeekIndex>(anchor + block_len - 1, range.to);
    const ScoringWindow win = block_window(anchor, block_end, stored.window_years,
                                           stored.holdout_u, "group " + stored.group_id);

    HmmModel hmm;
    WeekIndex cov_start; // covariate index of the window's first week
    if (rolling) {
      SeriesGroup training;
      training.group_id = stored.group_id;
      for (size_t idx : members[m])
        training.series.push_back(slice_series(full.series[idx], win.win_start,
                                               win.mask_from - 1, win.mask_from));
      hmm = train_hmm(training, win.win_start);
      cov_start = win.win_start;
    } else {
      hmm = stored.hmm;
      cov_start = static_cast<WeekIndex>(win.win_start + t_offset);
    }

    for (size_t k = 0; k < members[m].size(); ++k) {
      const size_t idx = members[m][k];
      const SurveillanceSeries slice =
          slice_series(full.series[idx], win.win_start, win.upto, win.mask_from);
      const PosteriorResult result = forward_posterior(
          hmm, slice, static_cast<int>(k), cov_start, slice.length(), true, true);
      for (WeekIndex w = anchor; w <= block_end; ++w)
        scores[idx][static_cast<size_t>(w - range.from)] =
            result.filtered[static_cast<size_t>(w - win.win_start)];
    }
  });
}

void run_detect_baseline(const DetectParams &params, const SeriesGroup &full,
                         const WeekRange &range, int workers,
                         std::vector<std::vector<double>> &scores,
                         std::vector<std::vector<bool>> &alarms) {
  const int block_len = params.refit_every > 0 ? params.refit_every
                                               : static_cast<int>(range.to - range.from + 1);
  const int n_blocks = static_cast<int>((range.to - range.from) / block_len) + 1;

  parallel_for(static_cast<int>(full.series.size()), worker_count(workers), [&](int i) {
    const SurveillanceSeries &series = full.series[static_cast<size_t>(i)];
    for (int b = 0; b < n_blocks; ++b) {
      const WeekIndex anchor = range.from + static_cast<WeekIndex>(b) * block_len;
      const WeekIndex block_end = std::min<WeekIndex>(anchor + block_len - 1, range.to);
      const ScoringWindow win = block_window(anchor, block_end, params.window_years,
                                             params.holdout_u, "series " + series.series_id);
      const SurveillanceSeries train_slice =
          slice_series(series, win.win_start, win.mask_from - 1, win.mask_from);
      const BaselineFit fit =
          fit_baseline(train_slice, win.win_start, train_slice.length());
      for (WeekIndex w = anchor; w <= block_end; ++w) {
        const BaselineScore score = score_with_fit(fit, w, series.count_at(w), params.alpha);
        scores[static_cast<size_t>(i)][static_cast<size_t>(w - range.from)] = 1.0 - score.p_value;
        alarms[static_cast<size_t>(i)][static_cast<size_t>(w - range.from)] = score.alarm;
      }
    }
  });
}

} // namespace

void run_detect(const DetectParams &params, int workers) {
  if (!(params.threshold >= 0.0) || !(params.threshold <= 1.0))
    throw UsageError("threshold must lie in [0,1]");
  if (!(params.alpha > 0.0) || !(params.alpha < 1.0))
    throw UsageError("alpha must lie in (0,1)");
  if (params.refit_every < 0) throw UsageError("refit-every must be >= 0");
  if (params.out_path.empty()) throw UsageError("output path required");

  IngestWarnings warnings;
  const SeriesGroup full = read_group_csv(params.counts_path, params.labels_path, &warnings);
  print_warnings(warnings);
  const WeekRange range = resolve_range(params, full);
  const size_t n_weeks = static_cast<size_t>(range.to - range.from + 1);

  std::vector<std::vector<double>> scores(full.series.size(),
                                          std::vector<double>(n_weeks, 0.0));
  std::vector<std::vector<bool>> baseline_alarms;
  if (params.use_baseline) {
    baseline_alarms.assign(full.series.size(), std::vector<bool>(n_weeks, false));
    run_detect_baseline(params, full, range, workers, scores, baseline_alarms);
  } else {
    run_detect_hmm(params, full, range, workers, scores);
  }

  std::vector<ScoreRow> rows;
  rows.reserve(full.series.size() * n_weeks);
  const IsoWeek start = full.series.front().start_week;
  for (size_t i = 0; i < full.series.size(); ++i) {
    for (size_t w = 0; w < n_weeks; ++w) {
      ScoreRow row;
      row.series_id = full.series[i].series_id;
      row.week = week_at_index(start, range.from + static_cast<WeekIndex>(w));
      row.score = scores[i][w];
      row.alarm = params.use_baseline ? static_cast<bool>(baseline_alarms[i][w])
                                      : scores[i][w] >= params.threshold;
      rows.push_back(std::move(row));
    }
  }
  write_scores_csv(params.out_path, rows);
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

namespace {

using ScoreMap = std::map<std::pair<std::string, long>, std::pair<double, bool>>;

ScoreMap load_scores(const std::vector<std::string> &paths, const char *what) {
  if (paths.empty()) throw UsageError(std::string(what) + " scores file required");
  ScoreMap map;
  for (const auto &path : paths) {
    for (const auto &row : read_scores_csv(path)) {
      IsoWeek week = row.week;
      if (week.week == 53) week.week = 52;
      if (!map.emplace(std::make_pair(row.series_id, serial_of(week)),
                       std::make_pair(row.score, row.alarm))
               .second)
        throw DataError(path + ": duplicate score for " + row.series_id + " " +
                        format_iso_week(row.week));
    }
  }
  if (map.empty()) throw DataError(std::string(what) + " scores are empty");
  return map;
}

void check_aligned(const ScoreMap &hmm, const ScoreMap &baseline) {
  auto a = hmm.begin();
  auto b = baseline.begin();
  while (a != hmm.end() && b != baseline.end()) {
    if (a->first != b->first) {
      const bool hmm_first = a->first < b->first;
      const auto &key = hmm_first ? a->first : b->first;
      throw DataError("score files misaligned at " + key.first + " " +
                      format_iso_week(week_from_serial(key.second)) + ": only in the " +
                      (hmm_first ? "hmm" : "baseline") + " scores");
    }
    ++a;
    ++b;
  }
  if (a != hmm.end() || b != baseline.end()) {
    const auto &key = a != hmm.end() ? a->first : b->first;
    throw DataError("score files misaligned at " + key.first + " " +
                    format_iso_week(week_from_serial(key.second)) + ": only in the " +
                    (a != hmm.end() ? "hmm" : "baseline") + " scores");
  }
}

void count_episode_hits(const std::vector<ScoredWeek> &rows, const std::vector<Episode> &episodes,
                        Method method, double threshold, MethodReport &report) {
  report.episodes = static_cast<long>(episodes.size());
  report.episodes_hit = 0;
  for (const auto &e : episodes) {
    for (size_t row : e.member_rows) {
      if (score_of(rows[row], method) >= threshold) {
        ++report.episodes_hit;
        break;
      }
    }
  }
  report.episode_recall =
      report.episodes > 0
          ? static_cast<double>(report.episodes_hit) / static_cast<double>(report.episodes)
          : 0.0;
}

ScopeReport build_scope(const std::string &name, const std::vector<ScoredWeek> &rows,
                        double alpha, const std::optional<double> &ref_override) {
  ScopeReport scope;
  scope.scope = name;
  scope.n_weeks = static_cast<long>(rows.size());
  for (const auto &w : rows) (w.label == 1 ? scope.n_positive : scope.n_negative) += 1;
  if (scope.n_positive == 0 || scope.n_negative == 0) {
    scope.note = "skipped: needs both an outbreak and an endemic week";
    return scope;
  }

  scope.baseline.threshold = 1.0 - alpha;
  scope.baseline.metrics = metrics_at(rows, Method::Baseline, scope.baseline.threshold);
  scope.reference_sensitivity =
      ref_override ? *ref_override : scope.baseline.metrics.sensitivity;

  scope.hmm.threshold = scope.reference_sensitivity > 0.0
                            ? match_sensitivity(rows, Method::Hmm, scope.reference_sensitivity)
                            : std::numeric_limits<double>::infinity();
  scope.hmm.metrics = metrics_at(rows, Method::Hmm, scope.hmm.threshold);

  scope.hmm.roc = roc_curve(rows, Method::Hmm);
  scope.baseline.roc = roc_curve(rows, Method::Baseline);
  scope.hmm.auc = auc(scope.hmm.roc);
  scope.baseline.auc = auc(scope.baseline.roc);

  const std::vector<Episode> episodes = find_episodes(rows);
  count_episode_hits(rows, episodes, Method::Hmm, scope.hmm.threshold, scope.hmm);
  count_episode_hits(rows, episodes, Method::Baseline, scope.baseline.threshold, scope.baseline);

  scope.overlap = overlap_counts(rows, scope.hmm.threshold, scope.baseline.threshold);
  scope.strata = size_strata(rows, scope.hmm.threshold, scope.baseline.threshold);
  return scope;
}

json json_of_operating(const MethodReport &m) {
  json j{{"threshold", m.threshold},
         {"auc", m.auc},
         {"tp", m.metrics.tp},
         {"fp", m.metrics.fp},
         {"fn", m.metrics.fn},
         {"tn", m.metrics.tn},
         {"sensitivity", m.metrics.sensitivity},
         {"fpr", m.metrics.fpr},
         {"specificity", m.metrics.specificity},
         {"episodes", m.episodes},
         {"episodes_hit", m.episodes_hit},
         {"episode_recall", m.episode_recall}};
  j["precision"] = m.metrics.precision ? json(*m.metrics.precision) : json();
  return j;
}

json json_of_scope(const ScopeReport &scope) {
  json j{{"scope", scope.scope},
         {"n_weeks", scope.n_weeks},
         {"n_positive", scope.n_positive},
         {"n_negative", scope.n_negative}};
  if (!scope.note.empty()) {
    j["note"] = scope.note;
    return j;
  }
  j["reference_sensitivity"] = scope.reference_sensitivity;
  j["hmm"] = json_of_operating(scope.hmm);
  j["baseline"] = json_of_operating(scope.baseline);
  j["overlap"] = json{{"both", scope.overlap.both},
                      {"hmm_only", scope.overlap.hmm_only},
                      {"baseline_only", scope.overlap.baseline_only},
                      {"labeled_missed", scope.overlap.labeled_missed}};
  json strata = json::array();
  for (const auto &s : scope.strata) {
    strata.push_back(json{{"min_size", s.min_size},
                          {"max_size", s.max_size},
                          {"episodes", s.episodes},
                          {"episodes_hit_hmm", s.episodes_hit_hmm},
                          {"episodes_hit_baseline", s.episodes_hit_baseline},
                          {"weeks", s.weeks},
                          {"weeks_flagged_hmm", s.weeks_flagged_hmm},
                          {"weeks_flagged_baseline", s.weeks_flagged_baseline},
                          {"median_hmm_score", s.median_hmm_score},
                          {"median_baseline_score", s.median_baseline_score}});
  }
  j["strata"] = strata;
  return j;
}

void append_metric_rows(std::string &out, const ScopeReport &scope) {
  auto row = [&](const std::string &method, const std::string &metric, const std::string &value) {
    out += scope.scope + "," + method + "," + metric + "," + value + "\n";
  };
  if (!scope.note.empty()) {
    row("", "note", scope.note);
    return;
  }
  row("", "n_weeks", std::to_string(scope.n_weeks));
  row("", "n_positive", std::to_string(scope.n_positive));
  row("", "n_negative", std::to_string(scope.n_negative));
  row("", "reference_sensitivity", format_double(scope.reference_sensitivity));
  for (const auto *pair : {&scope.hmm, &scope.baseline}) {
    const std::string method = pair == &scope.hmm ? "hmm" : "baseline";
    row(method, "threshold", format_double(pair->threshold));
    row(method, "auc", format_double(pair->auc));
    row(method, "tp", std::to_string(pair->metrics.tp));
    row(method, "fp", std::to_string(pair->metrics.fp));
    row(method, "fn", std::to_string(pair->metrics.fn));
    row(method, "tn", std::to_string(pair->metrics.tn));
    row(method, "sensitivity", format_double(pair->metrics.sensitivity));
    row(method, "fpr", format_double(pair->metrics.fpr));
    row(method, "specificity", format_double(pair->metrics.specificity));
    row(method, "precision",
        pair->metrics.precision ? format_double(*pair->metrics.precision) : "");
    row(method, "episode_recall", format_double(pair->episode_recall));
  }
  row("", "overlap_both", std::to_string(scope.overlap.both));
  row("", "overlap_hmm_only", std::to_string(scope.overlap.hmm_only));
  row("", "overlap_baseline_only", std::to_string(scope.overlap.baseline_only));
  row("", "overlap_labeled_missed", std::to_string(scope.overlap.labeled_missed));
}

void append_roc_rows(std::string &out, const ScopeReport &scope) {
  if (!scope.note.empty()) return;
  for (const auto *pair : {&scope.hmm, &scope.baseline}) {
    const std::string method = pair == &scope.hmm ? "hmm" : "baseline";
    for (const auto &p : pair->roc)
      out += scope.scope + "," + method + "," + format_double(p.threshold) + "," +
             format_double(p.fpr) + "," + format_double(p.sensitivity) + "\n";
  }
}

void append_strata_rows(std::string &out, const ScopeReport &scope) {
  for (const auto &s : scope.strata) {
    out += scope.scope + "," + std::to_string(s.min_size) + "," + std::to_string(s.max_size) +
           "," + std::to_string(s.episodes) + "," + std::to_string(s.episodes_hit_hmm) + "," +
           std::to_string(s.episodes_hit_baseline) + "," + std::to_string(s.weeks) + "," +
           std::to_string(s.weeks_flagged_hmm) + "," + std::to_string(s.weeks_flagged_baseline) +
           "," + format_double(s.median_hmm_score) + "," +
           format_double(s.median_baseline_score) + "\n";
  }
}

} // namespace

EvalReportOut run_evaluate(const EvaluateParams &params) {
  if (!(params.alpha > 0.0) || !(params.alpha < 1.0))
    throw UsageError("alpha must lie in (0,1)");
  if (params.labels_paths.empty()) throw UsageError("labels file required");
  if (params.out_dir.empty()) throw UsageError("output directory required");

  const ScoreMap hmm_scores = load_scores(params.hmm_scores_paths, "hmm");
  const ScoreMap baseline_scores = load_scores(params.baseline_scores_paths, "baseline");
  check_aligned(hmm_scores, baseline_scores);
  const auto labels = read_labels_raw(params.labels_paths);
  const auto excess = read_truth_excess(params.truth_paths);

  EvalReportOut out;
  out.scored.reserve(hmm_scores.size());
  auto b = baseline_scores.begin();
  for (auto a = hmm_scores.begin(); a != hmm_scores.end(); ++a, ++b) {
    ScoredWeek w;
    w.series_id = a->first.first;
    w.week = static_cast<WeekIndex>(a->first.second);
    const auto label_it = labels.find(a->first);
    w.label = label_it != labels.end() ? label_it->second : 0;
    w.hmm_score = a->second.first;
    w.baseline_score = b->second.first;
    const auto excess_it = excess.find(a->first);
    if (excess_it != excess.end()) w.outbreak_size = excess_it->second;
    out.scored.push_back(std::move(w));
  }

  out.pooled = build_scope("pooled", out.scored, params.alpha, params.reference_sensitivity);
  if (params.split_by_prefix) {
    std::map<std::string, std::vector<ScoredWeek>> by_prefix;
    for (const auto &w : out.scored) by_prefix[prefix_of(w.series_id)].push_back(w);
    for (const auto &[prefix, rows] : by_prefix)
      out.per_prefix.push_back(build_scope(prefix, rows, params.alpha, std::nullopt));
  }

  ensure_dir(params.out_dir);
  json scopes = json::array();
  scopes.push_back(json_of_scope(out.pooled));
  for (const auto &scope : out.per_prefix) scopes.push_back(json_of_scope(scope));
  const json report{{"schema", 1}, {"alpha", params.alpha}, {"scopes", scopes}};
  write_text_atomic(join_path(params.out_dir, "report.json"), report.dump(2) + "\n");

  std::string metrics_csv = "scope,method,metric,value\n";
  std::string roc_csv = "scope,method,threshold,fpr,sensitivity\n";
  std::string strata_csv =
      "scope,min_size,max_size,episodes,episodes_hit_hmm,episodes_hit_baseline,weeks,"
      "weeks_flagged_hmm,weeks_flagged_baseline,median_hmm_score,median_baseline_score\n";
  append_metric_rows(metrics_csv, out.pooled);
  append_roc_rows(roc_csv, out.pooled);
  append_strata_rows(strata_csv, out.pooled);
  for (const auto &scope : out.per_prefix) {
    append_metric_rows(metrics_csv, scope);
    append_roc_rows(roc_csv, scope);
    append_strata_rows(strata_csv, scope);
  }
  write_text_atomic(join_path(params.out_dir, "metrics.csv"), metrics_csv);
  write_text_atomic(join_path(params.out_dir, "roc.csv"), roc_csv);
  write_text_atomic(join_path(params.out_dir, "strata.csv"), strata_csv);
  return out;
}

} // namespace epihmm
