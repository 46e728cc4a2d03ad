#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "epihmm/evaluation.hpp"
#include "epihmm/model_io.hpp"

namespace epihmm {

struct SimulateParams {
  std::vector<int> scenario_ids; // empty means 1..14
  int n_series = 100;
  std::uint64_t seed = 1;
  IsoWeek start_week{2004, 1};
  std::string out_dir;
};

/// Writes s<id>_counts.csv, s<id>_labels.csv and s<id>_truth.json per
/// scenario; series ids are s<id>_r<index>. Per-scenario master seeds are
/// derive_seed(seed, scenario id). Returns the files written, sorted.
std::vector<std::string> run_simulate(const SimulateParams &params, int workers = 0);

struct TrainParams {
  std::string counts_path;
  std::string labels_path;
  std::string group_map_path; // optional, header series_id,group_id
  int n_groups = 20;
  std::optional<IsoWeek> current_week; // default: last grid week
  int window_years = 5;
  int holdout_u = 26;
  std::uint64_t seed = 1;
  std::string out_dir;
};

/// Random balanced grouping (unless a map is given) with up to 100 seeded
/// re-draws until every group has an outbreak label in its training window;
/// one model_<group>.json per group plus groups.csv. Returns files written.
std::vector<std::string> run_train(const TrainParams &params, int workers = 0);

struct DetectParams {
  std::string model_dir;   // required for the hmm detector
  std::string counts_path;
  std::string labels_path; // required when refitting
  std::optional<IsoWeek> week_from; // default: last grid week only
  std::optional<IsoWeek> week_to;
  double threshold = 0.5; // posterior alarm cutoff
  double alpha = 0.01;    // baseline tail alarm level
  int refit_every = 1;    // weeks between refits; 0 = never (stored model)
  bool use_baseline = false;
  int window_years = 5; // baseline window; the hmm uses its model's values
  int holdout_u = 26;
  std::string out_path;
};

/// Scores each (series, week) in range and writes one CSV
/// (series_id,year_week,score,alarm ordered by series then week). The score
/// is the posterior outbreak probability, or 1 - p_value for the baseline.
/// Models are refit on the window anchored at each refit block's first week;
/// labels after that window's training end are masked before scoring.
void run_detect(const DetectParams &params, int workers = 0);

struct EvaluateParams {
  std::vector<std::string> hmm_scores_paths;
  std::vector<std::string> baseline_scores_paths;
  std::vector<std::string> labels_paths;
  std::vector<std::string> truth_paths; // optional, enables size strata
  double alpha = 0.01;
  std::optional<double> reference_sensitivity; // default: baseline sensitivity at alpha
  bool split_by_prefix = false; // per-scope reports keyed by series_id prefix
  std::string out_dir;
};

struct MethodReport {
  double threshold = 0.0;
  double auc = 0.0;
  OperatingPoint metrics;
  std::vector<RocPoint> roc;
  long episodes = 0;
  long episodes_hit = 0;
  double episode_recall = 0.0;
};

struct ScopeReport {
  std::string scope;
  long n_weeks = 0;
  long n_positive = 0;
  long n_negative = 0;
  std::string note; // set when the scope was skipped
  double reference_sensitivity = 0.0;
  MethodReport hmm;
  MethodReport baseline;
  OverlapCounts overlap;
  std::vector<SizeStratum> strata;
};

struct EvalReportOut {
  ScopeReport pooled;
  std::vector<ScopeReport> per_prefix;
  std::vector<ScoredWeek> scored; // pooled rows, ordered by series then week
};

/// Joins the score files (which must cover identical (series, week) keys),
/// attaches labels and truth sizes, and writes report.json, roc.csv,
/// metrics.csv and strata.csv. The baseline operating threshold is
/// 1 - alpha on its score (the alarm rule p < alpha); the hmm threshold is
/// matched to the reference sensitivity.
EvalReportOut run_evaluate(const EvaluateParams &params);

} // namespace epihmm
