#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "epihmm/hmm.hpp"
#include "epihmm/simulator.hpp"
#include "epihmm/week.hpp"

namespace epihmm {

/// A trained group model with enough window metadata to re-anchor its
/// covariate indices on any data grid: t_origin is the calendar week whose
/// covariate index is 1, and window_start/train_end/current_week are indices
/// on that axis.
struct TrainedModel {
  std::string group_id;
  std::vector<std::string> series_ids; // order matches the glm series index
  IsoWeek t_origin{};
  WeekIndex window_start = 0;
  WeekIndex train_end = 0;
  WeekIndex current_week = 0;
  int window_years = 5;
  int holdout_u = 26;
  HmmModel hmm;
};

/// Schema-versioned ("schema": 1) JSON document; doubles are written in
/// shortest round-trip form so write/read/write is byte-identical.
void write_model_json(const std::string &path, const TrainedModel &model);

TrainedModel read_model_json(const std::string &path);

/// All model_*.json files in a directory, ordered by group_id.
std::vector<TrainedModel> read_model_dir(const std::string &dir);

/// Truth sidecar for one simulated scenario: per series the seed, sampled
/// transition probabilities, outbreak weeks (1-based grid indices) and the
/// weekly excess over the rounded endemic mean.
void write_truth_json(const std::string &path, const ScenarioBatch &batch, int scenario_id,
                      IsoWeek start_week);

/// Weekly excess keyed by (series_id, week serial), merged over files.
std::map<std::pair<std::string, long>, long>
read_truth_excess(const std::vector<std::string> &paths);

} // namespace epihmm
