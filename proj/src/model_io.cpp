#include "epihmm/model_io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include <json.hpp>

#include "epihmm/csv_io.hpp"
#include "epihmm/errors.hpp"

namespace epihmm {

using nlohmann::json;

namespace {

json json_of_model(const TrainedModel &model) {
  const GlmFit &glm = model.hmm.glm;
  json series = json::array();
  for (int n = 0; n < glm.n_series; ++n) {
    series.push_back(json{{"beta0", glm.beta0(n)},
                          {"trend", glm.beta_trend(n)},
                          {"cos", glm.beta_cos(n)},
                          {"sin", glm.beta_sin(n)},
                          {"size_r", glm.size_r[static_cast<size_t>(n)]},
                          {"all_zero", static_cast<bool>(glm.series_all_zero[static_cast<size_t>(n)])}});
  }
  return json{{"schema", 1},
              {"group_id", model.group_id},
              {"series_ids", model.series_ids},
              {"t_origin", format_iso_week(model.t_origin)},
              {"window_start", model.window_start},
              {"train_end", model.train_end},
              {"current_week", model.current_week},
              {"window_years", model.window_years},
              {"holdout_u", model.holdout_u},
              {"pi", model.hmm.pi},
              {"trans", model.hmm.trans},
              {"glm", json{{"beta_outbreak", glm.beta_outbreak()},
                           {"beta4_capped", glm.beta4_capped},
                           {"converged", glm.converged},
                           {"iterations", glm.iterations},
                           {"log_likelihood", glm.log_likelihood},
                           {"deviance", glm.deviance},
                           {"series", series}}}};
}

json parse_json_file(const std::string &path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::parse_error &e) {
    throw DataError(path + ": " + e.what());
  }
}

void require_schema(const json &doc, const std::string &path) {
  if (!doc.is_object() || !doc.contains("schema") || doc["schema"] != 1)
    throw DataError(path + ": expected a schema 1 document");
}

} // namespace

void write_model_json(const std::string &path, const TrainedModel &model) {
  write_text_atomic(path, json_of_model(model).dump(2) + "\n");
}

TrainedModel read_model_json(const std::string &path) {
  const json doc = parse_json_file(path);
  require_schema(doc, path);
  TrainedModel model;
  try {
    model.group_id = doc.at("group_id").get<std::string>();
    model.series_ids = doc.at("series_ids").get<std::vector<std::string>>();
    model.t_origin = parse_iso_week(doc.at("t_origin").get<std::string>());
    model.window_start = doc.at("window_start").get<WeekIndex>();
    model.train_end = doc.at("train_end").get<WeekIndex>();
    model.current_week = doc.at("current_week").get<WeekIndex>();
    model.window_years = doc.at("window_years").get<int>();
    model.holdout_u = doc.at("holdout_u").get<int>();
    model.hmm.pi = doc.at("pi").get<std::array<double, 2>>();
    model.hmm.trans = doc.at("trans").get<std::array<std::array<double, 2>, 2>>();

    const json &glm_doc = doc.at("glm");
    GlmFit &glm = model.hmm.glm;
    const json &series = glm_doc.at("series");
    glm.n_series = static_cast<int>(series.size());
    glm.outbreak_column = true;
    glm.beta.assign(static_cast<size_t>(4 * glm.n_series + 1), 0.0);
    glm.size_r.resize(static_cast<size_t>(glm.n_series));
    glm.series_all_zero.resize(static_cast<size_t>(glm.n_series));
    for (int n = 0; n < glm.n_series; ++n) {
      const json &s = series[static_cast<size_t>(n)];
      glm.beta[4 * static_cast<size_t>(n)] = s.at("beta0").get<double>();
      glm.beta[4 * static_cast<size_t>(n) + 1] = s.at("trend").get<double>();
      glm.beta[4 * static_cast<size_t>(n) + 2] = s.at("cos").get<double>();
      glm.beta[4 * static_cast<size_t>(n) + 3] = s.at("sin").get<double>();
      glm.size_r[static_cast<size_t>(n)] = s.at("size_r").get<double>();
      glm.series_all_zero[static_cast<size_t>(n)] = s.at("all_zero").get<bool>();
    }
    glm.beta.back() = glm_doc.at("beta_outbreak").get<double>();
    glm.beta4_capped = glm_doc.at("beta4_capped").get<bool>();
    glm.converged = glm_doc.at("converged").get<bool>();
    glm.iterations = glm_doc.at("iterations").get<int>();
    glm.log_likelihood = glm_doc.at("log_likelihood").get<double>();
    glm.deviance = glm_doc.at("deviance").get<double>();
  } catch (const json::exception &e) {
    throw DataError(path + ": " + e.what());
  }
  if (static_cast<int>(model.series_ids.size()) != model.hmm.glm.n_series)
    throw DataError(path + ": series_ids and glm series disagree");
  return model;
}

std::vector<TrainedModel> read_model_dir(const std::string &dir) {
  namespace fs = std::filesystem;
  std::vector<std::string> paths;
  std::error_code ec;
  for (const auto &entry : fs::directory_iterator(dir, ec)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("model_", 0) == 0 && name.size() > 5 &&
        name.compare(name.size() - 5, 5, ".json") == 0)
      paths.push_back(entry.path().string());
  }
  if (ec) throw DataError("cannot list model directory " + dir + ": " + ec.message());
  if (paths.empty()) throw DataError("no model_*.json files in " + dir);
  std::vector<TrainedModel> models;
  models.reserve(paths.size());
  for (const auto &p : paths) models.push_back(read_model_json(p));
  std::sort(models.begin(), models.end(),
            [](const TrainedModel &a, const TrainedModel &b) { return a.group_id < b.group_id; });
  return models;
}

void write_truth_json(const std::string &path, const ScenarioBatch &batch, int scenario_id,
                      IsoWeek start_week) {
  json series = json::array();
  for (const auto &sim : batch.series) {
    json outbreak_weeks = json::array();
    json excess = json::array();
    for (WeekIndex t = 1; t <= sim.series.length(); ++t) {
      if (sim.series.label_at(t) != Label::Outbreak) continue;
      outbreak_weeks.push_back(t);
      excess.push_back(static_cast<long>(sim.series.count_at(t)) -
                       std::llround(sim.endemic_mu[static_cast<size_t>(t - 1)]));
    }
    series.push_back(json{{"id", sim.series.series_id},
                          {"seed", sim.seed},
                          {"a00", sim.a00},
                          {"a11", sim.a11},
                          {"outbreak_weeks", outbreak_weeks},
                          {"excess", excess}});
  }
  const json doc{{"schema", 1},
                 {"scenario", scenario_id},
                 {"start_week", format_iso_week(start_week)},
                 {"series", series}};
  write_text_atomic(path, doc.dump(2) + "\n");
}

std::map<std::pair<std::string, long>, long>
read_truth_excess(const std::vector<std::string> &paths) {
  std::map<std::pair<std::string, long>, long> excess;
  for (const auto &path : paths) {
    const json doc = parse_json_file(path);
    require_schema(doc, path);
    try {
      const long origin = serial_of(parse_iso_week(doc.at("start_week").get<std::string>()));
      for (const auto &s : doc.at("series")) {
        const std::string id = s.at("id").get<std::string>();
        const auto &weeks = s.at("outbreak_weeks");
        const auto &values = s.at("excess");
        if (weeks.size() != values.size())
          throw DataError(path + ": outbreak_weeks and excess lengths differ for " + id);
        for (size_t i = 0; i < weeks.size(); ++i) {
          const long serial = origin + weeks[i].get<long>() - 1;
          if (!excess.emplace(std::make_pair(id, serial), values[i].get<long>()).second)
            throw DataError(path + ": duplicate truth entry for " + id);
        }
      }
    } catch (const json::exception &e) {
      throw DataError(path + ": " + e.what());
    }
  }
  return excess;
}

} // namespace epihmm
