#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "epihmm/baseline.hpp"
#include "epihmm/errors.hpp"
#include "epihmm/evaluation.hpp"
#include "epihmm/hmm.hpp"
#include "epihmm/nbglm.hpp"
#include "epihmm/simulator.hpp"
#include "epihmm/timeseries.hpp"

namespace py = pybind11;
using namespace epihmm;

namespace {

Label label_from_int(int v) {
  if (v == 0) return Label::Endemic;
  if (v == 1) return Label::Outbreak;
  return Label::Unknown;
}

int label_to_int(Label l) {
  if (l == Label::Endemic) return 0;
  if (l == Label::Outbreak) return 1;
  return -1;
}

SurveillanceSeries make_series(const std::vector<int> &counts,
                               const std::optional<std::vector<int>> &labels,
                               const std::string &series_id) {
  SurveillanceSeries s;
  s.series_id = series_id;
  s.start_week = IsoWeek{2000, 1};
  s.counts = counts;
  if (labels) {
    if (labels->size() != counts.size())
      throw DataError("labels and counts lengths differ for " + series_id);
    for (int v : *labels) s.labels.push_back(label_from_int(v));
  } else {
    s.labels.assign(counts.size(), Label::Unknown);
  }
  return s;
}

SeriesGroup make_group(const std::vector<std::vector<int>> &counts,
                       const std::vector<std::vector<int>> &labels) {
  if (counts.size() != labels.size())
    throw DataError("need one label sequence per count sequence");
  SeriesGroup group;
  group.group_id = "py";
  for (size_t i = 0; i < counts.size(); ++i) {
    char sid[16];
    std::snprintf(sid, sizeof(sid), "s%03zu", i);
    group.series.push_back(make_series(counts[i], labels[i], sid));
  }
  group.validate();
  return group;
}

py::dict posterior_dict(const PosteriorResult &r) {
  py::dict d;
  d["log_likelihood"] = r.log_likelihood;
  d["p_outbreak"] = r.p_outbreak;
  d["filtered"] = r.filtered;
  return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Supervised hidden-Markov outbreak detection core";

  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  // negative binomial tools
  m.def("nb_log_pmf", &nb_log_pmf, py::arg("k"), py::arg("mean"), py::arg("size"),
        "log P(X = k) for X ~ NB(mean, size)");
  m.def("nb_upper_tail", &nb_upper_tail, py::arg("k"), py::arg("mean"), py::arg("size"),
        "P(X >= k)");
  m.def("nb_alarm_threshold", &nb_alarm_threshold, py::arg("alpha"), py::arg("mean"),
        py::arg("size"), "smallest k with P(X >= k) < alpha");

  // simulation
  m.def(
      "scenario_params",
      [](int id) {
        const ScenarioSpec s = scenario_spec(id);
        py::dict d;
        d["id"] = s.id;
        d["beta0"] = s.beta0;
        d["beta1"] = s.beta1;
        d["beta2"] = s.beta2;
        d["beta3"] = s.beta3;
        d["phi"] = s.phi;
        d["length"] = s.length_T;
        return d;
      },
      py::arg("scenario"));
  m.def(
      "endemic_mean",
      [](int scenario, WeekIndex t) { return endemic_mean(scenario_spec(scenario), t); },
      py::arg("scenario"), py::arg("t"), "weekly endemic-state mean of a benchmark scenario");
  m.def("calibrate_outbreak_mean", &calibrate_outbreak_mean, py::arg("endemic_mu"),
        py::arg("phi"), py::arg("target_power") = 0.5, py::arg("alpha") = 0.01);
  m.def(
      "simulate_series",
      [](int scenario, std::uint64_t seed) {
        const SimulatedSeries sim = simulate_series(scenario_spec(scenario), seed);
        py::dict d;
        d["counts"] = sim.series.counts;
        std::vector<int> labels;
        for (Label l : sim.series.labels) labels.push_back(label_to_int(l));
        d["labels"] = labels;
        d["a00"] = sim.a00;
        d["a11"] = sim.a11;
        d["endemic_mu"] = sim.endemic_mu;
        d["outbreak_mu"] = sim.outbreak_mu;
        return d;
      },
      py::arg("scenario"), py::arg("seed"));

  // supervised hmm
  m.def(
      "estimate_transitions",
      [](const std::vector<std::vector<int>> &labels, double pseudocount) {
        SeriesGroup group;
        group.group_id = "py";
        for (size_t i = 0; i < labels.size(); ++i) {
          SurveillanceSeries s;
          s.series_id = "s" + std::to_string(i);
          s.start_week = IsoWeek{2000, 1};
          s.counts.assign(labels[i].size(), 0);
          for (int v : labels[i]) s.labels.push_back(label_from_int(v));
          group.series.push_back(std::move(s));
        }
        const TransitionEstimate est = estimate_transitions(group, pseudocount);
        py::dict d;
        d["pi"] = est.pi;
        d["trans"] = est.trans;
        return d;
      },
      py::arg("labels"), py::arg("pseudocount") = 0.0,
      "closed-form transition/initial estimates from labels (0 endemic, 1 outbreak, "
      "-1 unknown)");

  py::class_<HmmModel>(m, "HmmModel")
      .def_property_readonly("pi", [](const HmmModel &h) { return h.pi; })
      .def_property_readonly("trans", [](const HmmModel &h) { return h.trans; })
      .def_property_readonly("beta_outbreak",
                             [](const HmmModel &h) { return h.glm.beta_outbreak(); })
      .def_property_readonly("log_likelihood", [](const HmmModel &h) { return h.glm.log_likelihood; });

  m.def(
      "fit_hmm",
      [](const std::vector<std::vector<int>> &counts,
         const std::vector<std::vector<int>> &labels, WeekIndex window_start) {
        SeriesGroup group;
        group.group_id = "py";
        for (size_t i = 0; i < counts.size(); ++i) {
          char sid[16];
          std::snprintf(sid, sizeof(sid), "s%03zu", i);
          group.series.push_back(make_series(counts[i], labels.at(i), sid));
        }
        group.validate();
        return train_hmm(group, window_start);
      },
      py::arg("counts"), py::arg("labels"), py::arg("window_start") = 1,
      "fit the pooled emission model and transitions on a labeled group");

  m.def(
      "outbreak_posterior",
      [](const HmmModel &model, const std::vector<int> &counts,
         const std::optional<std::vector<int>> &labels, int series_index,
         WeekIndex window_start, std::optional<WeekIndex> upto, bool clamp) {
        const SurveillanceSeries s = make_series(counts, labels, "query");
        const WeekIndex last = upto.value_or(s.length());
        return posterior_dict(
            forward_posterior(model, s, series_index, window_start, last, clamp, true));
      },
      py::arg("model"), py::arg("counts"), py::arg("labels") = py::none(),
      py::arg("series_index") = 0, py::arg("window_start") = 1, py::arg("upto") = py::none(),
      py::arg("clamp") = true,
      "filtered outbreak probabilities for one series under a fitted model");

  // baseline detector
  m.def(
      "baseline_score",
      [](const std::vector<int> &counts, const std::optional<std::vector<int>> &labels,
         std::optional<WeekIndex> current_week, double alpha, int window_years, int holdout) {
        const SurveillanceSeries s = make_series(counts, labels, "query");
        const WeekIndex cur = current_week.value_or(s.length());
        const BaselineScore r = baseline_score(s, cur, alpha, window_years, holdout);
        py::dict d;
        d["p_value"] = r.p_value;
        d["alarm"] = r.alarm;
        d["threshold"] = r.threshold;
        d["mu"] = r.mu;
        d["size_r"] = r.size_r;
        d["poisson_fallback"] = r.poisson_fallback;
        return d;
      },
      py::arg("counts"), py::arg("labels") = py::none(), py::arg("current_week") = py::none(),
      py::arg("alpha") = 0.01, py::arg("window_years") = 5, py::arg("holdout") = 26,
      "seasonal count-regression alarm for the current week of one series");

  // evaluation
  m.def(
      "auc_of",
      [](const std::vector<double> &scores, const std::vector<int> &labels) {
        if (scores.size() != labels.size()) throw DataError("scores and labels lengths differ");
        std::vector<ScoredWeek> rows;
        for (size_t i = 0; i < scores.size(); ++i) {
          ScoredWeek w;
          w.series_id = "s";
          w.week = static_cast<WeekIndex>(i + 1);
          w.label = labels[i] ? 1 : 0;
          w.hmm_score = scores[i];
          w.baseline_score = scores[i];
          rows.push_back(std::move(w));
        }
        return auc(roc_curve(rows, Method::Hmm));
      },
      py::arg("scores"), py::arg("labels"), "area under the ROC curve");

  m.def(
      "match_threshold",
      [](const std::vector<double> &scores, const std::vector<int> &labels, double reference) {
        if (scores.size() != labels.size()) throw DataError("scores and labels lengths differ");
        std::vector<ScoredWeek> rows;
        for (size_t i = 0; i < scores.size(); ++i) {
          ScoredWeek w;
          w.series_id = "s";
          w.week = static_cast<WeekIndex>(i + 1);
          w.label = labels[i] ? 1 : 0;
          w.hmm_score = scores[i];
          w.baseline_score = scores[i];
          rows.push_back(std::move(w));
        }
        return match_sensitivity(rows, Method::Hmm, reference);
      },
      py::arg("scores"), py::arg("labels"), py::arg("reference"),
      "largest threshold whose sensitivity reaches the reference");
}
