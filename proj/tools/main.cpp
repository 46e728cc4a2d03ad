#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "epihmm/csv_io.hpp"
#include "epihmm/errors.hpp"
#include "epihmm/pipeline.hpp"
#include "epihmm/week.hpp"

namespace {

using epihmm::IsoWeek;

// CLI week arguments are usage errors, not data errors.
IsoWeek parse_week_arg(const std::string &text, const std::string &flag) {
  try {
    return epihmm::parse_iso_week(text);
  } catch (const epihmm::DataError &e) {
    throw epihmm::UsageError(flag + ": " + e.what());
  }
}

struct WeekOpt {
  std::string text;
  std::optional<IsoWeek> parse(const std::string &flag) const {
    if (text.empty()) return std::nullopt;
    return parse_week_arg(text, flag);
  }
};

int run(int argc, char **argv) {
  CLI::App app{"Weekly outbreak detection with a supervised two-state hidden Markov model"};
  app.require_subcommand(1);
  app.set_config("--config");
  int workers = 0;
  app.add_option("--workers", workers, "worker threads (default: EPIHMM_WORKERS or all cores)");

  // simulate
  auto *sim = app.add_subcommand("simulate", "generate benchmark scenario data");
  epihmm::SimulateParams sim_params;
  WeekOpt sim_start{"2004-W01"};
  sim->add_option("--scenarios", sim_params.scenario_ids, "scenario ids (default: all 14)");
  sim->add_option("--n-series", sim_params.n_series, "series per scenario")
      ->capture_default_str();
  sim->add_option("--seed", sim_params.seed, "master seed")->capture_default_str();
  sim->add_option("--start-week", sim_start.text, "first grid week (YYYY-Www)")
      ->capture_default_str();
  sim->add_option("--out", sim_params.out_dir, "output directory")->required();

  // train
  auto *train = app.add_subcommand("train", "fit per-group models from labeled counts");
  epihmm::TrainParams train_params;
  WeekOpt train_cur;
  train->add_option("--counts", train_params.counts_path, "counts CSV")->required();
  train->add_option("--labels", train_params.labels_path, "labels CSV")->required();
  train->add_option("--group-map", train_params.group_map_path,
                    "CSV assigning series to groups (series_id,group_id)");
  train->add_option("--groups", train_params.n_groups, "random groups when no map is given")
      ->capture_default_str();
  train->add_option("--current-week", train_cur.text,
                    "analysis week (default: last grid week)");
  train->add_option("--window-years", train_params.window_years, "training window, years")
      ->capture_default_str();
  train->add_option("--holdout", train_params.holdout_u, "holdout weeks before the current week")
      ->capture_default_str();
  train->add_option("--seed", train_params.seed, "seed for random grouping")
      ->capture_default_str();
  train->add_option("--out", train_params.out_dir, "output directory")->required();

  // detect
  auto *detect = app.add_subcommand("detect", "score weeks for outbreaks");
  epihmm::DetectParams detect_params;
  WeekOpt det_from, det_to;
  std::string detector = "hmm";
  detect->add_option("--models", detect_params.model_dir, "directory of trained models");
  detect->add_option("--counts", detect_params.counts_path, "counts CSV")->required();
  detect->add_option("--labels", detect_params.labels_path, "labels CSV");
  detect->add_option("--from", det_from.text, "first scored week (default: last grid week)");
  detect->add_option("--to", det_to.text, "last scored week");
  detect->add_option("--threshold", detect_params.threshold, "alarm threshold on the hmm score")
      ->capture_default_str();
  detect->add_option("--refit-every", detect_params.refit_every,
                     "refit cadence in weeks; 0 scores with the stored models")
      ->capture_default_str();
  detect->add_option("--detector", detector, "hmm or baseline")
      ->check(CLI::IsMember({"hmm", "baseline"}))
      ->capture_default_str();
  detect->add_option("--alpha", detect_params.alpha, "baseline alarm level")
      ->capture_default_str();
  detect->add_option("--window-years", detect_params.window_years,
                     "baseline training window, years")
      ->capture_default_str();
  detect->add_option("--holdout", detect_params.holdout_u,
                     "weeks excluded before each scored block")
      ->capture_default_str();
  detect->add_option("--out", detect_params.out_path, "scores CSV path")->required();

  // evaluate
  auto *eval = app.add_subcommand("evaluate", "compare hmm and baseline score files");
  epihmm::EvaluateParams eval_params;
  double ref_sens = -1.0;
  eval->add_option("--hmm-scores", eval_params.hmm_scores_paths, "hmm scores CSV (repeatable)")
      ->required();
  eval->add_option("--baseline-scores", eval_params.baseline_scores_paths,
                   "baseline scores CSV (repeatable)")
      ->required();
  eval->add_option("--labels", eval_params.labels_paths, "labels CSV (repeatable)")->required();
  eval->add_option("--truth", eval_params.truth_paths,
                   "simulation truth JSON for outbreak sizes (repeatable)");
  eval->add_option("--alpha", eval_params.alpha, "baseline alarm level")->capture_default_str();
  eval->add_option("--reference-sensitivity", ref_sens,
                   "match the hmm to this sensitivity instead of the baseline's");
  eval->add_flag("--split-by-prefix", eval_params.split_by_prefix,
                 "also report per series-id prefix (text before the first '_')");
  eval->add_option("--out", eval_params.out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 2;
  }

  if (sim->parsed()) {
    sim_params.start_week = *sim_start.parse("--start-week");
    for (const auto &f : epihmm::run_simulate(sim_params, workers)) std::cout << f << "\n";
    return 0;
  }
  if (train->parsed()) {
    train_params.current_week = train_cur.parse("--current-week");
    for (const auto &f : epihmm::run_train(train_params, workers)) std::cout << f << "\n";
    return 0;
  }
  if (detect->parsed()) {
    detect_params.week_from = det_from.parse("--from");
    detect_params.week_to = det_to.parse("--to");
    detect_params.use_baseline = detector == "baseline";
    epihmm::run_detect(detect_params, workers);
    std::cout << detect_params.out_path << "\n";
    return 0;
  }
  if (ref_sens >= 0.0) eval_params.reference_sensitivity = ref_sens;
  const epihmm::EvalReportOut report = epihmm::run_evaluate(eval_params);
  const auto &p = report.pooled;
  std::cout << "pooled: " << p.n_weeks << " weeks, " << p.n_positive << " outbreak\n";
  if (p.note.empty()) {
    std::cout << "hmm      auc " << epihmm::format_double(p.hmm.auc) << "  sens "
              << epihmm::format_double(p.hmm.metrics.sensitivity) << "  fpr "
              << epihmm::format_double(p.hmm.metrics.fpr) << "\n";
    std::cout << "baseline auc " << epihmm::format_double(p.baseline.auc) << "  sens "
              << epihmm::format_double(p.baseline.metrics.sensitivity) << "  fpr "
              << epihmm::format_double(p.baseline.metrics.fpr) << "\n";
  }
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  try {
    return run(argc, argv);
  } catch (const epihmm::UsageError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const epihmm::DataError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const epihmm::NumericError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
