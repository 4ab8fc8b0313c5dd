#include "confee/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "confee/data.hpp"
#include "confee/report.hpp"
#include "confee/validity.hpp"

namespace confee::cli {

using ojson = nlohmann::ordered_json;

namespace {

std::uint64_t default_seed() {
  if (const char* env = std::getenv("CONFEE_SEED")) {
    try {
      std::size_t pos = 0;
      const auto v = std::stoull(env, &pos);
      if (pos == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw Error(ErrorKind::Usage, "CONFEE_SEED must be an unsigned integer");
  }
  return 1;
}

std::optional<std::string> find_config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Usage, "config '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot write '" + out_path + "'");
  f << text;
  if (!f) throw Error(ErrorKind::Io, "write to '" + out_path + "' failed");
}

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

ojson label_json(const Task& task, Label y) {
  if (task.kind == TaskKind::classification) return task.label_name(y);
  return y;
}

ojson index_list(std::span<const std::size_t> idx) {
  ojson out = ojson::array();
  for (auto i : idx) out.push_back(i + 1);
  return out;
}

// ---------------------------------------------------------------------------
// predict

struct TestObjects {
  std::vector<std::vector<double>> objects;
  std::vector<std::optional<Label>> labels;
};

Task file_task(const ExperimentConfig& cfg) {
  if (cfg.task == "regression") {
    if (cfg.grid.empty()) throw Error(ErrorKind::Usage, "regression input needs --grid");
    return Task::regression(parse_grid(cfg.grid));
  }
  Task t;
  t.kind = TaskKind::classification;
  t.class_names = cfg.labels;  // empty: inferred from the training file
  return t;
}

ojson split_state_json(const SplitEPredictor& p) {
  return {{"proper_size", p.split().proper_size},
          {"calibration_size", p.split().calibration_size},
          {"calibration_summaries", std::vector<double>(p.calibration_summaries().values().begin(),
                                                        p.calibration_summaries().values().end())}};
}

ojson label_detail(const Task& task, const SplitEPredictor& p, std::span<const double> x, Label y) {
  const auto alpha = p.normalized(x, y);
  return {{"label", label_json(task, y)},
          {"sigma", p.test_summary(x, y)},
          {"alphas", std::vector<double>(alpha.values().begin(), alpha.values().end())}};
}

int cmd_predict(const ExperimentConfig& cfg, const std::string& out_path, std::ostream& out) {
  std::optional<Dataset> training;
  TestObjects tests;
  if (!cfg.scenario.empty()) {
    const auto scenario = scenario_preset(cfg.scenario);
    const auto all = sample(scenario, cfg.n + cfg.test_n, cfg.seed);
    training = all.slice(0, cfg.n);
    for (std::size_t i = cfg.n; i < all.size(); ++i) {
      tests.objects.push_back(all[i].object);
      tests.labels.push_back(all[i].label);
    }
  } else {
    training = load_csv(cfg.train_path, file_task(cfg));
  }
  if (!cfg.test_path.empty()) {
    auto table = load_objects_csv(cfg.test_path, training->task());
    tests = {std::move(table.objects), std::move(table.labels)};
  }
  if (tests.objects.empty()) throw Error(ErrorKind::Usage, "predict needs --test or --scenario");

  const auto& task = training->task();
  const auto labels = task.candidate_labels();
  const auto pc = cfg.predictor_config();
  const auto fold_seed = derive_seed(cfg.seed, 1);

  std::optional<SplitEPredictor> split;
  std::optional<CrossEPredictor> cross;
  ojson state;
  if (pc.kind == PredictorKind::split) {
    split = fit_split(*training, resolve_calibration_size(pc, training->size()), pc.rule,
                      pc.normalizer);
    state = split_state_json(*split);
  } else if (pc.kind == PredictorKind::cross) {
    cross = fit_cross(*training, pc.folds, fold_seed, pc.rule, pc.normalizer, pc.weighting);
    ojson folds = ojson::array();
    for (std::size_t k = 0; k < cross->partition().fold_count(); ++k) {
      auto f = split_state_json(cross->per_fold()[k]);
      ojson entry = {{"fold", k + 1}, {"calibration_indices", index_list(cross->partition().fold(k))}};
      entry.update(f);
      folds.push_back(entry);
    }
    state = {{"folds", folds}};
  }

  ojson objects = ojson::array();
  for (std::size_t t = 0; t < tests.objects.size(); ++t) {
    const auto& x = tests.objects[t];
    if (x.size() != training->dim())
      throw Error(ErrorKind::DimensionMismatch,
                  "test object " + std::to_string(t + 1) + " has the wrong dimension");
    ojson o;
    o["index"] = t + 1;
    o["object"] = x;
    if (tests.labels[t]) o["true_label"] = label_json(task, *tests.labels[t]);

    std::vector<PlausibilityEntry> entries;
    ojson folds = ojson::array(), verbose = ojson::array();
    for (Label y : labels) {
      double e = 0.0;
      if (split) {
        e = split->e_value(x, y);
        if (cfg.verbose) verbose.push_back(label_detail(task, *split, x, y));
      } else if (cross) {
        const auto per_fold = cross->fold_e_values(x, y);
        e = cross->e_value(x, y);
        folds.push_back({{"label", label_json(task, y)}, {"fold_e_values", per_fold}, {"mean", e}});
        if (cfg.verbose) {
          ojson detail = ojson::array();
          for (const auto& p : cross->per_fold()) detail.push_back(label_detail(task, p, x, y));
          verbose.push_back({{"label", label_json(task, y)}, {"folds", detail}});
        }
      } else if (pc.kind == PredictorKind::full) {
        const Label one[] = {y};
        e = full_conformal_e_predict(*training, x, one,
                                     support_set_assignment(make_provider(pc.provider, x.size())))
                .at(y);
        if (cfg.verbose) {
          std::vector<Observation> zs(training->observations().begin(),
                                      training->observations().end());
          zs.push_back({x, y});
          const auto sv = make_provider(pc.provider, x.size())(zs);
          verbose.push_back({{"label", label_json(task, y)}, {"support_indices", index_list(sv.indices)}});
        }
      } else {
        e = pc.constant;
      }
      entries.push_back({y, e});
    }
    const PlausibilityTable table(std::move(entries));

    ojson values = ojson::array();
    for (const auto& en : table.entries())
      values.push_back({{"label", label_json(task, en.label)}, {"e", en.e}});
    o["e_values"] = values;
    ojson sets = ojson::array();
    for (double eps : cfg.epsilons) {
      ojson members = ojson::array();
      for (Label y : e_prediction_set(table, eps)) members.push_back(label_json(task, y));
      sets.push_back({{"epsilon", eps}, {"labels", members}});
    }
    o["prediction_sets"] = sets;
    if (cross) o["folds"] = folds;
    if (cfg.verbose) o["detail"] = verbose;
    objects.push_back(o);
  }

  ojson report;
  report["command"] = "predict";
  report["config"] = to_json(cfg);
  ojson task_json;
  task_json["kind"] = task.kind == TaskKind::classification ? "classification" : "regression";
  ojson label_list = ojson::array();
  for (Label y : labels) label_list.push_back(label_json(task, y));
  task_json["labels"] = label_list;
  report["task"] = task_json;
  report["training_size"] = training->size();
  if (!state.is_null()) report["predictor_state"] = state;
  report["test_objects"] = objects;
  emit(dump(report), out_path, out);
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_validate(const ExperimentConfig& cfg, std::size_t threads, const std::string& out_path,
                 std::ostream& out) {
  const auto scenario = scenario_preset(cfg.scenario);
  const auto pc = cfg.predictor_config();
  ojson body;
  Verdict verdict = Verdict::consistent;
  if (cfg.mode == "space") {
    SpaceValidityOptions o;
    o.n = cfg.n;
    o.trials = cfg.trials;
    o.seed = cfg.seed;
    o.threads = threads;
    o.epsilons = cfg.epsilons;
    const auto r = mc_space_validity(scenario, pc, o);
    body = to_json(r);
    verdict = r.verdict;
  } else if (cfg.mode == "time") {
    TimeValidityOptions o;
    o.n_rounds = cfg.rounds;
    o.burn_in = cfg.burn_in;
    o.tolerance = cfg.tolerance;
    o.seed = cfg.seed;
    o.threads = threads;
    const auto r = online_time_validity(scenario, pc, o);
    body = to_json(r);
    verdict = r.verdict;
  } else {
    CompareOptions o;
    o.n = cfg.n;
    o.trials = cfg.trials;
    o.seed = cfg.seed;
    o.threads = threads;
    o.epsilons = cfg.epsilons;
    const auto r = compare_e_vs_p(scenario, pc, o);
    body = to_json(r);
    verdict = r.verdict;
  }
  ojson report;
  report["command"] = "validate";
  report["mode"] = cfg.mode;
  report["config"] = to_json(cfg);
  report["report"] = body;
  emit(dump(report), out_path, out);
  return verdict == Verdict::consistent ? kExitOk : kExitViolation;
}

int cmd_gen(const ExperimentConfig& cfg, const std::string& out_path, std::ostream& out) {
  const auto data = sample(scenario_preset(cfg.scenario), cfg.n, cfg.seed);
  std::ostringstream os;
  write_csv(os, data);
  emit(os.str(), out_path, out);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    ExperimentConfig cfg;
    cfg.seed = default_seed();
    if (const auto path = find_config_path(args)) cfg = load_config(*path);

    std::string out_path, config_path;
    std::size_t threads = 1;

    CLI::App app{"confee: conformal e-prediction and validity harnesses", "confee"};
    app.require_subcommand(1);

    auto common = [&](CLI::App* sub) {
      sub->add_option("--config", config_path, "Re-run the config embedded in a report (or a bare config)");
      sub->add_option("--out", out_path, "Output path (default: stdout)");
      sub->add_option("--seed", cfg.seed, "Master seed (default: $CONFEE_SEED or 1)");
      sub->add_option("--scenario", cfg.scenario, "Scenario preset")
          ->check(CLI::IsMember(scenario_preset_names()));
      sub->add_option("--n", cfg.n, "Training set size (gen: number of rows)");
    };
    auto predictor_opts = [&](CLI::App* sub) {
      sub->add_option("--predictor", cfg.predictor, "split | cross | full | const1 | const2");
      sub->add_option("--c", cfg.calibration_size, "Calibration size for split (default max(1, n/5))");
      sub->add_option("--K", cfg.folds, "Number of folds for cross");
      sub->add_option("--weighting", cfg.weighting, "uniform | size");
      sub->add_option("--rule", cfg.rule, "knn | ridge");
      sub->add_option("--k", cfg.k, "knn neighbour count");
      sub->add_option("--lambda", cfg.lambda, "ridge regularization");
      sub->add_option("--normalizer", cfg.normalizer, "mean | sum");
      sub->add_option("--provider", cfg.provider, "Support provider for full: margin | all");
      sub->add_option("--margin-w", cfg.margin_weights, "Separator weights for the margin provider")
          ->delimiter(',');
      sub->add_option("--margin-b", cfg.margin_bias, "Separator bias for the margin provider");
      sub->add_option("--epsilon", cfg.epsilons, "Significance levels")->delimiter(',');
      sub->add_flag("--verbose", cfg.verbose, "Include intermediate summaries and alphas");
    };

    auto* gen = app.add_subcommand("gen", "Sample a scenario to CSV");
    common(gen);

    auto* predict = app.add_subcommand("predict", "Plausibility tables and prediction sets");
    common(predict);
    predictor_opts(predict);
    predict->add_option("--train", cfg.train_path, "Training CSV (header x1..xd,y)");
    predict->add_option("--test", cfg.test_path, "Test objects CSV (y optional)");
    predict->add_option("--test-n", cfg.test_n, "Test objects drawn from the scenario");
    predict->add_option("--task", cfg.task, "classification | regression (CSV input)");
    predict->add_option("--labels", cfg.labels, "Classification label space")->delimiter(',');
    predict->add_option("--grid", cfg.grid, "Regression grid: lo:hi:step or a,b,c");

    auto* validate = app.add_subcommand("validate", "Monte Carlo validity checks");
    common(validate);
    predictor_opts(validate);
    validate->add_option("--mode", cfg.mode, "space | time | compare");
    validate->add_option("--trials", cfg.trials, "Monte Carlo trials (space, compare)");
    validate->add_option("--rounds", cfg.rounds, "Online rounds (time)");
    validate->add_option("--burnin", cfg.burn_in, "Warm-start rounds (time)");
    validate->add_option("--tolerance", cfg.tolerance, "Allowed excess of the final running mean (time)");
    validate->add_option("--threads", threads, "Worker threads; results do not depend on it");

    try {
      std::vector<std::string> reversed(args.rbegin(), args.rend());
      app.parse(reversed);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kExitOk : kExitError;
    }

    if (gen->parsed()) cfg.command = "gen";
    else if (predict->parsed()) cfg.command = "predict";
    else cfg.command = "validate";
    cfg.validate();

    if (cfg.command == "gen") return cmd_gen(cfg, out_path, out);
    if (cfg.command == "predict") return cmd_predict(cfg, out_path, out);
    return cmd_validate(cfg, threads, out_path, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return kExitError;
}

}  // namespace confee::cli
