#include "confee/report.hpp"

#include <charconv>
#include <cmath>

namespace confee {

using ojson = nlohmann::ordered_json;

namespace {

void usage(const std::string& what) { throw Error(ErrorKind::Usage, what); }

bool one_of(const std::string& v, std::initializer_list<const char*> options) {
  for (const char* o : options)
    if (v == o) return true;
  return false;
}

double parse_real(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = first + s.size();
  auto res = std::from_chars(first, last, v);
  if (s.empty() || res.ec != std::errc() || res.ptr != last || !std::isfinite(v))
    usage("'" + s + "' is not a number");
  return v;
}

}  // namespace

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<std::string> parts;
  const char sep = spec.find(':') != std::string::npos ? ':' : ',';
  std::size_t start = 0;
  while (true) {
    const auto pos = spec.find(sep, start);
    parts.push_back(spec.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  std::vector<double> grid;
  if (sep == ':') {
    if (parts.size() != 3) usage("grid range must be lo:hi:step");
    const double lo = parse_real(parts[0]), hi = parse_real(parts[1]), step = parse_real(parts[2]);
    if (!(step > 0) || hi < lo) usage("grid range needs lo <= hi and step > 0");
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) grid.push_back(lo + static_cast<double>(i) * step);
  } else {
    for (const auto& p : parts) grid.push_back(parse_real(p));
  }
  return grid;
}

void ExperimentConfig::validate() const {
  if (!one_of(command, {"gen", "predict", "validate"})) usage("unknown command '" + command + "'");
  const bool from_file = !train_path.empty();
  if (command == "validate") {
    if (!one_of(mode, {"space", "time", "compare"})) usage("mode must be space, time or compare");
    if (scenario.empty()) usage("validate needs --scenario");
    if (from_file) usage("validate draws fresh data; --train is not accepted");
  } else if (from_file == !scenario.empty()) {
    usage("give exactly one data source: --scenario or --train");
  }
  if (command == "gen" && from_file) usage("gen needs --scenario");
  if (n < 1 || test_n < 1 || trials < 1 || rounds < 1 || folds < 1 || k < 1)
    usage("counts must be positive");
  if (calibration_size && *calibration_size < 1) usage("--c must be positive");
  if (!one_of(predictor, {"split", "cross", "full", "const1", "const2"}))
    usage("unknown predictor '" + predictor + "'");
  if (!one_of(weighting, {"uniform", "size"})) usage("weighting must be uniform or size");
  if (!one_of(rule, {"knn", "ridge"})) usage("rule must be knn or ridge");
  if (!one_of(normalizer, {"mean", "sum"})) usage("normalizer must be mean or sum");
  if (!one_of(provider, {"margin", "all"})) usage("provider must be margin or all");
  if (!one_of(task, {"classification", "regression"})) usage("task must be classification or regression");
  if (!(lambda >= 0) || !std::isfinite(lambda)) usage("--lambda must be >= 0");
  if (!(tolerance >= 0)) usage("--tolerance must be >= 0");
  for (double e : epsilons)
    if (!(e > 0 && e < 1)) usage("epsilons must lie in (0, 1)");
}

PredictorConfig ExperimentConfig::predictor_config() const {
  PredictorConfig p;
  if (predictor == "split") p.kind = PredictorKind::split;
  else if (predictor == "cross") p.kind = PredictorKind::cross;
  else if (predictor == "full") p.kind = PredictorKind::full;
  else {
    p.kind = PredictorKind::constant;
    p.constant = predictor == "const1" ? 1.0 : 2.0;
  }
  p.calibration_size = calibration_size;
  p.folds = folds;
  p.weighting = weighting == "size" ? Weighting::size_proportional : Weighting::uniform;
  p.rule = rule == "knn" ? RuleSpec::knn(k) : RuleSpec::ridge(lambda);
  p.normalizer = Normalizer::from_name(normalizer);
  p.provider.type = provider == "all" ? ProviderConfig::Type::all : ProviderConfig::Type::margin;
  p.provider.weights = margin_weights;
  p.provider.bias = margin_bias;
  return p;
}

ojson to_json(const ExperimentConfig& c) {
  ojson j;
  j["command"] = c.command;
  if (c.command == "validate") j["mode"] = c.mode;
  if (!c.scenario.empty()) j["scenario"] = c.scenario;
  if (!c.train_path.empty()) {
    j["train"] = c.train_path;
    j["task"] = c.task;
    if (!c.labels.empty()) j["labels"] = c.labels;
    if (!c.grid.empty()) j["grid"] = c.grid;
  }
  if (!c.test_path.empty()) j["test"] = c.test_path;
  j["n"] = c.n;
  if (c.command == "predict") j["test_n"] = c.test_n;
  if (c.command == "validate") {
    if (c.mode == "time") {
      j["rounds"] = c.rounds;
      j["burn_in"] = c.burn_in;
      j["tolerance"] = c.tolerance;
    } else {
      j["trials"] = c.trials;
    }
  }
  if (c.command != "gen") {
    ojson p;
    p["kind"] = c.predictor;
    if (c.calibration_size) p["c"] = *c.calibration_size;
    p["K"] = c.folds;
    p["weighting"] = c.weighting;
    p["rule"] = c.rule;
    p["k"] = c.k;
    p["lambda"] = c.lambda;
    p["normalizer"] = c.normalizer;
    p["provider"] = c.provider;
    if (!c.margin_weights.empty()) p["margin_weights"] = c.margin_weights;
    p["margin_bias"] = c.margin_bias;
    j["predictor"] = p;
    j["epsilons"] = c.epsilons;
    j["verbose"] = c.verbose;
  }
  j["seed"] = c.seed;
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& input) {
  const auto& j = input.contains("config") ? input.at("config") : input;
  ExperimentConfig c;
  try {
    c.command = j.at("command").get<std::string>();
    c.mode = j.value("mode", c.mode);
    c.scenario = j.value("scenario", c.scenario);
    c.train_path = j.value("train", c.train_path);
    c.test_path = j.value("test", c.test_path);
    c.task = j.value("task", c.task);
    c.labels = j.value("labels", c.labels);
    c.grid = j.value("grid", c.grid);
    c.n = j.value("n", c.n);
    c.test_n = j.value("test_n", c.test_n);
    c.trials = j.value("trials", c.trials);
    c.rounds = j.value("rounds", c.rounds);
    c.burn_in = j.value("burn_in", c.burn_in);
    c.tolerance = j.value("tolerance", c.tolerance);
    if (j.contains("predictor")) {
      const auto& p = j.at("predictor");
      c.predictor = p.value("kind", c.predictor);
      if (p.contains("c")) c.calibration_size = p.at("c").get<std::size_t>();
      c.folds = p.value("K", c.folds);
      c.weighting = p.value("weighting", c.weighting);
      c.rule = p.value("rule", c.rule);
      c.k = p.value("k", c.k);
      c.lambda = p.value("lambda", c.lambda);
      c.normalizer = p.value("normalizer", c.normalizer);
      c.provider = p.value("provider", c.provider);
      c.margin_weights = p.value("margin_weights", c.margin_weights);
      c.margin_bias = p.value("margin_bias", c.margin_bias);
    }
    c.epsilons = j.value("epsilons", c.epsilons);
    c.seed = j.value("seed", c.seed);
    c.verbose = j.value("verbose", c.verbose);
  } catch (const nlohmann::json::exception& e) {
    usage(std::string("bad config: ") + e.what());
  }
  return c;
}

// ---------------------------------------------------------------------------

namespace {

std::string key(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

ojson tails_json(const std::vector<TailRate>& tails) {
  ojson rates = ojson::object(), detail = ojson::array();
  for (const auto& t : tails) {
    rates[key(t.threshold)] = t.rate;
    detail.push_back({{"threshold", t.threshold},
                      {"rate", t.rate},
                      {"markov_bound", t.markov_bound},
                      {"std_error", t.std_error}});
  }
  return {{"tail_rates", rates}, {"tails", detail}};
}

ojson p_rates_json(const std::vector<PRate>& rates) {
  ojson out = ojson::array();
  for (const auto& r : rates)
    out.push_back({{"epsilon", r.epsilon}, {"rate", r.rate}, {"std_error", r.std_error}});
  return out;
}

}  // namespace

ojson to_json(const SpaceValidityReport& r) {
  ojson j;
  j["trials"] = r.trials;
  j["mean_e_at_truth"] = r.mean_e_at_truth;
  j["std_error"] = r.std_error;
  const auto t = tails_json(r.tails);
  j["tail_rates"] = t["tail_rates"];
  j["tails"] = t["tails"];
  ojson cov = ojson::array();
  for (const auto& [eps, rate] : r.coverage) cov.push_back({{"epsilon", eps}, {"rate", rate}});
  j["coverage"] = cov;
  j["verdict"] = to_string(r.verdict);
  return j;
}

ojson to_json(const TimeValidityReport& r) {
  ojson j;
  j["n_rounds"] = r.n_rounds;
  j["burn_in"] = r.burn_in;
  j["final_running_mean"] = r.final_running_mean;
  j["max_running_mean_after_burnin"] = r.max_running_mean_after_burnin;
  j["bound_used"] = r.bound_used;
  j["tolerance"] = r.tolerance;
  j["verdict"] = to_string(r.verdict);
  j["trace"] = {{"e_values", r.trace.e_values}, {"running_means", r.trace.running_means}};
  return j;
}

ojson to_json(const CompareReport& r) {
  ojson j;
  j["trials"] = r.trials;
  j["K"] = r.folds;
  const auto t = tails_json(r.ccep_tails);
  j["ccep"] = {{"mean_e_at_truth", r.ccep_mean_e},
               {"std_error", r.ccep_std_error},
               {"tail_rates", t["tail_rates"]},
               {"tails", t["tails"]},
               {"as_p_rates", p_rates_json(r.ccep_as_p)}};
  j["ccpp_unadjusted"] = p_rates_json(r.ccpp_unadjusted);
  j["ccpp_adjusted"] = p_rates_json(r.ccpp_adjusted);
  j["remark"] = {{"mean_harmonic_p", r.mean_harmonic_p},
                 {"mean_arithmetic_p", r.mean_arithmetic_p},
                 {"harmonic_le_arithmetic", r.harmonic_le_arithmetic},
                 {"max_identity_error", r.max_identity_error}};
  j["verdict"] = to_string(r.verdict);
  return j;
}

}  // namespace confee
