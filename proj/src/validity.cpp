#include "confee/validity.hpp"

#include <algorithm>
#include <cmath>

namespace confee {

std::string to_string(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::split: return "split";
    case PredictorKind::cross: return "cross";
    case PredictorKind::full: return "full";
    case PredictorKind::constant: return "constant";
  }
  return "unknown";
}

std::string to_string(Verdict v) { return v == Verdict::consistent ? "consistent" : "violation"; }

std::size_t resolve_calibration_size(const PredictorConfig& config, std::size_t n) {
  if (config.calibration_size) return *config.calibration_size;
  return std::max<std::size_t>(1, n / 5);
}

SupportProvider make_provider(const ProviderConfig& config, std::size_t dim) {
  if (config.type == ProviderConfig::Type::all) return all_support;
  MarginSupportProvider p{config.weights, config.bias, config.margin};
  if (p.weights.empty()) {
    p.weights.assign(dim, 0.0);
    p.weights[0] = 1.0;
  }
  if (p.weights.size() != dim)
    throw Error(ErrorKind::DimensionMismatch, "separator weights do not match the object dimension");
  return p;
}

std::optional<double> predictor_bound(const PredictorConfig& config, std::size_t n) {
  switch (config.kind) {
    case PredictorKind::constant: return config.constant;
    case PredictorKind::full: return static_cast<double>(n + 1);  // m / |SV| with |SV| >= 1
    case PredictorKind::split:
      return config.normalizer.bound(resolve_calibration_size(config, n) + 1);
    case PredictorKind::cross:
      // a (weighted) mean never exceeds the largest fold bound
      return config.normalizer.bound((n + config.folds - 1) / config.folds + 1);
  }
  return std::nullopt;
}

double e_at_truth(const PredictorConfig& config, const Dataset& training, const Observation& test,
                  std::uint64_t seed) {
  const Label y = test.label;
  return predict_table(config, training, test.object, std::span<const Label>(&y, 1), seed).at(y);
}

PlausibilityTable predict_table(const PredictorConfig& config, const Dataset& training,
                                std::span<const double> x, std::span<const Label> labels,
                                std::uint64_t seed) {
  switch (config.kind) {
    case PredictorKind::constant: {
      std::vector<PlausibilityEntry> out;
      for (Label y : labels) out.push_back({y, config.constant});
      return PlausibilityTable(std::move(out));
    }
    case PredictorKind::split: {
      const auto p = fit_split(training, resolve_calibration_size(config, training.size()),
                               config.rule, config.normalizer);
      return split_predict(p, x, labels);
    }
    case PredictorKind::cross: {
      const auto p = fit_cross(training, config.folds, seed, config.rule, config.normalizer,
                               config.weighting);
      return cross_predict(p, x, labels);
    }
    case PredictorKind::full:
      return full_conformal_e_predict(
          training, x, labels,
          support_set_assignment(make_provider(config.provider, training.dim())));
  }
  throw Error(ErrorKind::Usage, "unknown predictor kind");
}

double binomial_se(double level, std::size_t trials) {
  return std::sqrt(level * (1.0 - level) / static_cast<double>(trials));
}

namespace {

struct Moments {
  double mean;
  double std_error;
};

Moments moments(const std::vector<double>& xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double var = xs.size() > 1 ? ss / static_cast<double>(xs.size() - 1) : 0.0;
  return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

std::vector<TailRate> tail_rates(const std::vector<double>& es,
                                 const std::vector<double>& thresholds) {
  std::vector<TailRate> out;
  for (double t : thresholds) {
    if (!(t > 0)) throw Error(ErrorKind::OutOfRange, "tail thresholds must be positive");
    const auto hits = std::count_if(es.begin(), es.end(), [t](double e) { return e >= t; });
    const double bound = std::min(1.0, 1.0 / t);
    out.push_back({t, static_cast<double>(hits) / static_cast<double>(es.size()), 1.0 / t,
                   binomial_se(bound, es.size())});
  }
  return out;
}

std::vector<PRate> p_rates(const std::vector<double>& ps, const std::vector<double>& epsilons) {
  std::vector<PRate> out;
  for (double eps : epsilons) {
    if (!(eps > 0 && eps < 1)) throw Error(ErrorKind::OutOfRange, "epsilon must lie in (0, 1)");
    const auto hits = std::count_if(ps.begin(), ps.end(), [eps](double p) { return p <= eps; });
    out.push_back({eps, static_cast<double>(hits) / static_cast<double>(ps.size()),
                   binomial_se(eps, ps.size())});
  }
  return out;
}

struct TrialData {
  Dataset training;
  Observation test;
  std::uint64_t fold_seed;
};

TrialData draw_trial(const Scenario& scenario, std::size_t n, std::uint64_t master,
                     std::size_t trial) {
  const auto trial_seed = derive_seed(master, trial);
  auto all = sample(scenario, n + 1, derive_seed(trial_seed, 0));
  Observation test = all[n];
  return {all.slice(0, n), std::move(test), derive_seed(trial_seed, 1)};
}

void check_trials(std::size_t trials) {
  if (trials < 100) throw Error(ErrorKind::OutOfRange, "at least 100 trials are required");
}

}  // namespace

SpaceValidityReport mc_space_validity(const Scenario& scenario, const PredictorConfig& config,
                                      const SpaceValidityOptions& options) {
  check_trials(options.trials);
  std::vector<double> es(options.trials);
  parallel_for(options.trials, options.threads, [&](std::size_t t) {
    const auto trial = draw_trial(scenario, options.n, options.seed, t);
    es[t] = e_at_truth(config, trial.training, trial.test, trial.fold_seed);
  });

  SpaceValidityReport r;
  r.trials = options.trials;
  const auto m = moments(es);
  r.mean_e_at_truth = m.mean;
  r.std_error = m.std_error;
  r.tails = tail_rates(es, options.thresholds);
  for (double eps : options.epsilons) {
    if (!(eps > 0 && eps < 1)) throw Error(ErrorKind::OutOfRange, "epsilon must lie in (0, 1)");
    const auto kept = std::count_if(es.begin(), es.end(), [eps](double e) { return e > eps; });
    r.coverage.emplace_back(eps, static_cast<double>(kept) / static_cast<double>(es.size()));
  }
  r.verdict = r.mean_e_at_truth > 1.0 + 3.0 * r.std_error ? Verdict::violation
                                                          : Verdict::consistent;
  return r;
}

TimeValidityReport online_time_validity(const Scenario& scenario, const PredictorConfig& config,
                                        const TimeValidityOptions& options) {
  if (options.n_rounds < 50) throw Error(ErrorKind::OutOfRange, "at least 50 rounds are required");
  if (options.burn_in < 1 || options.burn_in >= options.n_rounds)
    throw Error(ErrorKind::OutOfRange, "burn-in must lie in [1, n_rounds)");

  // the largest training set is the last one, and every bound grows with n
  PredictorConfig cfg = config;
  const auto bound = predictor_bound(cfg, options.n_rounds - 1);
  if (!bound)
    throw Error(ErrorKind::UnboundedNormalizer,
                "normalizer '" + cfg.normalizer.name() + "' declares no upper bound");

  const auto data = sample(scenario, options.n_rounds, options.seed);
  const auto labels = data.task().candidate_labels();
  const bool classification = data.task().kind == TaskKind::classification;

  std::vector<double> es(options.n_rounds, 1.0);
  parallel_for(options.n_rounds - options.burn_in, options.threads, [&](std::size_t j) {
    const std::size_t i = options.burn_in + j;  // 0-based round; trains on rounds [0, i)
    PredictorConfig round_cfg = cfg;
    if (round_cfg.kind == PredictorKind::split && round_cfg.calibration_size)
      round_cfg.calibration_size = std::min(*round_cfg.calibration_size, i / 2);
    const auto training = data.slice(0, i);
    const auto& z = data[i];
    const auto fold_seed = derive_seed(options.seed ^ 0x5eedf01dULL, i);
    if (classification) {
      es[i] = predict_table(round_cfg, training, z.object, labels, fold_seed).at(z.label);
    } else {
      es[i] = e_at_truth(round_cfg, training, z, fold_seed);
    }
  });

  TimeValidityReport r;
  r.n_rounds = options.n_rounds;
  r.burn_in = options.burn_in;
  r.trace = OnlineTrace::from(std::move(es));
  r.final_running_mean = r.trace.running_means.back();
  r.max_running_mean_after_burnin = *std::max_element(
      r.trace.running_means.begin() + static_cast<std::ptrdiff_t>(options.burn_in),
      r.trace.running_means.end());
  r.bound_used = std::max(1.0, *bound);
  r.tolerance = options.tolerance;
  r.verdict = r.final_running_mean > 1.0 + options.tolerance ? Verdict::violation
                                                             : Verdict::consistent;
  return r;
}

CompareReport compare_e_vs_p(const Scenario& scenario, const PredictorConfig& config,
                             const CompareOptions& options) {
  check_trials(options.trials);
  struct Draw {
    double e, p_unadjusted, p_adjusted, harmonic, arithmetic, identity_error;
  };
  std::vector<Draw> draws(options.trials);
  parallel_for(options.trials, options.threads, [&](std::size_t t) {
    const auto trial = draw_trial(scenario, options.n, options.seed, t);
    const auto p = fit_cross(trial.training, config.folds, trial.fold_seed, config.rule,
                             config.normalizer, config.weighting);
    const auto& x = trial.test.object;
    const Label y = trial.test.label;
    const auto fold_p = p.fold_p_values(x, y);
    const auto merged = cross_p_merge(fold_p);
    std::vector<double> inv;
    for (double q : fold_p) inv.push_back(p_to_e(q));
    const double hm = harmonic_mean(fold_p);
    draws[t] = {p.e_value(x, y), merged.unadjusted, merged.adjusted, hm, merged.unadjusted,
                std::abs(hm - 1.0 / arithmetic_mean(inv))};
  });

  CompareReport r;
  r.trials = options.trials;
  r.folds = config.folds;
  std::vector<double> es, as_p, unadj, adj;
  double hm_sum = 0.0, am_sum = 0.0;
  for (const auto& d : draws) {
    es.push_back(d.e);
    as_p.push_back(d.e > 0 ? e_to_p(d.e) : 1.0);
    unadj.push_back(d.p_unadjusted);
    adj.push_back(d.p_adjusted);
    hm_sum += d.harmonic;
    am_sum += d.arithmetic;
    if (d.harmonic <= d.arithmetic + 1e-12) ++r.harmonic_le_arithmetic;
    r.max_identity_error = std::max(r.max_identity_error, d.identity_error);
  }
  const auto m = moments(es);
  r.ccep_mean_e = m.mean;
  r.ccep_std_error = m.std_error;
  r.ccep_tails = tail_rates(es, options.thresholds);
  r.ccep_as_p = p_rates(as_p, options.epsilons);
  r.ccpp_unadjusted = p_rates(unadj, options.epsilons);
  r.ccpp_adjusted = p_rates(adj, options.epsilons);
  r.mean_harmonic_p = hm_sum / static_cast<double>(options.trials);
  r.mean_arithmetic_p = am_sum / static_cast<double>(options.trials);

  bool bad = r.ccep_mean_e > 1.0 + 3.0 * r.ccep_std_error;
  for (const auto& pr : r.ccpp_adjusted) bad = bad || pr.rate > pr.epsilon + 3.0 * pr.std_error;
  r.verdict = bad ? Verdict::violation : Verdict::consistent;
  return r;
}

}  // namespace confee
