#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "confee/data.hpp"
#include "confee/normalize.hpp"
#include "confee/predictors.hpp"

namespace confee {

// ---------------------------------------------------------------------------
// Predictor configuration shared by the harnesses and the CLI

enum class PredictorKind { split, cross, full, constant };

struct ProviderConfig {
  enum class Type { margin, all };

  Type type = Type::margin;
  std::vector<double> weights;  // empty: unit vector along the first feature
  double bias = 0.0;
  double margin = 1.0;
};

struct PredictorConfig {
  PredictorKind kind = PredictorKind::cross;
  std::optional<std::size_t> calibration_size;  // split; default max(1, n/5)
  std::size_t folds = 5;                        // cross
  Weighting weighting = Weighting::uniform;
  RuleSpec rule = RuleSpec::knn(3);
  Normalizer normalizer = Normalizer::mean();
  ProviderConfig provider;                      // full
  double constant = 1.0;                        // constant (test-only)
};

std::string to_string(PredictorKind kind);
std::size_t resolve_calibration_size(const PredictorConfig& config, std::size_t n);
SupportProvider make_provider(const ProviderConfig& config, std::size_t dim);

/// Largest value the configured predictor can output when trained on n
/// observations, or nullopt when the normalizer declares no bound.
std::optional<double> predictor_bound(const PredictorConfig& config, std::size_t n);

/// Fits the configured predictor on `training` and evaluates it at the test
/// observation's own label. `seed` drives the fold partition.
double e_at_truth(const PredictorConfig& config, const Dataset& training, const Observation& test,
                  std::uint64_t seed);

/// Same, over every candidate label.
PlausibilityTable predict_table(const PredictorConfig& config, const Dataset& training,
                                std::span<const double> x, std::span<const Label> labels,
                                std::uint64_t seed);

// ---------------------------------------------------------------------------

enum class Verdict { consistent, violation };
std::string to_string(Verdict v);

/// Binomial standard error sqrt(b(1-b)/trials) at the level b being tested.
double binomial_se(double level, std::size_t trials);

struct TailRate {
  double threshold;
  double rate;          // empirical P(e >= threshold)
  double markov_bound;  // 1 / threshold
  double std_error;     // binomial SE at the Markov bound
};

struct SpaceValidityOptions {
  std::size_t n = 100;  // training set size per trial
  std::size_t trials = 10000;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::vector<double> thresholds{2, 5, 10, 20};
  std::vector<double> epsilons{0.05, 0.1, 0.2};
};

struct SpaceValidityReport {
  std::size_t trials = 0;
  double mean_e_at_truth = 0;
  double std_error = 0;  // sample std / sqrt(trials)
  std::vector<TailRate> tails;
  std::vector<std::pair<double, double>> coverage;  // epsilon -> P(e > epsilon)
  Verdict verdict = Verdict::consistent;
};

/// Monte Carlo check that E[e at the true label] <= 1 over IID draws. Each
/// trial draws n training observations plus one test observation; its
/// randomness comes from derive_seed(seed, trial) alone, so the report does
/// not depend on the thread count. Verdict is violation iff
/// mean > 1 + 3 SE.
SpaceValidityReport mc_space_validity(const Scenario& scenario, const PredictorConfig& config,
                                      const SpaceValidityOptions& options);

struct TimeValidityOptions {
  std::size_t n_rounds = 1000;
  std::size_t burn_in = 20;
  double tolerance = 0.05;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
};

struct TimeValidityReport {
  std::size_t n_rounds = 0;
  std::size_t burn_in = 0;
  OnlineTrace trace;
  double final_running_mean = 0;
  double max_running_mean_after_burnin = 0;
  double bound_used = 0;
  double tolerance = 0;
  Verdict verdict = Verdict::consistent;
};

/// Online protocol: at round i the predictor is refit on z_1..z_{i-1} and
/// evaluated on (x_i, y_i). The first `burn_in` rounds have too little data
/// and record the trivial e-value 1. Verdict is violation iff the final
/// running mean exceeds 1 + tolerance. Throws UnboundedNormalizer when the
/// predictor has no declared bound.
TimeValidityReport online_time_validity(const Scenario& scenario, const PredictorConfig& config,
                                        const TimeValidityOptions& options);

struct PRate {
  double epsilon;
  double rate;       // empirical P(p <= epsilon)
  double std_error;  // binomial SE at epsilon
};

struct CompareOptions {
  std::size_t n = 100;
  std::size_t trials = 10000;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::vector<double> epsilons{0.05, 0.1, 0.2};
  std::vector<double> thresholds{2, 5, 10, 20};
};

struct CompareReport {
  std::size_t trials = 0;
  std::size_t folds = 0;
  double ccep_mean_e = 0;
  double ccep_std_error = 0;
  std::vector<TailRate> ccep_tails;
  std::vector<PRate> ccep_as_p;        // P(min(1, 1/e) <= epsilon)
  std::vector<PRate> ccpp_unadjusted;  // plain mean of fold p-values
  std::vector<PRate> ccpp_adjusted;    // min(1, 2 * mean)
  double mean_harmonic_p = 0;
  double mean_arithmetic_p = 0;
  std::size_t harmonic_le_arithmetic = 0;  // draws with HM <= AM (+1e-12)
  double max_identity_error = 0;           // max |HM(p) - 1/AM(1/p)|
  Verdict verdict = Verdict::consistent;
};

/// Runs the cross-conformal e-predictor and the p-value baseline (same rule,
/// folds and draws) side by side. Verdict is violation iff the CCEP mean
/// exceeds 1 + 3 SE or an adjusted CCPP rate exceeds epsilon + 3 SE. The
/// unadjusted CCPP rates are informational.
CompareReport compare_e_vs_p(const Scenario& scenario, const PredictorConfig& config,
                             const CompareOptions& options);

}  // namespace confee
