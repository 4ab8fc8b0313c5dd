#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "confee/conformity.hpp"
#include "confee/core.hpp"
#include "confee/normalize.hpp"

namespace confee {

/// Split conformal e-predictor. The rule is trained once on the training set
/// proper and the calibration summaries are cached; a query only scores the
/// postulated observation and re-normalizes.
class SplitEPredictor {
 public:
  SplitEPredictor(ConformityRule rule, SummaryVector calibration, Normalizer normalizer,
                  SplitConfig split);

  const ConformityRule& rule() const noexcept { return rule_; }
  const SummaryVector& calibration_summaries() const noexcept { return calibration_; }
  const Normalizer& normalizer() const noexcept { return normalizer_; }
  const SplitConfig& split() const noexcept { return split_; }

  /// sigma^y for the postulated observation (x, y).
  double test_summary(std::span<const double> x, Label y) const { return rule_.score(x, y); }
  /// N(sigma_1, ..., sigma_c, sigma^y): the whole normalized sequence.
  EValueVector normalized(std::span<const double> x, Label y) const;
  /// alpha^y, the last component of normalized(x, y).
  double e_value(std::span<const double> x, Label y) const { return normalized(x, y).back(); }
  /// Non-smoothed conformal p-value (#{i : sigma_i <= sigma^y} + 1) / (c + 1).
  double p_value(std::span<const double> x, Label y) const;

 private:
  ConformityRule rule_;
  SummaryVector calibration_;
  std::vector<double> calibration_sorted_;
  Normalizer normalizer_;
  SplitConfig split_;
};

SplitEPredictor fit_split(const Dataset& proper, const Dataset& calibration, const RuleSpec& rule,
                          const Normalizer& normalizer);
/// Uses the last `calibration_size` observations as the calibration set.
SplitEPredictor fit_split(const Dataset& training, std::size_t calibration_size,
                          const RuleSpec& rule, const Normalizer& normalizer);

PlausibilityTable split_predict(const SplitEPredictor& p, std::span<const double> x,
                                std::span<const Label> labels);
PlausibilityTable split_p_predict(const SplitEPredictor& p, std::span<const double> x,
                                  std::span<const Label> labels);

// ---------------------------------------------------------------------------

enum class Weighting { uniform, size_proportional };

/// Merges per-fold e-values: plain mean, or weights |S_k| / n. Terms are
/// summed in sorted order so that relabeling folds cannot change the result.
double merge_fold_e_values(std::span<const double> fold_values,
                           std::span<const std::size_t> fold_sizes, Weighting weighting);

/// Cross-conformal e-predictor: fold k is a split predictor with the
/// complement of S_k as training set proper and S_k as calibration set.
class CrossEPredictor {
 public:
  CrossEPredictor(FoldPartition partition, std::vector<SplitEPredictor> per_fold,
                  Weighting weighting);

  const FoldPartition& partition() const noexcept { return partition_; }
  std::span<const SplitEPredictor> per_fold() const noexcept { return per_fold_; }
  Weighting weighting() const noexcept { return weighting_; }

  std::vector<double> fold_e_values(std::span<const double> x, Label y) const;
  std::vector<double> fold_p_values(std::span<const double> x, Label y) const;
  double e_value(std::span<const double> x, Label y) const;

 private:
  FoldPartition partition_;
  std::vector<SplitEPredictor> per_fold_;
  std::vector<std::size_t> fold_sizes_;
  Weighting weighting_;
};

CrossEPredictor fit_cross(const Dataset& training, std::size_t folds, std::uint64_t seed,
                          const RuleSpec& rule, const Normalizer& normalizer,
                          Weighting weighting = Weighting::uniform);
CrossEPredictor fit_cross(const Dataset& training, FoldPartition partition, const RuleSpec& rule,
                          const Normalizer& normalizer, Weighting weighting = Weighting::uniform);

PlausibilityTable cross_predict(const CrossEPredictor& p, std::span<const double> x,
                                std::span<const Label> labels);

// ---------------------------------------------------------------------------
// Full conformal e-prediction

/// An equivariant map from observation sequences to e-value sequences.
using EAssignment = std::function<EValueVector(std::span<const Observation>)>;

EAssignment support_set_assignment(SupportProvider provider);

/// For each candidate y, evaluates the assignment on (z_1, ..., z_n, (x, y))
/// and reports the last component.
PlausibilityTable full_conformal_e_predict(const Dataset& training, std::span<const double> x,
                                           std::span<const Label> labels,
                                           const EAssignment& assignment);

// ---------------------------------------------------------------------------
// p-value baseline and p/e conversions

struct MergedPValue {
  double adjusted;    // min(1, 2 * mean)
  double unadjusted;  // plain arithmetic mean
};

MergedPValue cross_p_merge(std::span<const double> p_values);

double p_to_e(double p);
double e_to_p(double e);
double arithmetic_mean(std::span<const double> values);
/// m / sum(1/v_i); 0 when any entry is 0.
double harmonic_mean(std::span<const double> values);

/// t(epsilon): the e-value at or below which a label is excluded.
using SetThreshold = std::function<double(double)>;
inline double identity_threshold(double epsilon) { return epsilon; }

/// {y : e(y) > t(epsilon)}, in table order. Smaller thresholds give larger sets.
std::vector<Label> e_prediction_set(const PlausibilityTable& table, double epsilon,
                                    const SetThreshold& threshold = identity_threshold);

// ---------------------------------------------------------------------------

/// Realized e-values at the true labels of an online run, with prefix means.
struct OnlineTrace {
  std::vector<double> e_values;
  std::vector<double> running_means;  // running_means[i] = mean(e_values[0..i])

  static OnlineTrace from(std::vector<double> e_values);
};

}  // namespace confee
