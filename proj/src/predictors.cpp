#include "confee/predictors.hpp"

#include <algorithm>
#include <cmath>

namespace confee {

namespace {

void check_labels(std::span<const Label> labels) {
  if (labels.empty()) throw Error(ErrorKind::EmptyInput, "candidate label set is empty");
}

std::vector<double> summaries(const ConformityRule& rule, const Dataset& zs) {
  std::vector<double> out;
  out.reserve(zs.size());
  for (const auto& z : zs.observations()) out.push_back(rule.score(z));
  return out;
}

}  // namespace

SplitEPredictor::SplitEPredictor(ConformityRule rule, SummaryVector calibration,
                                 Normalizer normalizer, SplitConfig split)
    : rule_(std::move(rule)), calibration_(std::move(calibration)),
      calibration_sorted_(calibration_.values().begin(), calibration_.values().end()),
      normalizer_(std::move(normalizer)), split_(split) {
  if (calibration_.size() != split_.calibration_size)
    throw Error(ErrorKind::DimensionMismatch, "calibration summaries do not match split sizes");
  std::sort(calibration_sorted_.begin(), calibration_sorted_.end());
}

EValueVector SplitEPredictor::normalized(std::span<const double> x, Label y) const {
  std::vector<double> sigma(calibration_.values().begin(), calibration_.values().end());
  sigma.push_back(test_summary(x, y));
  return normalizer_(SummaryVector(std::move(sigma), calibration_.space()));
}

double SplitEPredictor::p_value(std::span<const double> x, Label y) const {
  const double s = test_summary(x, y);
  const auto at_most =
      std::upper_bound(calibration_sorted_.begin(), calibration_sorted_.end(), s) -
      calibration_sorted_.begin();
  return static_cast<double>(at_most + 1) / static_cast<double>(calibration_sorted_.size() + 1);
}

SplitEPredictor fit_split(const Dataset& proper, const Dataset& calibration, const RuleSpec& rule,
                          const Normalizer& normalizer) {
  if (proper.dim() != calibration.dim())
    throw Error(ErrorKind::DimensionMismatch, "proper and calibration sets differ in dimension");
  auto split = SplitConfig::make(proper.size() + calibration.size(), calibration.size());
  auto trained = train_conformity(rule, proper);
  SummaryVector sigma(summaries(trained, calibration));
  return SplitEPredictor(std::move(trained), std::move(sigma), normalizer, split);
}

SplitEPredictor fit_split(const Dataset& training, std::size_t calibration_size,
                          const RuleSpec& rule, const Normalizer& normalizer) {
  auto split = SplitConfig::make(training.size(), calibration_size);
  return fit_split(training.slice(0, split.proper_size),
                   training.slice(split.proper_size, training.size()), rule, normalizer);
}

PlausibilityTable split_predict(const SplitEPredictor& p, std::span<const double> x,
                                std::span<const Label> labels) {
  check_labels(labels);
  std::vector<PlausibilityEntry> out;
  for (Label y : labels) out.push_back({y, p.e_value(x, y)});
  return PlausibilityTable(std::move(out));
}

PlausibilityTable split_p_predict(const SplitEPredictor& p, std::span<const double> x,
                                  std::span<const Label> labels) {
  check_labels(labels);
  std::vector<PlausibilityEntry> out;
  for (Label y : labels) out.push_back({y, p.p_value(x, y)});
  return PlausibilityTable(std::move(out));
}

// ---------------------------------------------------------------------------

double merge_fold_e_values(std::span<const double> fold_values,
                           std::span<const std::size_t> fold_sizes, Weighting weighting) {
  if (fold_values.empty()) throw Error(ErrorKind::EmptyInput, "no fold values to merge");
  if (weighting == Weighting::uniform)
    return sorted_sum(fold_values) / static_cast<double>(fold_values.size());

  if (fold_sizes.size() != fold_values.size())
    throw Error(ErrorKind::DimensionMismatch, "one size per fold is required");
  std::vector<double> terms(fold_values.size());
  std::size_t n = 0;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    terms[k] = static_cast<double>(fold_sizes[k]) * fold_values[k];
    n += fold_sizes[k];
  }
  return sorted_sum(terms) / static_cast<double>(n);
}

CrossEPredictor::CrossEPredictor(FoldPartition partition, std::vector<SplitEPredictor> per_fold,
                                 Weighting weighting)
    : partition_(std::move(partition)), per_fold_(std::move(per_fold)), weighting_(weighting) {
  if (per_fold_.size() != partition_.fold_count())
    throw Error(ErrorKind::DimensionMismatch, "one split predictor per fold is required");
  for (std::size_t k = 0; k < per_fold_.size(); ++k) {
    fold_sizes_.push_back(partition_.fold(k).size());
    if (per_fold_[k].calibration_summaries().size() != fold_sizes_.back())
      throw Error(ErrorKind::DimensionMismatch, "fold calibration size mismatch");
  }
}

std::vector<double> CrossEPredictor::fold_e_values(std::span<const double> x, Label y) const {
  std::vector<double> out;
  out.reserve(per_fold_.size());
  for (const auto& p : per_fold_) out.push_back(p.e_value(x, y));
  return out;
}

std::vector<double> CrossEPredictor::fold_p_values(std::span<const double> x, Label y) const {
  std::vector<double> out;
  out.reserve(per_fold_.size());
  for (const auto& p : per_fold_) out.push_back(p.p_value(x, y));
  return out;
}

double CrossEPredictor::e_value(std::span<const double> x, Label y) const {
  return merge_fold_e_values(fold_e_values(x, y), fold_sizes_, weighting_);
}

CrossEPredictor fit_cross(const Dataset& training, FoldPartition partition, const RuleSpec& rule,
                          const Normalizer& normalizer, Weighting weighting) {
  if (partition.n() != training.size())
    throw Error(ErrorKind::DimensionMismatch, "partition does not match the training set size");
  std::vector<SplitEPredictor> per_fold;
  per_fold.reserve(partition.fold_count());
  for (std::size_t k = 0; k < partition.fold_count(); ++k) {
    const auto rest = complement_indices(partition, k);
    per_fold.push_back(
        fit_split(training.subset(rest), training.subset(partition.fold(k)), rule, normalizer));
  }
  return CrossEPredictor(std::move(partition), std::move(per_fold), weighting);
}

CrossEPredictor fit_cross(const Dataset& training, std::size_t folds, std::uint64_t seed,
                          const RuleSpec& rule, const Normalizer& normalizer,
                          Weighting weighting) {
  return fit_cross(training, make_fold_partition(training.size(), folds, seed), rule, normalizer,
                   weighting);
}

PlausibilityTable cross_predict(const CrossEPredictor& p, std::span<const double> x,
                                std::span<const Label> labels) {
  check_labels(labels);
  std::vector<PlausibilityEntry> out;
  for (Label y : labels) out.push_back({y, p.e_value(x, y)});
  return PlausibilityTable(std::move(out));
}

// ---------------------------------------------------------------------------

EAssignment support_set_assignment(SupportProvider provider) {
  return [provider = std::move(provider)](std::span<const Observation> zs) {
    return support_set_e_values(provider(zs));
  };
}

PlausibilityTable full_conformal_e_predict(const Dataset& training, std::span<const double> x,
                                           std::span<const Label> labels,
                                           const EAssignment& assignment) {
  check_labels(labels);
  if (x.size() != training.dim())
    throw Error(ErrorKind::DimensionMismatch, "test object dimension does not match training set");
  std::vector<Observation> zs(training.observations().begin(), training.observations().end());
  zs.push_back({std::vector<double>(x.begin(), x.end()), 0.0});
  std::vector<PlausibilityEntry> out;
  for (Label y : labels) {
    zs.back().label = y;
    const auto alpha = assignment(zs);
    if (alpha.size() != zs.size())
      throw Error(ErrorKind::DimensionMismatch, "assignment changed the sequence length");
    out.push_back({y, alpha.back()});
  }
  return PlausibilityTable(std::move(out));
}

// ---------------------------------------------------------------------------

MergedPValue cross_p_merge(std::span<const double> p_values) {
  if (p_values.empty()) throw Error(ErrorKind::EmptyInput, "no p-values to merge");
  for (double p : p_values)
    if (!(p > 0 && p <= 1)) throw Error(ErrorKind::OutOfRange, "p-values must lie in (0, 1]");
  const double mean = arithmetic_mean(p_values);
  return {std::min(1.0, 2.0 * mean), mean};
}

double p_to_e(double p) {
  if (!(p > 0 && p <= 1)) throw Error(ErrorKind::OutOfRange, "p must lie in (0, 1]");
  return 1.0 / p;
}

double e_to_p(double e) {
  if (!(e > 0) || !std::isfinite(e)) throw Error(ErrorKind::OutOfRange, "e must be positive");
  return std::min(1.0, 1.0 / e);
}

double arithmetic_mean(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::EmptyInput, "mean of an empty sequence");
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double harmonic_mean(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::EmptyInput, "mean of an empty sequence");
  double inv = 0.0;
  bool zero = false;
  for (double v : values) {
    if (v < 0) throw Error(ErrorKind::NegativeEntry, "harmonic mean of a negative value");
    if (v == 0) zero = true;
    else inv += 1.0 / v;
  }
  return zero ? 0.0 : static_cast<double>(values.size()) / inv;
}

std::vector<Label> e_prediction_set(const PlausibilityTable& table, double epsilon,
                                    const SetThreshold& threshold) {
  if (!(epsilon > 0 && epsilon < 1))
    throw Error(ErrorKind::OutOfRange, "significance level must lie in (0, 1)");
  const double t = threshold(epsilon);
  std::vector<Label> out;
  for (const auto& e : table.entries())
    if (e.e > t) out.push_back(e.label);
  return out;
}

OnlineTrace OnlineTrace::from(std::vector<double> e_values) {
  OnlineTrace trace;
  trace.running_means.reserve(e_values.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < e_values.size(); ++i) {
    sum += e_values[i];
    trace.running_means.push_back(sum / static_cast<double>(i + 1));
  }
  trace.e_values = std::move(e_values);
  return trace;
}

}  // namespace confee
