#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "confee/core.hpp"

namespace confee {

/// Orientation: higher summaries mean MORE conforming. Every normalizer and
/// prediction-set rule in this library reads e-values with that convention:
/// a small e-value for a candidate label is evidence against it.

/// Summary assigned by knn when no proper-set point shares the label.
inline constexpr double kKnnFloor = 1e-6;

struct RuleSpec {
  enum class Type { knn, ridge };

  Type type = Type::knn;
  std::size_t k = 3;    // knn neighbour count
  double lambda = 1.0;  // ridge regularization

  static RuleSpec knn(std::size_t k) { return {Type::knn, k, 0.0}; }
  static RuleSpec ridge(double lambda) { return {Type::ridge, 0, lambda}; }

  std::string name() const { return type == Type::knn ? "knn" : "ridge"; }
};

/// A split conformity measure trained on a training set proper.
///
/// Training canonicalizes the proper set (sorts observations by label, then
/// object) so that the fitted state, and therefore every score, is
/// bit-identical under any reordering of the proper set. This makes each rule
/// a cross-conformity measure.
class ConformityRule {
 public:
  const RuleSpec& spec() const noexcept { return spec_; }
  std::size_t dim() const noexcept { return dim_; }

  /// Summary sigma > 0 for observation `z`; throws DimensionMismatch.
  double score(const Observation& z) const;
  double score(std::span<const double> object, Label y) const;

  /// Ridge prediction y-hat(x) (class targets are -1/+1 for binary tasks).
  double predict(std::span<const double> object) const;
  std::span<const double> coefficients() const noexcept { return coefficients_; }
  double intercept() const noexcept { return intercept_; }

 private:
  friend ConformityRule train_conformity(const RuleSpec& spec, const Dataset& proper);

  RuleSpec spec_;
  TaskKind task_kind_ = TaskKind::classification;
  std::size_t dim_ = 0;
  std::vector<Observation> neighbours_;  // knn, canonical order
  std::vector<double> coefficients_;     // ridge
  double intercept_ = 0.0;
};

ConformityRule train_conformity(const RuleSpec& spec, const Dataset& proper);
inline double score(const ConformityRule& rule, const Observation& z) { return rule.score(z); }

/// Target used by ridge: the label itself for regression, -1/+1 for
/// binary classification (class id 0 -> -1, class id 1 -> +1).
double signed_target(TaskKind kind, Label y);

// ---------------------------------------------------------------------------
// Support-set e-assignment

struct SupportSet {
  std::vector<std::size_t> indices;  // 0-based, subset of [0, m)
  std::size_t m = 0;
};

/// alpha_i = m/|SV| for i in SV, 0 elsewhere. Mean is exactly 1.
EValueVector support_set_e_values(const SupportSet& support);

/// Anything that designates support points of an observation sequence. Must be
/// equivariant: permuting the input permutes the returned indices.
using SupportProvider = std::function<SupportSet(std::span<const Observation>)>;

/// Toy provider standing in for an SVM: point i is a support point when its
/// functional margin against a fixed separator is at most `margin`,
///   s(y_i) * (w . x_i + b) <= margin,   s(y) = -1 for class 0, +1 otherwise.
struct MarginSupportProvider {
  std::vector<double> weights;
  double bias = 0.0;
  double margin = 1.0;

  SupportSet operator()(std::span<const Observation> zs) const;
};

/// Every point is a support point.
SupportSet all_support(std::span<const Observation> zs);

}  // namespace confee
