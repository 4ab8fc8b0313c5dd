#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>

#include "confee/core.hpp"

namespace confee {

/// alpha_i = sigma_i / sum(sigma). Average 1/m; every component <= 1.
EValueVector sum_normalize(const SummaryVector& sigma);

/// alpha_i = m * sigma_i / sum(sigma). Average exactly 1; every component <= m.
EValueVector mean_normalize(const SummaryVector& sigma);

/// A normalizing transformation N: summary sequences -> e-value sequences.
///
/// The built-in kinds sum their input in sorted order, so applying N to a
/// permuted input yields the permuted output bit for bit. Custom
/// transformations must be equivariant themselves.
///
/// bound(m) is a guaranteed upper bound on every output component for inputs
/// of length m, or nullopt when none is known. The online harness refuses
/// normalizers without one.
class Normalizer {
 public:
  enum class Kind { sum, mean, custom };

  using Transform = std::function<EValueVector(const SummaryVector&)>;
  using Bound = std::function<std::optional<double>(std::size_t)>;

  static Normalizer sum() { return Normalizer(Kind::sum, "sum", nullptr, nullptr); }
  static Normalizer mean() { return Normalizer(Kind::mean, "mean", nullptr, nullptr); }
  static Normalizer custom(std::string name, Transform transform, Bound bound = nullptr) {
    return Normalizer(Kind::custom, std::move(name), std::move(transform), std::move(bound));
  }
  static Normalizer from_name(const std::string& name);

  Kind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }

  EValueVector operator()(const SummaryVector& sigma) const;
  std::optional<double> bound(std::size_t m) const;

 private:
  Normalizer(Kind kind, std::string name, Transform transform, Bound bound)
      : kind_(kind), name_(std::move(name)), transform_(std::move(transform)),
        bound_(std::move(bound)) {}

  Kind kind_;
  std::string name_;
  Transform transform_;
  Bound bound_;
};

/// Sum of `values` accumulated in ascending order; permutation invariant.
double sorted_sum(std::span<const double> values);

}  // namespace confee
