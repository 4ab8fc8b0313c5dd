#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace confee {

enum class ErrorKind {
  NegativeEntry,
  AverageExceedsOne,
  NonFiniteEntry,
  EmptyInput,
  TooFewFolds,
  TooFewObservations,
  FoldIndexOutOfRange,
  KTooLarge,
  EmptyProperSet,
  SingularSystem,
  UnsupportedTask,
  DimensionMismatch,
  EmptySupportSet,
  NonPositiveSummary,
  OutOfRange,
  InvalidDataset,
  InvalidScenario,
  UnboundedNormalizer,
  ParseError,
  LabelOutOfSpace,
  RaggedRows,
  Io,
  Usage,
};

std::string_view to_string(ErrorKind kind);

/// Every failure in the library is reported as an Error carrying a kind, so
/// callers (and tests) can dispatch on the cause without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Labels are stored as doubles. Classification labels are class ids
// 0, 1, ..., L-1; regression labels are arbitrary finite reals.
using Label = double;

struct Observation {
  std::vector<double> object;
  Label label = 0.0;
};

enum class TaskKind { classification, regression };

struct Task {
  TaskKind kind = TaskKind::classification;
  std::vector<std::string> class_names;  // classification only
  std::vector<double> grid;              // regression only, strictly increasing

  static Task classification(std::vector<std::string> names);
  static Task classification(std::size_t classes);
  static Task regression(std::vector<double> grid);

  /// Candidate labels a predictor is evaluated on: class ids or grid points.
  std::vector<Label> candidate_labels() const;
  bool contains(Label y) const;
  std::string label_name(Label y) const;
  void validate() const;
};

class Dataset {
 public:
  Dataset(std::vector<Observation> observations, Task task);

  std::size_t size() const noexcept { return observations_.size(); }
  std::size_t dim() const noexcept { return observations_.front().object.size(); }
  const Task& task() const noexcept { return task_; }
  const Observation& operator[](std::size_t i) const { return observations_[i]; }
  std::span<const Observation> observations() const noexcept { return observations_; }

  /// Observations at `indices` (0-based), in the given order.
  Dataset subset(std::span<const std::size_t> indices) const;
  /// Half-open range [first, last).
  Dataset slice(std::size_t first, std::size_t last) const;

 private:
  std::vector<Observation> observations_;
  Task task_;
};

void check_finite(std::span<const double> values, std::string_view what);

/// Nonnegative sequence whose average is at most 1 (up to kMeanTolerance).
class EValueVector {
 public:
  static constexpr double kMeanTolerance = 1e-12;

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double back() const { return values_.back(); }
  double mean() const noexcept { return mean_; }

 private:
  friend EValueVector make_e_vector(std::vector<double> values);
  EValueVector(std::vector<double> values, double mean)
      : values_(std::move(values)), mean_(mean) {}

  std::vector<double> values_;
  double mean_;
};

EValueVector make_e_vector(std::vector<double> values);

enum class SummarySpace { positive, real };

class SummaryVector {
 public:
  SummaryVector(std::vector<double> values, SummarySpace space = SummarySpace::positive);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  SummarySpace space() const noexcept { return space_; }

 private:
  std::vector<double> values_;
  SummarySpace space_;
};

/// K disjoint non-empty folds covering {0, ..., n-1}. Indices are 0-based.
class FoldPartition {
 public:
  FoldPartition(std::vector<std::vector<std::size_t>> folds, std::size_t n, std::uint64_t seed);

  std::size_t fold_count() const noexcept { return folds_.size(); }
  std::size_t n() const noexcept { return n_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::span<const std::size_t> fold(std::size_t k) const { return folds_.at(k); }
  const std::vector<std::vector<std::size_t>>& folds() const noexcept { return folds_; }

 private:
  std::vector<std::vector<std::size_t>> folds_;
  std::size_t n_;
  std::uint64_t seed_;
};

FoldPartition make_fold_partition(std::size_t n, std::size_t folds, std::uint64_t seed);

/// Indices not in fold `k` (0-based fold number), sorted ascending.
std::vector<std::size_t> complement_indices(const FoldPartition& partition, std::size_t k);

struct PlausibilityEntry {
  Label label;
  double e;
};

/// Candidate label -> e-value for one test object, in candidate order.
class PlausibilityTable {
 public:
  explicit PlausibilityTable(std::vector<PlausibilityEntry> entries);

  std::span<const PlausibilityEntry> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  double at(Label y) const;

 private:
  std::vector<PlausibilityEntry> entries_;
};

struct SplitConfig {
  std::size_t proper_size;
  std::size_t calibration_size;

  static SplitConfig make(std::size_t n, std::size_t calibration_size);
};

// Seeding. All randomness flows from 64-bit seeds through SplitMix64 so
// that streams are reproducible across platforms and thread counts.

std::uint64_t splitmix64(std::uint64_t x) noexcept;
/// Independent child seed for stream `index` of `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on {0, ..., bound-1}; bound > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;
  /// Standard normal draws via Box-Muller; fills `out` using ceil(size/2) pairs.
  void normals(std::span<double> out) noexcept;

 private:
  std::mt19937_64 engine_;
};

/// Runs fn(i) for i in [0, count) on up to `threads` workers. Callers write
/// results into per-index slots so output is independent of the thread count.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace confee
