#include "confee/core.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

namespace confee {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NegativeEntry: return "NegativeEntry";
    case ErrorKind::AverageExceedsOne: return "AverageExceedsOne";
    case ErrorKind::NonFiniteEntry: return "NonFiniteEntry";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::TooFewFolds: return "TooFewFolds";
    case ErrorKind::TooFewObservations: return "TooFewObservations";
    case ErrorKind::FoldIndexOutOfRange: return "FoldIndexOutOfRange";
    case ErrorKind::KTooLarge: return "KTooLarge";
    case ErrorKind::EmptyProperSet: return "EmptyProperSet";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::UnsupportedTask: return "UnsupportedTask";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::EmptySupportSet: return "EmptySupportSet";
    case ErrorKind::NonPositiveSummary: return "NonPositiveSummary";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::InvalidDataset: return "InvalidDataset";
    case ErrorKind::InvalidScenario: return "InvalidScenario";
    case ErrorKind::UnboundedNormalizer: return "UnboundedNormalizer";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::LabelOutOfSpace: return "LabelOutOfSpace";
    case ErrorKind::RaggedRows: return "RaggedRows";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Usage: return "Usage";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

// ---------------------------------------------------------------------------
// Task / Dataset

Task Task::classification(std::vector<std::string> names) {
  Task t;
  t.kind = TaskKind::classification;
  t.class_names = std::move(names);
  t.validate();
  return t;
}

Task Task::classification(std::size_t classes) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < classes; ++i) names.push_back(std::to_string(i));
  return classification(std::move(names));
}

Task Task::regression(std::vector<double> grid) {
  Task t;
  t.kind = TaskKind::regression;
  t.grid = std::move(grid);
  t.validate();
  return t;
}

void Task::validate() const {
  if (kind == TaskKind::classification) {
    if (class_names.empty()) throw Error(ErrorKind::InvalidDataset, "empty class label set");
    auto sorted = class_names;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw Error(ErrorKind::InvalidDataset, "duplicate class label");
  } else {
    if (grid.empty()) throw Error(ErrorKind::InvalidDataset, "empty regression grid");
    check_finite(grid, "regression grid");
    for (std::size_t i = 1; i < grid.size(); ++i)
      if (!(grid[i - 1] < grid[i]))
        throw Error(ErrorKind::InvalidDataset, "regression grid must be strictly increasing");
  }
}

std::vector<Label> Task::candidate_labels() const {
  if (kind == TaskKind::regression) return grid;
  std::vector<Label> labels(class_names.size());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<double>(i);
  return labels;
}

bool Task::contains(Label y) const {
  if (!std::isfinite(y)) return false;
  if (kind == TaskKind::regression) return true;
  return y >= 0 && y == std::floor(y) && y < static_cast<double>(class_names.size());
}

std::string Task::label_name(Label y) const {
  if (kind == TaskKind::classification && contains(y))
    return class_names[static_cast<std::size_t>(y)];
  std::ostringstream os;
  os << y;
  return os.str();
}

Dataset::Dataset(std::vector<Observation> observations, Task task)
    : observations_(std::move(observations)), task_(std::move(task)) {
  if (observations_.empty()) throw Error(ErrorKind::InvalidDataset, "dataset is empty");
  task_.validate();
  const std::size_t d = observations_.front().object.size();
  for (std::size_t i = 0; i < observations_.size(); ++i) {
    const auto& z = observations_[i];
    if (z.object.size() != d)
      throw Error(ErrorKind::DimensionMismatch,
                  "observation " + std::to_string(i + 1) + " has dimension " +
                      std::to_string(z.object.size()) + ", expected " + std::to_string(d));
    check_finite(z.object, "feature vector");
    if (!task_.contains(z.label))
      throw Error(ErrorKind::LabelOutOfSpace,
                  "observation " + std::to_string(i + 1) + " label outside the label space");
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  std::vector<Observation> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(observations_.at(i));
  return Dataset(std::move(out), task_);
}

Dataset Dataset::slice(std::size_t first, std::size_t last) const {
  if (first > last || last > observations_.size())
    throw Error(ErrorKind::OutOfRange, "bad dataset slice");
  return Dataset({observations_.begin() + first, observations_.begin() + last}, task_);
}

void check_finite(std::span<const double> values, std::string_view what) {
  for (double v : values)
    if (!std::isfinite(v))
      throw Error(ErrorKind::NonFiniteEntry, std::string(what) + " has a non-finite entry");
}

// ---------------------------------------------------------------------------
// EValueVector / SummaryVector

EValueVector make_e_vector(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorKind::EmptyInput, "e-value vector is empty");
  double sum = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteEntry, "e-value is not finite");
    if (v < 0) throw Error(ErrorKind::NegativeEntry, "e-value is negative");
    sum += v;
  }
  const double mean = sum / static_cast<double>(values.size());
  if (mean > 1.0 + EValueVector::kMeanTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "average " << mean << " exceeds 1";
    throw Error(ErrorKind::AverageExceedsOne, os.str());
  }
  return EValueVector(std::move(values), mean);
}

SummaryVector::SummaryVector(std::vector<double> values, SummarySpace space)
    : values_(std::move(values)), space_(space) {
  if (values_.empty()) throw Error(ErrorKind::EmptyInput, "summary vector is empty");
  check_finite(values_, "summary vector");
  if (space_ == SummarySpace::positive)
    for (double v : values_)
      if (!(v > 0)) throw Error(ErrorKind::NonPositiveSummary, "summary must be positive");
}

// ---------------------------------------------------------------------------
// Folds

FoldPartition::FoldPartition(std::vector<std::vector<std::size_t>> folds, std::size_t n,
                             std::uint64_t seed)
    : folds_(std::move(folds)), n_(n), seed_(seed) {
  if (folds_.size() < 2) throw Error(ErrorKind::TooFewFolds, "need at least 2 folds");
  std::vector<char> seen(n_, 0);
  std::size_t lo = n_, hi = 0;
  for (const auto& f : folds_) {
    if (f.empty()) throw Error(ErrorKind::InvalidDataset, "empty fold");
    lo = std::min(lo, f.size());
    hi = std::max(hi, f.size());
    for (auto i : f) {
      if (i >= n_ || seen[i]) throw Error(ErrorKind::InvalidDataset, "folds are not a partition");
      seen[i] = 1;
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end())
    throw Error(ErrorKind::InvalidDataset, "folds do not cover all indices");
  if (hi - lo > 1) throw Error(ErrorKind::InvalidDataset, "fold sizes differ by more than 1");
}

FoldPartition make_fold_partition(std::size_t n, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw Error(ErrorKind::TooFewFolds, "K must be at least 2");
  if (n < folds)
    throw Error(ErrorKind::TooFewObservations,
                "n=" + std::to_string(n) + " is smaller than K=" + std::to_string(folds));

  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);

  // first n mod K folds get the extra element
  std::vector<std::vector<std::size_t>> out(folds);
  const std::size_t base = n / folds, extra = n % folds;
  std::size_t pos = 0;
  for (std::size_t k = 0; k < folds; ++k) {
    const std::size_t len = base + (k < extra ? 1 : 0);
    out[k].assign(perm.begin() + pos, perm.begin() + pos + len);
    std::sort(out[k].begin(), out[k].end());
    pos += len;
  }
  return FoldPartition(std::move(out), n, seed);
}

std::vector<std::size_t> complement_indices(const FoldPartition& partition, std::size_t k) {
  if (k >= partition.fold_count())
    throw Error(ErrorKind::FoldIndexOutOfRange,
                "fold " + std::to_string(k) + " of " + std::to_string(partition.fold_count()));
  std::vector<char> in_fold(partition.n(), 0);
  for (auto i : partition.fold(k)) in_fold[i] = 1;
  std::vector<std::size_t> out;
  out.reserve(partition.n() - partition.fold(k).size());
  for (std::size_t i = 0; i < partition.n(); ++i)
    if (!in_fold[i]) out.push_back(i);
  return out;
}

// ---------------------------------------------------------------------------

PlausibilityTable::PlausibilityTable(std::vector<PlausibilityEntry> entries)
    : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (!std::isfinite(e.e) || e.e < 0)
      throw Error(ErrorKind::NegativeEntry, "plausibility values must be finite and >= 0");
    for (std::size_t j = 0; j < i; ++j)
      if (entries_[j].label == e.label)
        throw Error(ErrorKind::InvalidDataset, "duplicate candidate label");
  }
}

double PlausibilityTable::at(Label y) const {
  for (const auto& e : entries_)
    if (e.label == y) return e.e;
  throw Error(ErrorKind::LabelOutOfSpace, "label not in plausibility table");
}

SplitConfig SplitConfig::make(std::size_t n, std::size_t calibration_size) {
  if (calibration_size < 1)
    throw Error(ErrorKind::TooFewObservations, "calibration set must be non-empty");
  if (calibration_size >= n)
    throw Error(ErrorKind::EmptyProperSet, "training set proper must be non-empty");
  return {n - calibration_size, calibration_size};
}

// ---------------------------------------------------------------------------
// Randomness

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

double Rng::uniform() noexcept {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t bound) noexcept {
  // rejection sampling: unbiased and platform independent
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return r % bound;
}

void Rng::normals(std::span<double> out) noexcept {
  for (std::size_t i = 0; i < out.size(); i += 2) {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    out[i] = r * std::cos(theta);
    if (i + 1 < out.size()) out[i + 1] = r * std::sin(theta);
  }
}

void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  // the lowest failing index wins so the reported error is deterministic
  std::exception_ptr failure;
  std::size_t failure_index = count;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> workers;
    for (std::size_t t = 0; t < threads; ++t) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (i < failure_index) {
              failure_index = i;
              failure = std::current_exception();
            }
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace confee
