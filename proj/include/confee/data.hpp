#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "confee/core.hpp"

namespace confee {

/// Seeded IID source of labelled observations.
///
/// gaussian_mixture: class uniform on {0..classes-1}, object ~ N(mu_class, I)
///   with mu_j = separation * (j - (classes-1)/2) * e_1, so neighbouring class
///   means are `separation` apart.
/// linear_regression: object ~ N(0, I), y = w.x + N(0, noise_sd^2), with
///   w ~ N(0, I/dim) fixed by the scenario seed.
struct Scenario {
  enum class Kind { gaussian_mixture, linear_regression };

  Kind kind = Kind::gaussian_mixture;
  std::string name = "custom";
  std::size_t classes = 2;
  std::size_t dim = 2;
  double separation = 2.0;
  double noise_sd = 0.5;
  std::vector<double> grid;  // regression candidate labels
  std::uint64_t seed = 1;

  void validate() const;
  Task task() const;
  std::vector<double> weights() const;  // regression only
};

Scenario scenario_preset(std::string_view name);
std::vector<std::string> scenario_preset_names();

/// One observation; depends only on (scenario, seed, index), so prefixes of a
/// sample do not change when n grows.
Observation sample_one(const Scenario& scenario, std::uint64_t seed, std::size_t index);
Dataset sample(const Scenario& scenario, std::size_t n, std::uint64_t seed);

// ---------------------------------------------------------------------------
// CSV: header `x1,...,xd,y`, one observation per row, '.' decimals.

class CsvError : public Error {
 public:
  CsvError(ErrorKind kind, std::size_t line, std::size_t column, const std::string& reason);
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Reads a labelled dataset. For classification, `task.class_names` lists the
/// label space; when empty it is inferred as the sorted distinct labels.
Dataset read_csv(std::istream& in, const Task& task);
Dataset load_csv(const std::string& path, const Task& task);

/// Test objects; the `y` column is optional and returned when present.
struct ObjectTable {
  std::vector<std::vector<double>> objects;
  std::vector<std::optional<Label>> labels;
};
ObjectTable read_objects_csv(std::istream& in, const Task& task);
ObjectTable load_objects_csv(const std::string& path, const Task& task);

void write_csv(std::ostream& out, const Dataset& data);
void save_csv(const std::string& path, const Dataset& data);

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace confee
