#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "confee/validity.hpp"

namespace confee {

/// Everything that determines an experiment's output. Execution settings
/// (thread count, output path) are deliberately absent so that a report is a
/// function of its embedded config alone.
struct ExperimentConfig {
  std::string command;  // gen | predict | validate
  std::string mode = "space";  // validate: space | time | compare

  // data source: a scenario preset, or CSV files (predict only)
  std::string scenario;
  std::string train_path;
  std::string test_path;
  std::string task = "classification";  // for CSV input
  std::vector<std::string> labels;      // classification label space (CSV input)
  std::string grid;                     // regression grid, "lo:hi:step" or "a,b,..."

  std::size_t n = 100;
  std::size_t test_n = 1;
  std::size_t trials = 10000;
  std::size_t rounds = 1000;
  std::size_t burn_in = 20;
  double tolerance = 0.05;

  std::string predictor = "cross";  // split | cross | full | const1 | const2
  std::optional<std::size_t> calibration_size;
  std::size_t folds = 5;
  std::string weighting = "uniform";  // uniform | size
  std::string rule = "knn";           // knn | ridge
  std::size_t k = 3;
  double lambda = 1.0;
  std::string normalizer = "mean";  // mean | sum
  std::string provider = "margin";  // margin | all
  std::vector<double> margin_weights;
  double margin_bias = 0.0;

  std::vector<double> epsilons{0.05, 0.1, 0.2};
  std::uint64_t seed = 1;
  bool verbose = false;

  void validate() const;
  PredictorConfig predictor_config() const;
};

nlohmann::ordered_json to_json(const ExperimentConfig& config);
/// Accepts either a bare config object or a report that embeds one.
ExperimentConfig config_from_json(const nlohmann::json& j);

std::vector<double> parse_grid(const std::string& spec);

nlohmann::ordered_json to_json(const SpaceValidityReport& r);
nlohmann::ordered_json to_json(const TimeValidityReport& r);
nlohmann::ordered_json to_json(const CompareReport& r);

}  // namespace confee
