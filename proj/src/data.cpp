#include "confee/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <span>

namespace confee {

// ---------------------------------------------------------------------------
// Scenarios

void Scenario::validate() const {
  if (dim < 1) throw Error(ErrorKind::InvalidScenario, "dim must be >= 1");
  if (kind == Kind::gaussian_mixture) {
    if (classes < 2) throw Error(ErrorKind::InvalidScenario, "need at least 2 classes");
    if (!std::isfinite(separation)) throw Error(ErrorKind::InvalidScenario, "separation not finite");
  } else {
    if (!(noise_sd >= 0) || !std::isfinite(noise_sd))
      throw Error(ErrorKind::InvalidScenario, "noise_sd must be finite and >= 0");
    if (grid.empty()) throw Error(ErrorKind::InvalidScenario, "regression grid is empty");
  }
}

Task Scenario::task() const {
  validate();
  return kind == Kind::gaussian_mixture ? Task::classification(classes) : Task::regression(grid);
}

std::vector<double> Scenario::weights() const {
  std::vector<double> w(dim);
  Rng rng(derive_seed(seed, 0xffffffffffffffffULL));
  rng.normals(w);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  for (auto& v : w) v *= scale;
  return w;
}

namespace {

std::vector<double> uniform_grid(double lo, double hi, double step) {
  std::vector<double> g;
  const auto count = static_cast<std::size_t>(std::llround((hi - lo) / step)) + 1;
  for (std::size_t i = 0; i < count; ++i) g.push_back(lo + static_cast<double>(i) * step);
  return g;
}

Scenario mixture(std::string name, std::size_t classes, std::size_t dim, double separation) {
  Scenario s;
  s.kind = Scenario::Kind::gaussian_mixture;
  s.name = std::move(name);
  s.classes = classes;
  s.dim = dim;
  s.separation = separation;
  return s;
}

Scenario regression(std::string name, std::size_t dim, double noise_sd) {
  Scenario s;
  s.kind = Scenario::Kind::linear_regression;
  s.name = std::move(name);
  s.dim = dim;
  s.noise_sd = noise_sd;
  s.grid = uniform_grid(-5.0, 5.0, 0.25);
  return s;
}

}  // namespace

Scenario scenario_preset(std::string_view name) {
  if (name == "gm2d") return mixture("gm2d", 2, 2, 2.0);
  if (name == "gm5c") return mixture("gm5c", 5, 2, 3.0);
  if (name == "gm2d_hard") return mixture("gm2d_hard", 2, 2, 0.5);
  if (name == "linreg10") return regression("linreg10", 10, 0.5);
  if (name == "linreg1") return regression("linreg1", 1, 1.0);
  throw Error(ErrorKind::InvalidScenario, "unknown scenario preset '" + std::string(name) + "'");
}

std::vector<std::string> scenario_preset_names() {
  return {"gm2d", "gm5c", "gm2d_hard", "linreg10", "linreg1"};
}

namespace {

Observation draw(const Scenario& scenario, std::span<const double> weights, std::uint64_t seed,
                 std::size_t index) {
  Rng rng(derive_seed(seed, index));
  Observation z;
  if (scenario.kind == Scenario::Kind::gaussian_mixture) {
    const auto cls = rng.below(scenario.classes);
    z.object.resize(scenario.dim);
    rng.normals(z.object);
    const double centre = static_cast<double>(scenario.classes - 1) / 2.0;
    z.object[0] += scenario.separation * (static_cast<double>(cls) - centre);
    z.label = static_cast<double>(cls);
  } else {
    std::vector<double> draws(scenario.dim + 1);
    rng.normals(draws);
    z.object.assign(draws.begin(), draws.end() - 1);
    double y = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j) y += weights[j] * z.object[j];
    z.label = y + scenario.noise_sd * draws.back();
  }
  return z;
}

std::vector<double> weights_of(const Scenario& scenario) {
  return scenario.kind == Scenario::Kind::linear_regression ? scenario.weights()
                                                            : std::vector<double>{};
}

}  // namespace

Observation sample_one(const Scenario& scenario, std::uint64_t seed, std::size_t index) {
  scenario.validate();
  return draw(scenario, weights_of(scenario), seed, index);
}

Dataset sample(const Scenario& scenario, std::size_t n, std::uint64_t seed) {
  scenario.validate();
  if (n < 1) throw Error(ErrorKind::InvalidScenario, "sample size must be >= 1");
  const auto w = weights_of(scenario);
  std::vector<Observation> zs;
  zs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) zs.push_back(draw(scenario, w, seed, i));
  return Dataset(std::move(zs), scenario.task());
}

// ---------------------------------------------------------------------------
// CSV

CsvError::CsvError(ErrorKind kind, std::size_t line, std::size_t column, const std::string& reason)
    : Error(kind, "line " + std::to_string(line) +
                      (column ? ", column " + std::to_string(column) : std::string()) + ": " +
                      reason),
      line_(line), column_(column) {}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_row(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

double parse_number(const std::string& field, std::size_t line, std::size_t column) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = first + field.size();
  if (first != last && *first == '+') ++first;
  auto res = std::from_chars(first, last, v);
  if (field.empty() || res.ec != std::errc() || res.ptr != last)
    throw CsvError(ErrorKind::ParseError, line, column, "'" + field + "' is not a number");
  if (!std::isfinite(v))
    throw CsvError(ErrorKind::ParseError, line, column, "value is not finite");
  return v;
}

struct RawCsv {
  std::size_t dim = 0;
  bool has_label = false;
  std::vector<std::size_t> line_numbers;
  std::vector<std::vector<std::string>> rows;
};

RawCsv read_raw(std::istream& in, bool label_required) {
  RawCsv raw;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line == "" || line == "\r") continue;
    header = split_row(line);
    break;
  }
  if (header.empty()) throw CsvError(ErrorKind::ParseError, line_no, 0, "missing header row");
  if (line_no == 1 && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);

  raw.has_label = header.back() == "y";
  raw.dim = header.size() - (raw.has_label ? 1 : 0);
  if (label_required && !raw.has_label)
    throw CsvError(ErrorKind::ParseError, line_no, header.size(), "last column must be 'y'");
  if (raw.dim < 1) throw CsvError(ErrorKind::ParseError, line_no, 1, "no feature columns");
  for (std::size_t j = 0; j < raw.dim; ++j)
    if (header[j] != "x" + std::to_string(j + 1))
      throw CsvError(ErrorKind::ParseError, line_no, j + 1,
                     "expected column 'x" + std::to_string(j + 1) + "', found '" + header[j] + "'");

  while (std::getline(in, line)) {
    ++line_no;
    if (line == "" || line == "\r") continue;
    auto fields = split_row(line);
    if (fields.size() != header.size())
      throw CsvError(ErrorKind::RaggedRows, line_no, 0,
                     "expected " + std::to_string(header.size()) + " columns, found " +
                         std::to_string(fields.size()));
    raw.line_numbers.push_back(line_no);
    raw.rows.push_back(std::move(fields));
  }
  return raw;
}

Task resolve_task(const RawCsv& raw, const Task& task) {
  if (task.kind == TaskKind::regression || !task.class_names.empty() || !raw.has_label) {
    task.validate();
    return task;
  }
  std::set<std::string> names;
  for (const auto& row : raw.rows) names.insert(row.back());
  return Task::classification(std::vector<std::string>(names.begin(), names.end()));
}

Label parse_label(const Task& task, const std::string& field, std::size_t line,
                  std::size_t column) {
  if (task.kind == TaskKind::regression) return parse_number(field, line, column);
  const auto it = std::find(task.class_names.begin(), task.class_names.end(), field);
  if (it == task.class_names.end())
    throw CsvError(ErrorKind::LabelOutOfSpace, line, column,
                   "label '" + field + "' is not in the label space");
  return static_cast<double>(it - task.class_names.begin());
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  return in;
}

}  // namespace

Dataset read_csv(std::istream& in, const Task& task) {
  const auto raw = read_raw(in, true);
  if (raw.rows.empty()) throw Error(ErrorKind::InvalidDataset, "CSV has no data rows");
  const Task resolved = resolve_task(raw, task);
  std::vector<Observation> zs;
  zs.reserve(raw.rows.size());
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    const auto& row = raw.rows[r];
    const auto line = raw.line_numbers[r];
    Observation z;
    for (std::size_t j = 0; j < raw.dim; ++j) z.object.push_back(parse_number(row[j], line, j + 1));
    z.label = parse_label(resolved, row.back(), line, row.size());
    zs.push_back(std::move(z));
  }
  return Dataset(std::move(zs), resolved);
}

Dataset load_csv(const std::string& path, const Task& task) {
  auto in = open_input(path);
  return read_csv(in, task);
}

ObjectTable read_objects_csv(std::istream& in, const Task& task) {
  const auto raw = read_raw(in, false);
  if (raw.rows.empty()) throw Error(ErrorKind::InvalidDataset, "CSV has no data rows");
  ObjectTable out;
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    const auto& row = raw.rows[r];
    const auto line = raw.line_numbers[r];
    std::vector<double> x;
    for (std::size_t j = 0; j < raw.dim; ++j) x.push_back(parse_number(row[j], line, j + 1));
    out.objects.push_back(std::move(x));
    if (raw.has_label && !row.back().empty())
      out.labels.push_back(parse_label(task, row.back(), line, row.size()));
    else
      out.labels.push_back(std::nullopt);
  }
  return out;
}

ObjectTable load_objects_csv(const std::string& path, const Task& task) {
  auto in = open_input(path);
  return read_objects_csv(in, task);
}

void write_csv(std::ostream& out, const Dataset& data) {
  for (std::size_t j = 0; j < data.dim(); ++j) out << 'x' << j + 1 << ',';
  out << "y\n";
  for (const auto& z : data.observations()) {
    for (double v : z.object) out << format_double(v) << ',';
    if (data.task().kind == TaskKind::classification)
      out << data.task().label_name(z.label);
    else
      out << format_double(z.label);
    out << '\n';
  }
}

void save_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  write_csv(out, data);
  if (!out) throw Error(ErrorKind::Io, "write to '" + path + "' failed");
}

}  // namespace confee
