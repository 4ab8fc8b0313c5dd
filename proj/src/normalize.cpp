#include "confee/normalize.hpp"

#include <algorithm>
#include <vector>

namespace confee {

double sorted_sum(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

namespace {

void require_positive(const SummaryVector& sigma) {
  for (double s : sigma.values())
    if (!(s > 0)) throw Error(ErrorKind::NonPositiveSummary, "normalizer needs summaries in (0, inf)");
}

EValueVector scaled_shares(const SummaryVector& sigma, double scale) {
  require_positive(sigma);
  const double total = sorted_sum(sigma.values());
  std::vector<double> alpha;
  alpha.reserve(sigma.size());
  for (double s : sigma.values()) alpha.push_back(scale * s / total);
  return make_e_vector(std::move(alpha));
}

}  // namespace

EValueVector sum_normalize(const SummaryVector& sigma) { return scaled_shares(sigma, 1.0); }

EValueVector mean_normalize(const SummaryVector& sigma) {
  return scaled_shares(sigma, static_cast<double>(sigma.size()));
}

Normalizer Normalizer::from_name(const std::string& name) {
  if (name == "sum") return sum();
  if (name == "mean") return mean();
  throw Error(ErrorKind::Usage, "unknown normalizer '" + name + "' (expected sum or mean)");
}

EValueVector Normalizer::operator()(const SummaryVector& sigma) const {
  switch (kind_) {
    case Kind::sum: return sum_normalize(sigma);
    case Kind::mean: return mean_normalize(sigma);
    case Kind::custom: break;
  }
  auto out = transform_(sigma);
  if (out.size() != sigma.size())
    throw Error(ErrorKind::DimensionMismatch, "normalizer changed the sequence length");
  return out;
}

std::optional<double> Normalizer::bound(std::size_t m) const {
  switch (kind_) {
    case Kind::sum: return 1.0;
    case Kind::mean: return static_cast<double>(m);
    case Kind::custom: break;
  }
  return bound_ ? bound_(m) : std::nullopt;
}

}  // namespace confee
