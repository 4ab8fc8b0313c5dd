#include "confee/conformity.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace confee {

namespace {

bool canonical_less(const Observation& a, const Observation& b) {
  if (a.label != b.label) return a.label < b.label;
  return std::lexicographical_compare(a.object.begin(), a.object.end(), b.object.begin(),
                                      b.object.end());
}

double euclidean(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

void fit_ridge(const std::vector<Observation>& zs, TaskKind kind, double lambda,
               std::vector<double>& coef, double& intercept) {
  const std::size_t n = zs.size(), d = zs.front().object.size();
  Eigen::VectorXd mean_x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  double mean_y = 0.0;
  for (const auto& z : zs) {
    mean_x += Eigen::Map<const Eigen::VectorXd>(z.object.data(), static_cast<Eigen::Index>(d));
    mean_y += signed_target(kind, z.label);
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);

  // Centered normal equations; the intercept is not penalized.
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d),
                                               static_cast<Eigen::Index>(d));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  for (const auto& z : zs) {
    const Eigen::VectorXd xc =
        Eigen::Map<const Eigen::VectorXd>(z.object.data(), static_cast<Eigen::Index>(d)) - mean_x;
    gram.noalias() += xc * xc.transpose();
    rhs += xc * (signed_target(kind, z.label) - mean_y);
  }
  gram.diagonal().array() += lambda;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(gram);
  if (qr.rank() < static_cast<Eigen::Index>(d))
    throw Error(ErrorKind::SingularSystem,
                "ridge normal equations are rank deficient (lambda=" + std::to_string(lambda) +
                    ")");
  const Eigen::VectorXd w = qr.solve(rhs);
  coef.assign(w.data(), w.data() + d);
  intercept = mean_y - w.dot(mean_x);
}

}  // namespace

double signed_target(TaskKind kind, Label y) {
  if (kind == TaskKind::regression) return y;
  return y > 0 ? 1.0 : -1.0;
}

ConformityRule train_conformity(const RuleSpec& spec, const Dataset& proper) {
  if (proper.size() == 0) throw Error(ErrorKind::EmptyProperSet, "training set proper is empty");
  ConformityRule rule;
  rule.spec_ = spec;
  rule.task_kind_ = proper.task().kind;
  rule.dim_ = proper.dim();

  std::vector<Observation> zs(proper.observations().begin(), proper.observations().end());
  std::sort(zs.begin(), zs.end(), canonical_less);

  if (spec.type == RuleSpec::Type::knn) {
    if (spec.k < 1) throw Error(ErrorKind::KTooLarge, "knn needs k >= 1");
    if (spec.k > zs.size())
      throw Error(ErrorKind::KTooLarge, "k=" + std::to_string(spec.k) + " exceeds proper set size " +
                                            std::to_string(zs.size()));
    rule.neighbours_ = std::move(zs);
  } else {
    if (!(spec.lambda >= 0) || !std::isfinite(spec.lambda))
      throw Error(ErrorKind::OutOfRange, "ridge lambda must be finite and >= 0");
    if (proper.task().kind == TaskKind::classification && proper.task().class_names.size() != 2)
      throw Error(ErrorKind::UnsupportedTask, "ridge supports regression or binary classification");
    fit_ridge(zs, proper.task().kind, spec.lambda, rule.coefficients_, rule.intercept_);
  }
  return rule;
}

double ConformityRule::predict(std::span<const double> object) const {
  double yhat = intercept_;
  for (std::size_t i = 0; i < coefficients_.size(); ++i) yhat += coefficients_[i] * object[i];
  return yhat;
}

double ConformityRule::score(const Observation& z) const { return score(z.object, z.label); }

double ConformityRule::score(std::span<const double> object, Label y) const {
  if (object.size() != dim_)
    throw Error(ErrorKind::DimensionMismatch, "object has dimension " +
                                                  std::to_string(object.size()) + ", rule expects " +
                                                  std::to_string(dim_));
  if (spec_.type == RuleSpec::Type::ridge) {
    return 1.0 / (1.0 + std::abs(signed_target(task_kind_, y) - predict(object)));
  }

  std::vector<double> dist;
  for (const auto& p : neighbours_)
    if (p.label == y) dist.push_back(euclidean(object, p.object));
  if (dist.empty()) return kKnnFloor;
  const std::size_t k = std::min(spec_.k, dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += dist[i];
  return 1.0 / (1.0 + sum / static_cast<double>(k));
}

// ---------------------------------------------------------------------------

EValueVector support_set_e_values(const SupportSet& support) {
  if (support.indices.empty())
    throw Error(ErrorKind::EmptySupportSet, "support set is empty; m/|SV| is undefined");
  std::vector<double> alpha(support.m, 0.0);
  std::vector<std::size_t> sv = support.indices;
  std::sort(sv.begin(), sv.end());
  if (std::adjacent_find(sv.begin(), sv.end()) != sv.end())
    throw Error(ErrorKind::OutOfRange, "duplicate support index");
  if (sv.back() >= support.m) throw Error(ErrorKind::OutOfRange, "support index out of range");
  const double value = static_cast<double>(support.m) / static_cast<double>(sv.size());
  for (auto i : sv) alpha[i] = value;
  return make_e_vector(std::move(alpha));
}

SupportSet MarginSupportProvider::operator()(std::span<const Observation> zs) const {
  SupportSet out{{}, zs.size()};
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const auto& z = zs[i];
    if (z.object.size() != weights.size())
      throw Error(ErrorKind::DimensionMismatch, "separator dimension does not match objects");
    double f = bias;
    for (std::size_t j = 0; j < weights.size(); ++j) f += weights[j] * z.object[j];
    const double s = z.label > 0 ? 1.0 : -1.0;
    if (s * f <= margin) out.indices.push_back(i);
  }
  return out;
}

SupportSet all_support(std::span<const Observation> zs) {
  SupportSet out{{}, zs.size()};
  for (std::size_t i = 0; i < zs.size(); ++i) out.indices.push_back(i);
  return out;
}

}  // namespace confee
