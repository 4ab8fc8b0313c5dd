#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "confee/data.hpp"
#include "confee/predictors.hpp"

using namespace confee;

namespace {

Dataset regression(std::vector<std::pair<double, double>> xy) {
  std::vector<Observation> zs;
  for (auto [x, y] : xy) zs.push_back({{x}, y});
  return Dataset(std::move(zs), Task::regression({0.0, 3.0}));
}

Dataset mixture(std::size_t n, std::uint64_t seed) {
  return sample(scenario_preset("gm2d"), n, seed);
}

std::vector<Observation> copy(const Dataset& d) {
  return {d.observations().begin(), d.observations().end()};
}

}  // namespace

TEST_CASE("fit_split bookkeeping") {
  const auto proper = regression({{0, 0}, {1, 1}, {2, 2.5}, {3, 2.9}});
  const auto calibration = regression({{4, 4.2}, {5, 4.8}});
  const auto p = fit_split(proper, calibration, RuleSpec::ridge(0.1), Normalizer::mean());
  CHECK(p.calibration_summaries().size() == 2);
  CHECK(p.split().proper_size == 4);
  CHECK(p.split().calibration_size == 2);

  const auto again = fit_split(proper, calibration, RuleSpec::ridge(0.1), Normalizer::mean());
  for (std::size_t i = 0; i < 2; ++i)
    CHECK(again.calibration_summaries().values()[i] == p.calibration_summaries().values()[i]);

  CHECK_THROWS_AS(fit_split(proper, 0, RuleSpec::ridge(0.1), Normalizer::mean()), Error);
}

TEST_CASE("split prediction with equal summaries") {
  // exact linear data: every summary equals 1
  const auto proper = regression({{0, 0}, {1, 1}});
  const auto calibration = regression({{2, 2}, {3, 3}, {4, 4}});
  const Label y[] = {3.0};
  const std::vector<double> x{3.0};

  const auto sum = fit_split(proper, calibration, RuleSpec::ridge(0.0), Normalizer::sum());
  CHECK(split_predict(sum, x, y).at(3.0) == doctest::Approx(0.25));
  const auto mean = fit_split(proper, calibration, RuleSpec::ridge(0.0), Normalizer::mean());
  CHECK(split_predict(mean, x, y).at(3.0) == doctest::Approx(1.0));
}

TEST_CASE("split prediction reproduces the hand-solved ridge example") {
  // y-hat(x) = x; sigma_cal = 1; sigma^3 = 1; sigma^0 = 1/4
  const auto p = fit_split(regression({{0, 0}, {1, 1}}), regression({{2, 2}}),
                           RuleSpec::ridge(0.0), Normalizer::mean());
  const Label labels[] = {0.0, 3.0};
  const auto table = split_predict(p, std::vector<double>{3.0}, labels);
  CHECK(std::abs(table.at(3.0) - 1.0) < 1e-9);
  CHECK(std::abs(table.at(0.0) - 0.4) < 1e-9);
}

TEST_CASE("split p-values count calibration summaries at or below sigma^y") {
  const auto rule = train_conformity(RuleSpec::ridge(0.0), regression({{0, 0}, {1, 1}}));
  const SplitEPredictor p(rule, SummaryVector({0.1, 0.2, 0.3, 0.4}), Normalizer::mean(),
                          SplitConfig::make(6, 4));
  const std::vector<double> x{1.0};
  // sigma = 1 / (1 + |y - 1|)
  CHECK(p.p_value(x, 4.0) == doctest::Approx(0.6));         // sigma 0.25
  CHECK(p.p_value(x, 1.0) == doctest::Approx(1.0));         // sigma 1
  CHECK(p.p_value(x, 1000.0) == doctest::Approx(1.0 / 5));  // below all
}

TEST_CASE("split pipeline is equivariant in the calibration set") {
  const auto data = mixture(60, 4);
  std::mt19937_64 gen(8);
  const auto proper = data.slice(0, 40);
  auto cal = copy(data.slice(40, 60));
  const auto base = fit_split(proper, Dataset(cal, data.task()), RuleSpec::knn(3), Normalizer::mean());
  const std::vector<double> x{0.4, -1.0};
  for (int t = 0; t < 100; ++t) {
    std::shuffle(cal.begin(), cal.end(), gen);
    const auto p = fit_split(proper, Dataset(cal, data.task()), RuleSpec::knn(3), Normalizer::mean());
    for (Label y : {0.0, 1.0}) REQUIRE(p.e_value(x, y) == base.e_value(x, y));
  }
}

TEST_CASE("merge_fold_e_values") {
  const std::size_t two[] = {5, 5};
  CHECK(merge_fold_e_values(std::vector<double>{0.5, 1.5}, two, Weighting::uniform) == 1.0);
  const std::size_t three[] = {3, 3, 3};
  CHECK(merge_fold_e_values(std::vector<double>{0.7, 0.7, 0.7}, three, Weighting::uniform) ==
        doctest::Approx(0.7));
  const std::size_t uneven[] = {3, 1};
  CHECK(merge_fold_e_values(std::vector<double>{1.0, 0.2}, uneven, Weighting::size_proportional) ==
        doctest::Approx(0.8));
}

TEST_CASE("fit_cross structure") {
  const auto ten = fit_cross(mixture(10, 1), 5, 3, RuleSpec::knn(1), Normalizer::mean());
  CHECK(ten.per_fold().size() == 5);
  for (const auto& p : ten.per_fold()) CHECK(p.calibration_summaries().size() == 2);

  const auto four = fit_cross(mixture(4, 2), 2, 3, RuleSpec::knn(1), Normalizer::mean());
  for (const auto& p : four.per_fold()) {
    CHECK(p.split().proper_size == 2);
    CHECK(p.split().calibration_size == 2);
  }
  try {
    fit_cross(mixture(10, 1), 1, 3, RuleSpec::knn(1), Normalizer::mean());
    FAIL("expected TooFewFolds");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TooFewFolds);
  }
}

TEST_CASE("cross prediction is the mean of the fold outputs") {
  const auto data = mixture(30, 6);
  const auto p = fit_cross(data, 3, 1, RuleSpec::knn(2), Normalizer::mean());
  const std::vector<double> x{1.0, 0.5};
  const Label labels[] = {0.0, 1.0};
  const auto table = cross_predict(p, x, labels);
  for (Label y : labels) {
    const auto folds = p.fold_e_values(x, y);
    CHECK(table.at(y) == doctest::Approx((folds[0] + folds[1] + folds[2]) / 3.0).epsilon(1e-14));
  }
}

TEST_CASE("cross prediction is invariant to permuting data and relabeling folds") {
  const auto data = mixture(25, 12);
  const auto partition = make_fold_partition(25, 4, 77);
  const auto base = fit_cross(data, partition, RuleSpec::knn(3), Normalizer::mean(),
                              Weighting::size_proportional);
  const std::vector<double> x{-0.3, 0.8};
  std::mt19937_64 gen(1);
  auto zs = copy(data);
  for (int t = 0; t < 100; ++t) {
    // new position of old index i is where[i]
    std::vector<std::size_t> order(25);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), gen);
    std::vector<Observation> permuted;
    std::vector<std::size_t> where(25);
    for (std::size_t pos = 0; pos < 25; ++pos) {
      permuted.push_back(zs[order[pos]]);
      where[order[pos]] = pos;
    }
    auto folds = partition.folds();
    for (auto& f : folds)
      for (auto& i : f) i = where[i];
    std::shuffle(folds.begin(), folds.end(), gen);

    const auto p = fit_cross(Dataset(permuted, data.task()), FoldPartition(folds, 25, 0),
                             RuleSpec::knn(3), Normalizer::mean(), Weighting::size_proportional);
    for (Label y : {0.0, 1.0}) REQUIRE(p.e_value(x, y) == base.e_value(x, y));
  }
}

TEST_CASE("full conformal e-prediction with support providers") {
  const auto data = mixture(9, 3);
  const std::vector<double> x{0.0, 0.0};
  const Label labels[] = {0.0, 1.0};

  const auto all = full_conformal_e_predict(data, x, labels, support_set_assignment(all_support));
  for (const auto& e : all.entries()) CHECK(e.e == doctest::Approx(1.0));

  const auto last_only = support_set_assignment([](std::span<const Observation> zs) {
    return SupportSet{{zs.size() - 1}, zs.size()};
  });
  const auto solo = full_conformal_e_predict(data, x, labels, last_only);
  for (const auto& e : solo.entries()) CHECK(e.e == doctest::Approx(10.0));
}

TEST_CASE("full conformal e-prediction matches the brute-forced margin provider") {
  // separator w=1, b=0, margin 1; support iff s(y)*x <= 1
  const Dataset train({{{-2.0}, 0}, {{-0.5}, 0}, {{0.5}, 1}, {{3.0}, 1}}, Task::classification(2));
  const Label labels[] = {0.0, 1.0};
  const auto table = full_conformal_e_predict(
      train, std::vector<double>{2.0}, labels,
      support_set_assignment(MarginSupportProvider{{1.0}, 0.0, 1.0}));
  CHECK(table.at(0.0) == doctest::Approx(5.0 / 3.0));  // SV = {2, 3, 5}, m = 5
  CHECK(table.at(1.0) == 0.0);                         // test point outside the margin
}

TEST_CASE("full conformal e-prediction is equivariant") {
  const auto data = mixture(20, 21);
  const MarginSupportProvider provider{{1.0, 0.0}, 0.0, 1.0};
  const auto assign = support_set_assignment(provider);
  const std::vector<double> x{0.2, 0.1};
  const Label labels[] = {0.0, 1.0};
  const auto base = full_conformal_e_predict(data, x, labels, assign);
  const auto base_vec = assign(data.observations());

  std::mt19937_64 gen(4);
  auto zs = copy(data);
  for (int t = 0; t < 100; ++t) {
    std::vector<std::size_t> order(zs.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), gen);
    std::vector<Observation> permuted;
    for (auto i : order) permuted.push_back(zs[i]);
    const auto moved = assign(permuted);
    for (std::size_t i = 0; i < order.size(); ++i) REQUIRE(moved[i] == base_vec[order[i]]);
    const auto table = full_conformal_e_predict(Dataset(permuted, data.task()), x, labels, assign);
    for (Label y : labels) REQUIRE(table.at(y) == base.at(y));
  }
}

TEST_CASE("cross_p_merge") {
  const auto a = cross_p_merge(std::vector<double>{0.1, 0.3});
  CHECK(a.adjusted == doctest::Approx(0.4));
  CHECK(a.unadjusted == doctest::Approx(0.2));
  CHECK(cross_p_merge(std::vector<double>{0.6, 0.8}).adjusted == 1.0);
  CHECK(cross_p_merge(std::vector<double>{0.15, 0.15, 0.15}).adjusted == doctest::Approx(0.3));
  CHECK_THROWS(cross_p_merge(std::vector<double>{0.0, 0.5}));
  CHECK_THROWS(cross_p_merge(std::vector<double>{1.5}));
}

TEST_CASE("p and e conversions") {
  CHECK(p_to_e(0.05) == doctest::Approx(20.0));
  CHECK(p_to_e(1.0) == 1.0);
  CHECK(e_to_p(0.5) == 1.0);
  CHECK_THROWS(p_to_e(0.0));
  CHECK_THROWS(e_to_p(-1.0));

  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 1000; ++t) {
    const double p = 1.0 - u(gen);  // (0, 1]
    REQUIRE(e_to_p(p_to_e(p)) == doctest::Approx(p).epsilon(1e-15));
    const double e = 1.0 / p;  // [1, inf)
    REQUIRE(p_to_e(e_to_p(e)) == doctest::Approx(e).epsilon(1e-15));
  }
}

TEST_CASE("harmonic mean") {
  CHECK(harmonic_mean(std::vector<double>{1, 1, 1}) == 1.0);
  CHECK(harmonic_mean(std::vector<double>{0.2, 0.5}) == doctest::Approx(2.0 / 7.0));
  CHECK(harmonic_mean(std::vector<double>{0.3, 0.0}) == 0.0);
  CHECK_THROWS(harmonic_mean(std::vector<double>{-1, 1}));

  std::mt19937_64 gen(12);
  std::lognormal_distribution<double> v(0.0, 2.0);
  std::uniform_int_distribution<int> len(1, 20);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> xs(len(gen));
    for (auto& x : xs) x = v(gen);
    REQUIRE(harmonic_mean(xs) <= arithmetic_mean(xs) * (1 + 1e-12));
  }
}

TEST_CASE("e_prediction_set") {
  const PlausibilityTable table({{0, 0.05}, {1, 0.5}, {2, 1.2}});
  CHECK(e_prediction_set(table, 0.1) == std::vector<Label>{1, 2});
  CHECK(e_prediction_set(table, 0.5, [](double) { return 0.0; }) == std::vector<Label>{0, 1, 2});

  const PlausibilityTable with_zero({{0, 0.0}, {1, 0.3}});
  CHECK(e_prediction_set(with_zero, 0.5, [](double) { return 0.0; }) == std::vector<Label>{1});

  const auto wide = e_prediction_set(table, 0.1);
  const auto narrow = e_prediction_set(table, 0.6);
  CHECK(std::includes(wide.begin(), wide.end(), narrow.begin(), narrow.end()));
  CHECK_THROWS(e_prediction_set(table, 0.0));
  CHECK_THROWS(e_prediction_set(table, 1.0));
}

TEST_CASE("prediction sets are nested in epsilon") {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> u(0.0, 3.0), eps(0.01, 0.99);
  for (int t = 0; t < 200; ++t) {
    std::vector<PlausibilityEntry> entries;
    for (int j = 0; j < 6; ++j) entries.push_back({static_cast<double>(j), u(gen)});
    const PlausibilityTable table(entries);
    double a = eps(gen), b = eps(gen);
    if (a > b) std::swap(a, b);
    const auto big = e_prediction_set(table, a), small = e_prediction_set(table, b);
    REQUIRE(std::includes(big.begin(), big.end(), small.begin(), small.end()));
  }
}

TEST_CASE("split p-values are super-uniform on exchangeable data") {
  const auto scenario = scenario_preset("gm2d");
  const std::size_t trials = 4000;
  std::vector<double> ps;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto d = sample(scenario, 41, derive_seed(555, t));
    const auto p = fit_split(d.slice(0, 40), 10, RuleSpec::knn(3), Normalizer::mean());
    ps.push_back(p.p_value(d[40].object, d[40].label));
  }
  for (double eps : {0.05, 0.1, 0.2}) {
    const double rate = static_cast<double>(std::count_if(ps.begin(), ps.end(),
                                                          [eps](double p) { return p <= eps; })) /
                        trials;
    const double se = std::sqrt(eps * (1 - eps) / trials);
    CHECK(rate <= eps + 3 * se);
  }
}

TEST_CASE("OnlineTrace prefix means") {
  const auto t = OnlineTrace::from({1.0, 3.0, 2.0});
  CHECK(t.running_means == std::vector<double>{1.0, 2.0, 2.0});
}
