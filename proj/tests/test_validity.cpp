#include "doctest.h"

#include "confee/validity.hpp"

using namespace confee;

namespace {

PredictorConfig constant(double c) {
  PredictorConfig p;
  p.kind = PredictorKind::constant;
  p.constant = c;
  return p;
}

}  // namespace

TEST_CASE("violation detector sanity") {
  const auto s = scenario_preset("gm2d");
  SpaceValidityOptions o;
  o.trials = 200;
  const auto one = mc_space_validity(s, constant(1.0), o);
  CHECK(one.mean_e_at_truth == 1.0);
  CHECK(one.std_error == 0.0);
  CHECK(one.verdict == Verdict::consistent);
  CHECK(mc_space_validity(s, constant(2.0), o).verdict == Verdict::violation);

  o.trials = 50;
  CHECK_THROWS(mc_space_validity(s, constant(1.0), o));
}

TEST_CASE("space reports are independent of the thread count") {
  const auto s = scenario_preset("gm2d");
  PredictorConfig cfg;  // cross, knn, mean
  SpaceValidityOptions o;
  o.trials = 300;
  o.seed = 42;
  const auto serial = mc_space_validity(s, cfg, o);
  o.threads = 4;
  const auto parallel = mc_space_validity(s, cfg, o);
  CHECK(serial.mean_e_at_truth == parallel.mean_e_at_truth);
  CHECK(serial.std_error == parallel.std_error);
  for (std::size_t i = 0; i < serial.tails.size(); ++i)
    CHECK(serial.tails[i].rate == parallel.tails[i].rate);
}

TEST_CASE("every shipped e-predictor configuration is consistent on every preset") {
  for (const auto& name : scenario_preset_names()) {
    const auto s = scenario_preset(name);
    const bool classification = s.kind == Scenario::Kind::gaussian_mixture;
    std::vector<PredictorConfig> configs;
    for (auto kind : {PredictorKind::split, PredictorKind::cross}) {
      for (auto norm : {Normalizer::mean(), Normalizer::sum()}) {
        PredictorConfig c;
        c.kind = kind;
        c.normalizer = norm;
        c.rule = classification ? RuleSpec::knn(3) : RuleSpec::ridge(1.0);
        configs.push_back(c);
      }
    }
    if (s.classes == 2 && classification) {
      PredictorConfig full;
      full.kind = PredictorKind::full;
      configs.push_back(full);
    }
    for (const auto& c : configs) {
      for (std::uint64_t seed : {1, 2, 3}) {
        SpaceValidityOptions o;
        o.n = 50;
        o.trials = 400;
        o.seed = seed;
        const auto r = mc_space_validity(s, c, o);
        INFO(name, " ", to_string(c.kind), " ", c.normalizer.name(), " seed ", seed);
        CHECK(r.verdict == Verdict::consistent);
        for (const auto& t : r.tails) CHECK(t.rate <= t.markov_bound + 3 * t.std_error);
      }
    }
  }
}

TEST_CASE("online harness with the constant predictor") {
  TimeValidityOptions o;
  o.n_rounds = 60;
  const auto r = online_time_validity(scenario_preset("gm2d"), constant(1.0), o);
  CHECK(r.trace.e_values.size() == 60);
  for (double m : r.trace.running_means) CHECK(m == 1.0);
  CHECK(r.verdict == Verdict::consistent);
}

TEST_CASE("online harness refuses unbounded normalizers") {
  PredictorConfig c;
  c.normalizer = Normalizer::custom("flat", [](const SummaryVector& s) {
    return make_e_vector(std::vector<double>(s.size(), 1.0));
  });
  TimeValidityOptions o;
  o.n_rounds = 60;
  try {
    online_time_validity(scenario_preset("gm2d"), c, o);
    FAIL("expected UnboundedNormalizer");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnboundedNormalizer);
  }
  o.n_rounds = 10;
  CHECK_THROWS(online_time_validity(scenario_preset("gm2d"), constant(1.0), o));
}

TEST_CASE("online harness reports the sum normalizer bound") {
  PredictorConfig c;
  c.normalizer = Normalizer::sum();
  TimeValidityOptions o;
  o.n_rounds = 80;
  const auto r = online_time_validity(scenario_preset("gm2d"), c, o);
  CHECK(r.bound_used == 1.0);
  for (double e : r.trace.e_values) CHECK(e <= 1.0);
}

TEST_CASE("online reports do not depend on the thread count") {
  PredictorConfig c;
  TimeValidityOptions o;
  o.n_rounds = 120;
  const auto a = online_time_validity(scenario_preset("gm2d"), c, o);
  o.threads = 3;
  const auto b = online_time_validity(scenario_preset("gm2d"), c, o);
  CHECK(a.trace.e_values == b.trace.e_values);
}

TEST_CASE("compare report structure") {
  PredictorConfig c;
  CompareOptions o;
  o.trials = 300;
  const auto r = compare_e_vs_p(scenario_preset("gm2d"), c, o);
  CHECK(r.ccpp_adjusted.size() == 3);
  CHECK(r.harmonic_le_arithmetic == 300);
  CHECK(r.max_identity_error < 1e-12);
  CHECK(r.mean_harmonic_p <= r.mean_arithmetic_p);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(r.ccpp_adjusted[i].rate <= r.ccpp_unadjusted[i].rate);
}

TEST_CASE("predictor bounds") {
  PredictorConfig c;
  c.kind = PredictorKind::split;
  c.calibration_size = 10;
  CHECK(*predictor_bound(c, 100) == 11.0);
  c.normalizer = Normalizer::sum();
  CHECK(*predictor_bound(c, 100) == 1.0);
  c.kind = PredictorKind::cross;
  c.normalizer = Normalizer::mean();
  c.folds = 3;
  CHECK(*predictor_bound(c, 10) == 5.0);  // largest fold has 4 points
}
