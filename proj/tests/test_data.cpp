#include "doctest.h"

#include <cmath>
#include <sstream>

#include "confee/data.hpp"

using namespace confee;

TEST_CASE("sampling is deterministic and prefix stable") {
  const auto s = scenario_preset("gm2d");
  const auto a = sample(s, 50, 7), b = sample(s, 50, 7), longer = sample(s, 80, 7);
  for (std::size_t i = 0; i < 50; ++i) {
    REQUIRE(a[i].object == b[i].object);
    REQUIRE(a[i].label == b[i].label);
    REQUIRE(a[i].object == longer[i].object);
    REQUIRE(a[i].object == sample_one(s, 7, i).object);
  }
  CHECK(sample(s, 1, 7).size() == 1);
  CHECK_THROWS(sample(s, 0, 7));
}

TEST_CASE("gaussian mixture draws every class around its mean") {
  const auto s = scenario_preset("gm5c");
  const auto d = sample(s, 5000, 3);
  std::vector<double> sum(5, 0.0);
  std::vector<std::size_t> count(5, 0);
  for (const auto& z : d.observations()) {
    const auto c = static_cast<std::size_t>(z.label);
    sum[c] += z.object[0];
    ++count[c];
  }
  for (std::size_t c = 0; c < 5; ++c) {
    CHECK(count[c] > 800);
    CHECK(sum[c] / count[c] == doctest::Approx(3.0 * (static_cast<double>(c) - 2.0)).epsilon(0.05));
  }
}

TEST_CASE("noiseless regression is exactly linear") {
  auto s = scenario_preset("linreg10");
  s.noise_sd = 0.0;
  const auto w = s.weights();
  const auto d = sample(s, 100, 5);
  for (const auto& z : d.observations()) {
    double y = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) y += w[j] * z.object[j];
    REQUIRE(z.label == y);
  }
}

TEST_CASE("invalid scenarios") {
  Scenario s;
  s.classes = 1;
  CHECK_THROWS_AS(sample(s, 5, 1), Error);
  s = scenario_preset("linreg1");
  s.noise_sd = -1;
  CHECK_THROWS_AS(sample(s, 5, 1), Error);
  CHECK_THROWS(scenario_preset("nope"));
}

TEST_CASE("read_csv parses a well-formed file") {
  std::istringstream in("x1,x2,y\n1.5,2,a\n-3,4e-1,b\n0,0,a\n");
  const auto d = read_csv(in, Task::classification(std::vector<std::string>{"a", "b"}));
  CHECK(d.size() == 3);
  CHECK(d[1].object == std::vector<double>{-3, 0.4});
  CHECK(d[1].label == 1.0);
}

TEST_CASE("read_csv infers a sorted label space when none is given") {
  std::istringstream in("x1,y\n1,dog\n2,cat\n");
  const auto d = read_csv(in, Task{});
  CHECK(d.task().class_names == std::vector<std::string>{"cat", "dog"});
  CHECK(d[0].label == 1.0);
}

TEST_CASE("read_csv error reporting") {
  const auto task = Task::classification(std::vector<std::string>{"a", "b"});
  {
    std::istringstream in("x1,x2,y\n1,2,a\n1,a\n");
    try {
      read_csv(in, task);
      FAIL("expected RaggedRows");
    } catch (const CsvError& e) {
      CHECK(e.kind() == ErrorKind::RaggedRows);
      CHECK(e.line() == 3);
    }
  }
  {
    std::istringstream in("x1,y\n1,a\n2,c\n");
    try {
      read_csv(in, task);
      FAIL("expected LabelOutOfSpace");
    } catch (const CsvError& e) {
      CHECK(e.kind() == ErrorKind::LabelOutOfSpace);
      CHECK(e.line() == 3);
    }
  }
  {
    std::istringstream in("x1,y\n1,a\nfoo,b\n");
    try {
      read_csv(in, task);
      FAIL("expected ParseError");
    } catch (const CsvError& e) {
      CHECK(e.kind() == ErrorKind::ParseError);
      CHECK(e.line() == 3);
      CHECK(e.column() == 1);
    }
  }
  {
    std::istringstream in("x2,y\n1,a\n");
    CHECK_THROWS_AS(read_csv(in, task), CsvError);
  }
}

TEST_CASE("objects CSV may omit the label column") {
  std::istringstream in("x1\n3\n4\n");
  const auto t = read_objects_csv(in, Task::regression({0.0}));
  CHECK(t.objects.size() == 2);
  CHECK_FALSE(t.labels[0].has_value());
}

TEST_CASE("write_csv then read_csv is the identity") {
  for (const auto& name : scenario_preset_names()) {
    const auto s = scenario_preset(name);
    const auto d = sample(s, 40, 11);
    std::stringstream io;
    write_csv(io, d);
    const auto back = read_csv(io, s.task());
    REQUIRE(back.size() == d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
      REQUIRE(back[i].object == d[i].object);
      REQUIRE(back[i].label == d[i].label);
    }
  }
}

TEST_CASE("format_double round trips 12-digit decimals") {
  for (double v : {0.1, 123456.789012, -9.87654321e-5, 1e300}) {
    std::istringstream in("x1,y\n" + format_double(v) + ",0\n");
    CHECK(read_csv(in, Task::regression({0.0}))[0].object[0] == v);
  }
}
