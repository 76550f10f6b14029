#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "roadheat/timeseries.hpp"

#include <random>
#include <sstream>

using namespace roadheat;

TEST_CASE("two-point snow series parses as-is") {
  std::istringstream in("0,30\n60,30");
  const TimeSeries s = load_series(in, SeriesKind::Snowfall);
  REQUIRE(s.size() == 2);
  CHECK(s.t_min(0) == 0.0);
  CHECK(s.t_min(1) == 60.0);
  CHECK(s.value(0) == 30.0);
  CHECK(s.value(1) == 30.0);
}

TEST_CASE("header line is skipped") {
  std::istringstream in("time,value\n0,1\n10,2");
  const TimeSeries s = load_series(in);
  REQUIRE(s.size() == 2);
  CHECK(s.value(1) == 2.0);
}

TEST_CASE("native sampling intervals are retained") {
  // 1 h radiation spacing
  std::istringstream hourly("0,10\n60,20\n120,15\n180,5");
  const TimeSeries rad = load_series(hourly, SeriesKind::SolarFlux);
  REQUIRE(rad.size() == 4);
  CHECK(rad.t_min(1) - rad.t_min(0) == 60.0);
  // 10 min temperature spacing
  std::istringstream tenmin("0,-1\n10,-0.5\n20,0\n30,0.2");
  const TimeSeries temp = load_series(tenmin, SeriesKind::AirTemperature);
  REQUIRE(temp.size() == 4);
  CHECK(temp.t_min(2) - temp.t_min(1) == 10.0);
}

TEST_CASE("iso-8601 timestamps become minute offsets") {
  std::istringstream in(
      "2026-01-19T06:00:00,5\n"
      "2026-01-19T06:30:00,7\n"
      "2026-01-19 07:00:00,9");
  const TimeSeries s = load_series(in);
  REQUIRE(s.size() == 3);
  CHECK(s.t_min(0) == doctest::Approx(0.0));
  CHECK(s.t_min(1) == doctest::Approx(30.0));
  CHECK(s.t_min(2) == doctest::Approx(60.0));
}

TEST_CASE("malformed row reports its line number") {
  std::istringstream in("0,1\n10,two\n20,3");
  try {
    load_series(in);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("non-monotone timestamps are rejected") {
  std::istringstream in("0,1\n10,2\n10,3");
  CHECK_THROWS_AS(load_series(in), ParseError);
  std::istringstream in2("0,1\n10,2\n5,3");
  CHECK_THROWS_AS(load_series(in2), ParseError);
}

TEST_CASE("sign invariants are enforced per series kind") {
  std::istringstream pos("0,1\n10,2");
  CHECK_THROWS_AS(load_series(pos, SeriesKind::ResidentialLoad), ConfigError);
  std::istringstream neg("0,-1\n10,-2");
  CHECK_THROWS_AS(load_series(neg, SeriesKind::PvGeneration), ConfigError);
  std::istringstream neg2("0,-0.1\n10,0");
  CHECK_THROWS_AS(load_series(neg2, SeriesKind::Snowfall), ConfigError);
}

TEST_CASE("rescale examples") {
  TimeSeries s;
  s.t_min = linspace(0, 2, 3);
  s.value = ArrayXd::Constant(3, 9.0);
  const TimeSeries third = rescale(s, 1.0 / 3.0);
  for (int i = 0; i < 3; ++i) CHECK(third.value(i) == doctest::Approx(3.0));
  const TimeSeries same = rescale(s, 1.0);
  for (int i = 0; i < 3; ++i) CHECK(same.value(i) == 9.0);

  TimeSeries kw;
  kw.t_min = linspace(0, 1, 2);
  kw.value = ArrayXd::Constant(2, 1000.0);
  CHECK(rescale(kw, 1e-3).value(0) == doctest::Approx(1.0));
}

TEST_CASE("rescale round trip is identity to 1e-15") {
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> val(-5.0, 5.0);
  std::uniform_real_distribution<double> fac(0.1, 10.0);
  for (int rep = 0; rep < 200; ++rep) {
    TimeSeries s;
    s.t_min = linspace(0, 9, 10);
    s.value = ArrayXd::Zero(10);
    for (int i = 0; i < 10; ++i) s.value(i) = val(gen);
    const double f = fac(gen);
    const TimeSeries back = rescale(rescale(s, f), 1.0 / f);
    for (int i = 0; i < 10; ++i)
      CHECK(back.value(i) == doctest::Approx(s.value(i)).epsilon(1e-15));
  }
}

TEST_CASE("interpolation midpoint and constants") {
  TimeSeries s;
  s.t_min = linspace(0, 60, 2);
  s.value = ArrayXd::Zero(2);
  s.value << 0.0, 60.0;
  const TimeSeries grid = interpolate_to_grid(s, 30.0, 0.0, 60.0);
  REQUIRE(grid.size() == 121);
  CHECK(grid.value(1) == doctest::Approx(0.5));  // t = 0.5 min
  CHECK(sample_series(grid, 30.0) == doctest::Approx(30.0));
  CHECK(grid.value(0) == 0.0);
  CHECK(grid.value(120) == 60.0);

  TimeSeries c;
  c.t_min = linspace(0, 100, 3);
  c.value = ArrayXd::Constant(3, 4.5);
  const TimeSeries cg = interpolate_to_grid(c, 30.0, 0.0, 100.0);
  CHECK(cg.value.minCoeff() == 4.5);
  CHECK(cg.value.maxCoeff() == 4.5);
}

TEST_CASE("case-2 style snowfall step lands on the grid") {
  // 12 mm per hour from minute 60: 0.2 mm/min after, 0 before
  TimeSeries s;
  s.t_min = ArrayXd::Zero(4);
  s.value = ArrayXd::Zero(4);
  s.t_min << 0.0, 60.0, 60.5, 120.0;
  s.value << 0.0, 0.0, 0.2, 0.2;
  const TimeSeries grid = interpolate_to_grid(s, 30.0, 0.0, 120.0);
  CHECK(sample_series(grid, 30.0) == 0.0);
  CHECK(sample_series(grid, 60.0) == 0.0);
  CHECK(sample_series(grid, 61.0) == doctest::Approx(0.2));
  CHECK(sample_series(grid, 90.0) == doctest::Approx(0.2));
}

TEST_CASE("interpolation is exact on affine series") {
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  for (int rep = 0; rep < 50; ++rep) {
    const double a = coef(gen);
    const double b = coef(gen);
    TimeSeries s;
    s.t_min = ArrayXd::Zero(5);
    s.t_min << 0.0, 17.0, 40.0, 77.5, 120.0;
    s.value = a * s.t_min + b;
    const TimeSeries grid = interpolate_to_grid(s, 30.0, 0.0, 120.0);
    for (Index i = 0; i < grid.size(); ++i) {
      const double expect = a * grid.t_min(i) + b;
      CHECK(grid.value(i) ==
            doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("window outside the support is an extrapolation error") {
  TimeSeries s;
  s.t_min = linspace(10, 50, 3);
  s.value = ArrayXd::Constant(3, 1.0);
  CHECK_THROWS_AS(interpolate_to_grid(s, 30.0, 0.0, 50.0), ConfigError);
  CHECK_THROWS_AS(interpolate_to_grid(s, 30.0, 10.0, 60.0), ConfigError);
}

TEST_CASE("predict holds the current value") {
  TimeSeries s;
  s.t_min = linspace(0, 120, 241);
  s.value = ArrayXd::Constant(241, 5.0);
  const TimeSeries held = predict(s, 40.0, 30.0);
  REQUIRE(held.size() == 60);
  CHECK(held.value.minCoeff() == 5.0);
  CHECK(held.value.maxCoeff() == 5.0);
  // constancy is exact
  CHECK(held.value.maxCoeff() - held.value.minCoeff() == 0.0);
}

TEST_CASE("predict with zero horizon is empty") {
  TimeSeries s;
  s.t_min = linspace(0, 10, 21);
  s.value = linspace(0, 10, 21);
  CHECK(predict(s, 5.0, 0.0).size() == 0);
}

TEST_CASE("predictor error against a ground-truth ramp") {
  // truth: value(t) = 2 t; prediction from t = 10 stays at 20
  TimeSeries s;
  s.t_min = linspace(0, 60, 121);
  s.value = 2.0 * s.t_min;
  const TimeSeries held = predict(s, 10.0, 30.0);
  double max_err = 0.0;
  for (Index i = 0; i < held.size(); ++i) {
    const double truth = 2.0 * held.t_min(i);
    max_err = std::max(max_err, std::abs(held.value(i) - truth));
  }
  // last predicted sample is at t = 39.5 -> error 2 * 29.5 = 59
  CHECK(max_err == doctest::Approx(59.0));
}
