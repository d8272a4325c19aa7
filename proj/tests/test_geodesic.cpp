#include <doctest.h>

#include <cmath>
#include <sstream>

#include "finsler/errors.hpp"
#include "finsler/geodesic.hpp"
#include "zoo.hpp"

using namespace finsler;

namespace {

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

std::vector<double> with_speed(const Metric& m, const std::vector<double>& x, std::vector<double> y, double speed) {
  const double f = std::sqrt(f_squared(m, x, y));
  for (auto& v : y) v *= speed / f;
  return y;
}

}  // namespace

TEST_CASE("Euclidean geodesics are straight lines") {
  const auto m = zoo::make(zoo::euclidean(2));
  const std::vector<double> x0{0, 0};
  const std::vector<double> y0{1, 2};
  const auto t = integrate_geodesic(m, x0, y0, 1.0, 1e-3);
  REQUIRE(t.completed());
  CHECK(distance(t.final_state().x, {1, 2}) < 1e-12);
  CHECK(t.max_speed_drift < 1e-12);
  CHECK(t.times.back() == 1.0);
}

TEST_CASE("sphere equator is a great circle") {
  const auto m = zoo::make(zoo::sphere());
  const std::vector<double> x0{M_PI / 2.0, 0.0};
  const std::vector<double> y0{0.0, 1.0};
  const auto t = integrate_geodesic(m, x0, y0, M_PI, 1e-3);
  REQUIRE(t.completed());
  CHECK(t.times.back() == M_PI);
  CHECK(std::abs(t.final_state().x[1] - M_PI) < 1e-10);
  double worst_theta = 0.0;
  for (const auto& s : t.states) worst_theta = std::max(worst_theta, std::abs(s.x[0] - M_PI / 2.0));
  CHECK(worst_theta < 1e-12);
  CHECK(t.max_speed_drift < 1e-8);
}

TEST_CASE("trace invariants") {
  const auto m = zoo::make(zoo::sphere());
  const auto t = integrate_geodesic(m, std::vector<double>{1.0, 0.0}, std::vector<double>{0.3, 0.8}, 2.0, 0.01);
  REQUIRE(t.times.size() == t.states.size());
  REQUIRE(t.speeds.size() == t.states.size());
  for (std::size_t k = 1; k < t.times.size(); ++k) CHECK(t.times[k] > t.times[k - 1]);
  for (double s : t.speeds) CHECK(s > 0.0);
  double drift = 0.0;
  for (double s : t.speeds) drift = std::max(drift, std::abs(s - t.speeds[0]) / t.speeds[0]);
  CHECK(drift == t.max_speed_drift);
}

TEST_CASE("speed is conserved on every zoo metric") {
  for (const auto& entry : zoo::all_metrics()) {
    INFO(entry.name);
    const auto m = zoo::make(entry.spec);
    Sampler rng(1);
    const auto [x, y] = sample_point(m, rng, {});
    const auto t = integrate_geodesic(m, x, with_speed(m, x, y, 0.5), 10.0, 1e-3);
    CHECK(t.completed());
    CHECK(t.max_speed_drift < 1e-6);
  }
}

TEST_CASE("RK4 converges at fourth order") {
  const auto m = zoo::make(zoo::sphere());
  const std::vector<double> x0{1.0, 0.0};
  const std::vector<double> y0{0.3, 0.8};
  auto end = [&](double dt) { return integrate_geodesic(m, x0, y0, 2.0, dt).final_state().x; };
  const auto a = end(0.1), b = end(0.05), c = end(0.025);
  const double ratio = distance(a, b) / distance(b, c);
  CHECK(ratio >= 12.0);
  CHECK(ratio <= 20.0);
}

TEST_CASE("doubling the initial velocity doubles the speed along the same path") {
  const auto m = zoo::make(zoo::randers_curved());
  const std::vector<double> x0{0.1, -0.2};
  const std::vector<double> y0{0.4, 0.3};
  const std::vector<double> y2{0.8, 0.6};
  const auto slow = integrate_geodesic(m, x0, y0, 2.0, 1e-3);
  const auto fast = integrate_geodesic(m, x0, y2, 1.0, 1e-3);
  CHECK(distance(slow.final_state().x, fast.final_state().x) < 1e-8);
}

TEST_CASE("product geodesics project onto factor geodesics") {
  for (const auto& entry : zoo::test_matrix()) {
    INFO(entry.name);
    const auto m = zoo::make(entry.spec);
    const auto& parts = *m.product();
    const auto a = static_cast<std::ptrdiff_t>(parts.left->dim());
    Sampler rng(2);
    const auto [x, y] = sample_point(m, rng, {});
    const auto t = integrate_geodesic(m, x, y, 1.0, 1e-3);
    const auto tl = integrate_geodesic(*parts.left, std::vector<double>(x.begin(), x.begin() + a),
                                       std::vector<double>(y.begin(), y.begin() + a), 1.0, 1e-3);
    const auto tr = integrate_geodesic(*parts.right, std::vector<double>(x.begin() + a, x.end()),
                                       std::vector<double>(y.begin() + a, y.end()), 1.0, 1e-3);
    REQUIRE(t.completed());
    const auto& end = t.final_state().x;
    CHECK(distance(std::vector<double>(end.begin(), end.begin() + a), tl.final_state().x) < 1e-6);
    CHECK(distance(std::vector<double>(end.begin() + a, end.end()), tr.final_state().x) < 1e-6);
  }
}

TEST_CASE("leaving the domain stops the integration with a partial trace") {
  const auto m = zoo::make(zoo::randers(2, {"1", "0", "1"}, {"0.2*x1", "0"}));
  const auto t = integrate_geodesic(m, std::vector<double>{0, 0}, std::vector<double>{1, 0}, 10.0, 1e-2);
  REQUIRE_FALSE(t.completed());
  CHECK(t.stopped_early->find("domain exit") != std::string::npos);
  CHECK(t.times.back() < 10.0);
  CHECK(t.times.size() == t.states.size());
  CHECK_FALSE(m.domain_violation(t.final_state().x, t.final_state().y).has_value());
}

TEST_CASE("integration preconditions") {
  const auto m = zoo::make(zoo::euclidean(2));
  const std::vector<double> x0{0, 0};
  const std::vector<double> y0{1, 0};
  CHECK_THROWS_AS(integrate_geodesic(m, x0, std::vector<double>{0, 0}, 1.0, 0.1), DomainError);
  CHECK_THROWS_AS(integrate_geodesic(m, x0, y0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(integrate_geodesic(m, x0, y0, 0.01, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(integrate_geodesic(m, x0, std::vector<double>{1, 0, 0}, 1.0, 0.1), std::invalid_argument);
}

TEST_CASE("trace CSV") {
  const auto m = zoo::make(zoo::euclidean(2));
  const auto t = integrate_geodesic(m, std::vector<double>{0, 0}, std::vector<double>{0.1, 0.2}, 0.3, 0.1);
  std::ostringstream out;
  write_trace_csv(t, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,x1,x2,y1,y2,F");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 5);
  }
  CHECK(rows == static_cast<int>(t.states.size()));
  CHECK(out.str().find(",0.10000000000000001,") != std::string::npos);
}
