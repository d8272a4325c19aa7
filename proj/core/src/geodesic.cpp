#include "finsler/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "finsler/curvature.hpp"
#include "finsler/errors.hpp"

namespace finsler {

namespace {

using State = std::vector<double>;  // (x, y) concatenated

State rhs(const Metric& m, const State& s) {
  const auto n = static_cast<std::size_t>(m.dim());
  const std::span<const double> x(s.data(), n);
  const std::span<const double> y(s.data() + n, n);
  if (auto why = m.domain_violation(x, y)) throw DomainError(*why);
  const auto g = spray_coefficients(m, x, y).g;
  State d(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = y[i];
    d[n + i] = -2.0 * g(static_cast<Eigen::Index>(i));
  }
  return d;
}

State axpy(const State& s, double h, const State& k) {
  State out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i] + h * k[i];
  return out;
}

State rk4_step(const Metric& m, const State& s, double h) {
  const State k1 = rhs(m, s);
  const State k2 = rhs(m, axpy(s, 0.5 * h, k1));
  const State k3 = rhs(m, axpy(s, 0.5 * h, k2));
  const State k4 = rhs(m, axpy(s, h, k3));
  State out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    out[i] = s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return out;
}

}  // namespace

GeodesicTrace integrate_geodesic(const Metric& m, std::span<const double> x0,
                                 std::span<const double> y0, double t_max, double dt) {
  const auto n = static_cast<std::size_t>(m.dim());
  if (x0.size() != n || y0.size() != n) throw std::invalid_argument("initial data has wrong dimension");
  if (std::all_of(y0.begin(), y0.end(), [](double c) { return c == 0.0; })) {
    throw DomainError("initial velocity must be nonzero");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(t_max >= dt)) throw std::invalid_argument("t_max must be at least dt");

  GeodesicTrace trace;
  State s(x0.begin(), x0.end());
  s.insert(s.end(), y0.begin(), y0.end());
  auto record = [&](double t) {
    const std::span<const double> x(s.data(), n);
    const std::span<const double> y(s.data() + n, n);
    trace.times.push_back(t);
    trace.states.push_back({{x.begin(), x.end()}, {y.begin(), y.end()}});
    trace.speeds.push_back(std::sqrt(f_squared(m, x, y)));
  };
  m.check_domain(x0, y0);
  record(0.0);

  // Times are k * dt rather than a running sum so long runs do not drift.
  const auto steps = static_cast<long>(std::ceil(t_max / dt * (1.0 - 1e-12)));
  for (long k = 1; k <= steps; ++k) {
    const double t0 = trace.times.back();
    const double t1 = k == steps ? t_max : static_cast<double>(k) * dt;
    try {
      State next = rk4_step(m, s, t1 - t0);
      const std::span<const double> x(next.data(), n);
      const std::span<const double> y(next.data() + n, n);
      if (auto why = m.domain_violation(x, y)) throw DomainError(*why);
      s = std::move(next);
      record(t1);
    } catch (const DomainError& e) {
      trace.stopped_early = std::string("domain exit near t = ") + std::to_string(t1) + ": " + e.what();
      break;
    } catch (const SingularMatrix& e) {
      trace.stopped_early = std::string("singular fundamental tensor near t = ") + std::to_string(t1) +
                            ": " + e.what();
      break;
    }
  }

  const double f0 = trace.speeds.front();
  for (double f : trace.speeds) trace.max_speed_drift = std::max(trace.max_speed_drift, std::abs(f - f0) / f0);
  return trace;
}

void write_trace_csv(const GeodesicTrace& trace, std::ostream& out) {
  if (trace.states.empty()) return;
  const std::size_t n = trace.states.front().x.size();
  out << 't';
  for (std::size_t i = 1; i <= n; ++i) out << ",x" << i;
  for (std::size_t i = 1; i <= n; ++i) out << ",y" << i;
  out << ",F\n";
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  for (std::size_t k = 0; k < trace.states.size(); ++k) {
    put(trace.times[k]);
    for (double v : trace.states[k].x) {
      out << ',';
      put(v);
    }
    for (double v : trace.states[k].y) {
      out << ',';
      put(v);
    }
    out << ',';
    put(trace.speeds[k]);
    out << '\n';
  }
}

}  // namespace finsler
