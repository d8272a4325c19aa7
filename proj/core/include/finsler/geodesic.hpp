#pragma once

// Fixed-step RK4 integration of the geodesic system
//   dx/dt = y,  dy/dt = -2 G(x, y).

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "finsler/metric.hpp"

namespace finsler {

struct PhaseState {
  std::vector<double> x;
  std::vector<double> y;
};

struct GeodesicTrace {
  std::vector<double> times;
  std::vector<PhaseState> states;
  std::vector<double> speeds;  // F(x, y) at each recorded state
  double max_speed_drift = 0.0;  // max |F - F(0)| / F(0)
  /// Set when integration stopped before t_max (domain exit or a singular
  /// fundamental tensor); the trace then ends at the last good state.
  std::optional<std::string> stopped_early;

  bool completed() const { return !stopped_early.has_value(); }
  const PhaseState& final_state() const { return states.back(); }
};

/// Requires y0 != 0, dt > 0 and t_max >= dt. The last step is shortened so
/// that the trace ends exactly at t_max.
GeodesicTrace integrate_geodesic(const Metric& m, std::span<const double> x0,
                                 std::span<const double> y0, double t_max, double dt);

/// Columns t, x1..xn, y1..yn, F with 17 significant digits.
void write_trace_csv(const GeodesicTrace& trace, std::ostream& out);

}  // namespace finsler
