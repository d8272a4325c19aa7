#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace finsler {

/// Per-sample seed derived from (seed, index) with a splitmix64 finalizer.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Platform-independent sampler on top of mt19937_64 (whose output sequence
/// is fixed by the standard, unlike std::*_distribution).
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal (Box-Muller).
  double normal();
  /// Uniform point on the sphere of the given radius in R^dim.
  std::vector<double> on_sphere(int dim, double radius);

 private:
  std::mt19937_64 engine_;
};

}  // namespace finsler
