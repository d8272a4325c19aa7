#include "finsler/sampling.hpp"

#include <cmath>
#include <numbers>

namespace finsler {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + index + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double Sampler::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Sampler::normal() {
  double u = uniform();
  while (u == 0.0) u = uniform();
  const double v = uniform();
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
}

std::vector<double> Sampler::on_sphere(int dim, double radius) {
  std::vector<double> y(static_cast<std::size_t>(dim));
  double norm = 0.0;
  while (norm < 1e-12) {
    norm = 0.0;
    for (auto& c : y) {
      c = normal();
      norm += c * c;
    }
    norm = std::sqrt(norm);
  }
  for (auto& c : y) c *= radius / norm;
  return y;
}

}  // namespace finsler
