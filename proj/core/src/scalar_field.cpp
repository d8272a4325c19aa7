#include "finsler/scalar_field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "finsler/errors.hpp"

namespace finsler {

ScalarField::ScalarField(int arity, Evaluator evaluator)
    : arity_(arity), evaluator_(std::move(evaluator)) {
  if (arity < 1) throw std::invalid_argument("scalar field arity must be positive");
}

Jet ScalarField::operator()(std::span<const Jet> args) const {
  if (static_cast<int>(args.size()) != arity_) {
    throw std::invalid_argument("scalar field called with wrong number of arguments");
  }
  return evaluator_(args);
}

double ScalarField::value(std::span<const double> point) const {
  return expand(*this, point, 0).value();
}

Jet expand(const ScalarField& field, std::span<const double> point, int order) {
  if (static_cast<int>(point.size()) != field.arity()) {
    throw std::invalid_argument("point dimension does not match field arity");
  }
  auto space = JetSpace::get(field.arity(), order);
  std::vector<Jet> args;
  args.reserve(point.size());
  for (int i = 0; i < field.arity(); ++i) {
    args.push_back(Jet::variable(space, i, point[static_cast<std::size_t>(i)]));
  }
  return field(args);
}

Jet lift(const ScalarField& field, std::span<const double> point, int order) {
  if (order < 1) throw std::invalid_argument("lift order must be at least 1");
  if (order > kMaxJetOrder) throw OrderExceeded("lift order " + std::to_string(order) + " exceeds the maximum of 6");
  return expand(field, point, order);
}

double default_fd_step(int degree, double coordinate) {
  const double base = degree <= 2 ? 1e-4 : (degree == 3 ? 2e-3 : 3e-3);
  return base * std::max(1.0, std::abs(coordinate));
}

namespace {

// Tensor-product central difference: every variable with exponent k is
// differentiated by k applications of (f(x + h) - f(x - h)) / 2h.
double central_difference(const ScalarField& field, std::span<const double> point,
                          const MultiIndex& idx, std::span<const double> steps) {
  const int n = field.arity();
  std::vector<int> active;
  for (int v = 0; v < n; ++v) {
    if (idx[v] > 0) active.push_back(v);
  }
  std::vector<double> x(point.begin(), point.end());
  // Enumerate binomial stencil offsets j_v in [0, k_v] for each active variable.
  std::vector<int> j(active.size(), 0);
  double sum = 0.0;
  while (true) {
    double weight = 1.0;
    for (std::size_t a = 0; a < active.size(); ++a) {
      const int v = active[a];
      const int k = idx[v];
      double binom = 1.0;
      for (int i = 1; i <= j[a]; ++i) binom = binom * (k - i + 1) / i;
      weight *= (j[a] % 2 == 0 ? binom : -binom);
      x[static_cast<std::size_t>(v)] =
          point[static_cast<std::size_t>(v)] + (k - 2 * j[a]) * steps[static_cast<std::size_t>(v)];
    }
    sum += weight * field.value(x);
    std::size_t a = 0;
    for (; a < active.size(); ++a) {
      if (++j[a] <= idx[active[a]]) break;
      j[a] = 0;
    }
    if (a == active.size()) break;
  }
  for (int v : active) sum /= std::pow(2.0 * steps[static_cast<std::size_t>(v)], idx[v]);
  return sum;
}

}  // namespace

double fd_partial(const ScalarField& field, std::span<const double> point, const MultiIndex& idx,
                  double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  if (idx.size() != field.arity()) throw std::invalid_argument("multi-index arity mismatch");
  if (idx.degree() > 4) throw std::invalid_argument("finite differences support degree <= 4");
  if (idx.degree() == 0) return field.value(point);
  std::vector<double> h(point.size());
  std::vector<double> h2(point.size());
  for (std::size_t i = 0; i < point.size(); ++i) {
    h[i] = step * std::max(1.0, std::abs(point[i]));
    h2[i] = 2.0 * h[i];
  }
  const double fine = central_difference(field, point, idx, h);
  const double coarse = central_difference(field, point, idx, h2);
  return (4.0 * fine - coarse) / 3.0;
}

double fd_partial(const ScalarField& field, std::span<const double> point, const MultiIndex& idx) {
  // fd_partial scales the step by max(1, |x_i|) per variable already.
  return fd_partial(field, point, idx, default_fd_step(idx.degree(), 1.0));
}

}  // namespace finsler
