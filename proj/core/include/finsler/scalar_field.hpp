#pragma once

#include <functional>
#include <span>
#include <vector>

#include "finsler/jet.hpp"

namespace finsler {

/// A deterministic scalar function of `arity` jet-valued arguments.
class ScalarField {
 public:
  using Evaluator = std::function<Jet(std::span<const Jet>)>;

  ScalarField() = default;
  ScalarField(int arity, Evaluator evaluator);

  int arity() const { return arity_; }
  explicit operator bool() const { return static_cast<bool>(evaluator_); }

  Jet operator()(std::span<const Jet> args) const;

  /// Plain value, computed through order-0 jets.
  double value(std::span<const double> point) const;

 private:
  int arity_ = 0;
  Evaluator evaluator_;
};

/// Taylor expansion of `field` about `point` to the given order (1..6).
Jet lift(const ScalarField& field, std::span<const double> point, int order);

/// Same as lift() but accepts order 0; used internally for plain values.
Jet expand(const ScalarField& field, std::span<const double> point, int order);

/// Step used when none is supplied: 1e-4 * max(1, |coordinate|) for first and
/// second partials. Higher partials lose digits as step^-degree, so degree 3
/// and 4 use 2e-3 and 3e-3 respectively (same coordinate scaling).
double default_fd_step(int degree, double coordinate);

/// Central-difference estimate of d^idx field at point with one Richardson
/// extrapolation level (steps h and 2h), error O(h^4). Requires degree <= 4.
/// Each variable is perturbed by step * max(1, |point_i|).
double fd_partial(const ScalarField& field, std::span<const double> point, const MultiIndex& idx,
                  double step);

/// fd_partial with default_fd_step for the index degree.
double fd_partial(const ScalarField& field, std::span<const double> point, const MultiIndex& idx);

}  // namespace finsler
