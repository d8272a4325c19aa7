#pragma once

#include <string>

#include "finsler/expr.hpp"
#include "finsler/jet.hpp"

namespace finsler {

/// f and its partials up to second order at one (s, t).
struct ProductFunctionPartials {
  double f = 0.0;
  double fs = 0.0;
  double ft = 0.0;
  double fss = 0.0;
  double fst = 0.0;
  double ftt = 0.0;

  /// f_s f_t - 2 f f_st; nonzero is the nondegeneracy condition.
  double delta() const { return fs * ft - 2.0 * f * fst; }
};

/// The combining function f(s, t) of a Minkowskian product, F^2 = f(K, H).
class ProductFunction {
 public:
  enum class Kind { Linear, RatioSquare, Custom };

  /// f = a s + b t.
  static ProductFunction linear(double a, double b);
  /// f = s^2 / t.
  static ProductFunction ratio_square();
  /// Arbitrary expression in s and t.
  static ProductFunction custom(expr::Ast ast);

  Kind kind() const { return kind_; }
  double a() const { return a_; }
  double b() const { return b_; }
  const expr::Ast& ast() const { return ast_; }

  Jet operator()(const Jet& s, const Jet& t) const;
  double operator()(double s, double t) const;

  ProductFunctionPartials partials(double s, double t) const;

  /// Scene-file spelling: "linear(a,b)", "ratio_square" or the expression.
  std::string describe() const;

 private:
  ProductFunction() = default;

  Kind kind_ = Kind::Linear;
  double a_ = 1.0;
  double b_ = 1.0;
  expr::Ast ast_;
};

}  // namespace finsler
