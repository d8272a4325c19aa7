#include "finsler/product_function.hpp"

#include <cstdio>
#include <stdexcept>

namespace finsler {

ProductFunction ProductFunction::linear(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("linear(a, b) requires a, b > 0");
  ProductFunction f;
  f.kind_ = Kind::Linear;
  f.a_ = a;
  f.b_ = b;
  return f;
}

ProductFunction ProductFunction::ratio_square() {
  ProductFunction f;
  f.kind_ = Kind::RatioSquare;
  return f;
}

ProductFunction ProductFunction::custom(expr::Ast ast) {
  for (const auto& v : expr::free_variables(ast)) {
    if (v != "s" && v != "t") {
      throw std::invalid_argument("product function may only use s and t, found '" + v + "'");
    }
  }
  ProductFunction f;
  f.kind_ = Kind::Custom;
  f.ast_ = std::move(ast);
  return f;
}

Jet ProductFunction::operator()(const Jet& s, const Jet& t) const {
  switch (kind_) {
    case Kind::Linear: return a_ * s + b_ * t;
    case Kind::RatioSquare: return (s * s) / t;
    case Kind::Custom: return expr::eval<Jet>(ast_, {{"s", s}, {"t", t}}, s);
  }
  throw std::logic_error("unknown product function kind");
}

double ProductFunction::operator()(double s, double t) const {
  switch (kind_) {
    case Kind::Linear: return a_ * s + b_ * t;
    case Kind::RatioSquare: return prim::divide(s * s, t);
    case Kind::Custom: return expr::eval<double>(ast_, {{"s", s}, {"t", t}});
  }
  throw std::logic_error("unknown product function kind");
}

ProductFunctionPartials ProductFunction::partials(double s, double t) const {
  auto space = JetSpace::get(2, 2);
  const Jet j = (*this)(Jet::variable(space, 0, s), Jet::variable(space, 1, t));
  ProductFunctionPartials p;
  p.f = j.value();
  p.fs = partial(j, {1, 0});
  p.ft = partial(j, {0, 1});
  p.fss = partial(j, {2, 0});
  p.fst = partial(j, {1, 1});
  p.ftt = partial(j, {0, 2});
  return p;
}

std::string ProductFunction::describe() const {
  switch (kind_) {
    case Kind::Linear: {
      char buf[80];
      std::snprintf(buf, sizeof buf, "linear(%.17g,%.17g)", a_, b_);
      return buf;
    }
    case Kind::RatioSquare: return "ratio_square";
    case Kind::Custom: return expr::to_string(ast_);
  }
  return {};
}

}  // namespace finsler
