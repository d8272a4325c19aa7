#pragma once

// Random analytic compositions for cross-checking jets against finite
// differences. Every generated expression is defined on [-1, 1]^n.

#include <string>
#include <vector>

#include "finsler/expr.hpp"
#include "finsler/sampling.hpp"
#include "finsler/scalar_field.hpp"

namespace random_fields {

using namespace finsler;

inline std::string constant(Sampler& rng) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", rng.uniform(0.5, 2.0));
  return buf;
}

inline std::string exponent(Sampler& rng) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", rng.uniform(0.3, 0.9));
  return buf;
}

inline std::string generate(Sampler& rng, int vars, int depth) {
  const auto pick = [&](int n) { return static_cast<int>(rng.uniform() * n); };
  if (depth == 0 || rng.uniform() < 0.2) {
    if (rng.uniform() < 0.8) return "x" + std::to_string(1 + pick(vars));
    return constant(rng);
  }
  const auto a = [&] { return generate(rng, vars, depth - 1); };
  switch (pick(11)) {
    case 0: return "(" + a() + " + " + a() + ")";
    case 1: return "(" + a() + " - " + a() + ")";
    case 2: return "(" + a() + ")*(" + a() + ")";
    case 3: return "sin(" + a() + ")";
    case 4: return "cos(" + a() + ")";
    case 5: return "exp(0.5*sin(" + a() + "))";
    case 6: return "sqrt(1 + (" + a() + ")^2)";
    case 7: return "ln(2 + sin(" + a() + "))";
    case 8: return "(" + a() + ")/(2.5 + cos(" + a() + "))";
    case 9: return "tan(0.4*sin(" + a() + "))";
    default: return "pow(1 + 0.5*(" + a() + ")^2, " + exponent(rng) + ")";
  }
}

/// Field over x1..xn backed by an expression.
inline ScalarField field(const expr::Ast& ast, int vars) {
  return ScalarField(vars, [ast, vars](std::span<const Jet> args) {
    expr::Env<Jet> env;
    for (int i = 0; i < vars; ++i) env.emplace("x" + std::to_string(i + 1), args[static_cast<std::size_t>(i)]);
    return expr::eval(ast, env, args[0]);
  });
}

/// All multi-indices with 1 <= degree <= max_degree.
inline std::vector<MultiIndex> indices(int vars, int max_degree) {
  std::vector<MultiIndex> out;
  const auto space = JetSpace::get(vars, max_degree);
  for (std::size_t k = 1; k < space->size(); ++k) out.push_back(space->index(k));
  return out;
}

}  // namespace random_fields
