#pragma once

// Scalar expression language for metric coefficients and product functions.
//
//   expr    := term (('+' | '-') term)*
//   term    := factor (('*' | '/') factor)*
//   factor  := '-' factor | power
//   power   := primary ('^' factor)?
//   primary := number | ident | ident '(' expr {',' expr} ')' | '(' expr ')'
//
// '^' is right-associative and binds tighter than unary minus, so -2^2 is -4
// and 2^-1 is 0.5. Whitespace is insignificant. U+2212 is accepted as '-'.

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "finsler/jet.hpp"

namespace finsler::expr {

enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class Function { Sqrt, Sin, Cos, Tan, Exp, Ln, Pow };

struct Node;

/// Immutable, shareable expression tree.
class Ast {
 public:
  Ast() = default;
  explicit Ast(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  static Ast number(double value);
  static Ast variable(std::string name);
  static Ast negate(Ast child);
  static Ast binary(BinaryOp op, Ast left, Ast right);
  static Ast call(Function fn, std::vector<Ast> args);

  const Node& node() const { return *node_; }
  explicit operator bool() const { return static_cast<bool>(node_); }

  /// Structural equality.
  friend bool operator==(const Ast& a, const Ast& b);

 private:
  std::shared_ptr<const Node> node_;
};

struct Number {
  double value;
};
struct Variable {
  std::string name;
};
struct Negate {
  Ast child;
};
struct Binary {
  BinaryOp op;
  Ast left;
  Ast right;
};
struct Call {
  Function fn;
  std::vector<Ast> args;
};

struct Node {
  std::variant<Number, Variable, Negate, Binary, Call> value;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t byte_offset, std::string expected, std::string found);

  std::size_t byte_offset() const { return byte_offset_; }
  const std::string& expected() const { return expected_; }
  const std::string& found() const { return found_; }

 private:
  std::size_t byte_offset_;
  std::string expected_;
  std::string found_;
};

Ast parse(std::string_view text);

/// Minimal-parenthesis rendering; numbers use 17 significant digits, so the
/// output reparses to a structurally identical tree.
std::string to_string(const Ast& ast);

std::set<std::string> free_variables(const Ast& ast);

std::string_view function_name(Function fn);

template <typename T>
using Env = std::map<std::string, T, std::less<>>;

inline double constant_like(double, double c) { return c; }
inline Jet constant_like(const Jet& like, double c) { return Jet(like.space_ptr(), c); }

namespace detail {

// Intermediate value: literal constants stay scalar so that jet arithmetic
// with them costs O(size) instead of a full jet product.
template <typename T>
struct Value {
  std::optional<T> v;
  double c = 0.0;
};

template <typename T>
Value<T> scalar(double c) {
  return {std::nullopt, c};
}

template <typename T>
T materialize(const Value<T>& x, const T& like) {
  return x.v ? *x.v : constant_like(like, x.c);
}

template <typename T>
Value<T> apply_binary(BinaryOp op, const Value<T>& a, const Value<T>& b) {
  if (!a.v && !b.v) {
    switch (op) {
      case BinaryOp::Add: return scalar<T>(a.c + b.c);
      case BinaryOp::Sub: return scalar<T>(a.c - b.c);
      case BinaryOp::Mul: return scalar<T>(a.c * b.c);
      case BinaryOp::Div: return scalar<T>(prim::divide(a.c, b.c));
      case BinaryOp::Pow: return scalar<T>(prim::pow(a.c, b.c));
    }
  }
  if (a.v && !b.v) {
    switch (op) {
      case BinaryOp::Add: return {*a.v + b.c, 0.0};
      case BinaryOp::Sub: return {*a.v - b.c, 0.0};
      case BinaryOp::Mul: return {*a.v * b.c, 0.0};
      case BinaryOp::Div: return {prim::divide(*a.v, constant_like(*a.v, b.c)), 0.0};
      case BinaryOp::Pow: return {prim::pow(*a.v, constant_like(*a.v, b.c)), 0.0};
    }
  }
  if (!a.v && b.v) {
    switch (op) {
      case BinaryOp::Add: return {a.c + *b.v, 0.0};
      case BinaryOp::Sub: return {a.c - *b.v, 0.0};
      case BinaryOp::Mul: return {a.c * *b.v, 0.0};
      case BinaryOp::Div: return {prim::divide(constant_like(*b.v, a.c), *b.v), 0.0};
      case BinaryOp::Pow: return {prim::pow(constant_like(*b.v, a.c), *b.v), 0.0};
    }
  }
  switch (op) {
    case BinaryOp::Add: return {*a.v + *b.v, 0.0};
    case BinaryOp::Sub: return {*a.v - *b.v, 0.0};
    case BinaryOp::Mul: return {*a.v * *b.v, 0.0};
    case BinaryOp::Div: return {prim::divide(*a.v, *b.v), 0.0};
    case BinaryOp::Pow: return {prim::pow(*a.v, *b.v), 0.0};
  }
  throw std::logic_error("unreachable");
}

template <typename U>
U apply_unary(Function fn, const U& x) {
  switch (fn) {
    case Function::Sqrt: return prim::sqrt(x);
    case Function::Sin: return prim::sin(x);
    case Function::Cos: return prim::cos(x);
    case Function::Tan: return prim::tan(x);
    case Function::Exp: return prim::exp(x);
    case Function::Ln: return prim::log(x);
    case Function::Pow: break;
  }
  throw std::logic_error("not a unary function");
}

template <typename T>
Value<T> evaluate(const Ast& ast, const Env<T>& env) {
  return std::visit(
      [&](const auto& n) -> Value<T> {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, Number>) {
          return scalar<T>(n.value);
        } else if constexpr (std::is_same_v<N, Variable>) {
          auto it = env.find(n.name);
          if (it == env.end()) throw std::invalid_argument("unbound variable '" + n.name + "'");
          return {it->second, 0.0};
        } else if constexpr (std::is_same_v<N, Negate>) {
          auto x = evaluate(n.child, env);
          if (!x.v) return scalar<T>(-x.c);
          return {-*x.v, 0.0};
        } else if constexpr (std::is_same_v<N, Binary>) {
          return apply_binary(n.op, evaluate(n.left, env), evaluate(n.right, env));
        } else {
          if (n.fn == Function::Pow) {
            return apply_binary(BinaryOp::Pow, evaluate(n.args[0], env), evaluate(n.args[1], env));
          }
          auto x = evaluate(n.args[0], env);
          if (!x.v) return scalar<T>(apply_unary(n.fn, x.c));
          return {apply_unary(n.fn, *x.v), 0.0};
        }
      },
      ast.node().value);
}

}  // namespace detail

/// Evaluates over any numeric type supporting the primitive table (double or
/// Jet). `like` supplies the representation for a constant-valued result.
template <typename T>
T eval(const Ast& ast, const Env<T>& env, const T& like) {
  return detail::materialize(detail::evaluate(ast, env), like);
}

template <typename T>
T eval(const Ast& ast, const Env<T>& env) {
  auto value = detail::evaluate(ast, env);
  if (value.v) return *value.v;
  if constexpr (std::is_same_v<T, double>) {
    return value.c;
  } else {
    if (env.empty()) throw std::invalid_argument("cannot lift a constant without a bound jet");
    return constant_like(env.begin()->second, value.c);
  }
}

}  // namespace finsler::expr
