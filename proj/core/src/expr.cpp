#include "finsler/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <utility>

namespace finsler::expr {

Ast Ast::number(double value) { return Ast(std::make_shared<const Node>(Node{Number{value}})); }

Ast Ast::variable(std::string name) {
  return Ast(std::make_shared<const Node>(Node{Variable{std::move(name)}}));
}

Ast Ast::negate(Ast child) { return Ast(std::make_shared<const Node>(Node{Negate{std::move(child)}})); }

Ast Ast::binary(BinaryOp op, Ast left, Ast right) {
  return Ast(std::make_shared<const Node>(Node{Binary{op, std::move(left), std::move(right)}}));
}

Ast Ast::call(Function fn, std::vector<Ast> args) {
  return Ast(std::make_shared<const Node>(Node{Call{fn, std::move(args)}}));
}

bool operator==(const Ast& a, const Ast& b) {
  if (!a || !b) return !a && !b;
  if (a.node_ == b.node_) return true;
  const auto& va = a.node().value;
  const auto& vb = b.node().value;
  if (va.index() != vb.index()) return false;
  return std::visit(
      [&](const auto& na) -> bool {
        using N = std::decay_t<decltype(na)>;
        const auto& nb = std::get<N>(vb);
        if constexpr (std::is_same_v<N, Number>) {
          return na.value == nb.value;
        } else if constexpr (std::is_same_v<N, Variable>) {
          return na.name == nb.name;
        } else if constexpr (std::is_same_v<N, Negate>) {
          return na.child == nb.child;
        } else if constexpr (std::is_same_v<N, Binary>) {
          return na.op == nb.op && na.left == nb.left && na.right == nb.right;
        } else {
          return na.fn == nb.fn && na.args == nb.args;
        }
      },
      va);
}

ParseError::ParseError(std::size_t byte_offset, std::string expected, std::string found)
    : std::runtime_error("parse error at byte " + std::to_string(byte_offset) + ": expected " +
                         expected + ", found " + found),
      byte_offset_(byte_offset),
      expected_(std::move(expected)),
      found_(std::move(found)) {}

namespace {

struct FunctionEntry {
  std::string_view name;
  Function fn;
  int arity;
};

constexpr std::array<FunctionEntry, 8> kFunctions{{
    {"sqrt", Function::Sqrt, 1},
    {"sin", Function::Sin, 1},
    {"cos", Function::Cos, 1},
    {"tan", Function::Tan, 1},
    {"exp", Function::Exp, 1},
    {"ln", Function::Ln, 1},
    {"log", Function::Ln, 1},
    {"pow", Function::Pow, 2},
}};

constexpr std::string_view kUnicodeMinus = "\xE2\x88\x92";

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Ast parse_all() {
    Ast result = expression();
    skip_space();
    if (pos_ != text_.size()) fail("operator or end of input");
    return result;
  }

 private:
  [[noreturn]] void fail(std::string expected) const {
    throw ParseError(pos_, std::move(expected), describe_here());
  }

  std::string describe_here() const {
    if (pos_ >= text_.size()) return "end of input";
    if (text_.substr(pos_).starts_with(kUnicodeMinus)) return "'\xE2\x88\x92'";
    return "'" + std::string(1, text_[pos_]) + "'";
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  bool accept_minus() {
    skip_space();
    if (accept('-')) return true;
    if (text_.substr(pos_).starts_with(kUnicodeMinus)) {
      pos_ += kUnicodeMinus.size();
      return true;
    }
    return false;
  }

  Ast expression() {
    Ast left = term();
    while (true) {
      if (accept('+')) {
        left = Ast::binary(BinaryOp::Add, std::move(left), term());
      } else if (accept_minus()) {
        left = Ast::binary(BinaryOp::Sub, std::move(left), term());
      } else {
        return left;
      }
    }
  }

  Ast term() {
    Ast left = factor();
    while (true) {
      if (accept('*')) {
        left = Ast::binary(BinaryOp::Mul, std::move(left), factor());
      } else if (accept('/')) {
        left = Ast::binary(BinaryOp::Div, std::move(left), factor());
      } else {
        return left;
      }
    }
  }

  Ast factor() {
    if (accept_minus()) return Ast::negate(factor());
    return power();
  }

  Ast power() {
    Ast base = primary();
    if (accept('^')) return Ast::binary(BinaryOp::Pow, std::move(base), factor());
    return base;
  }

  Ast primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("number, identifier, '(' or '-'");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c))) return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    if (accept('(')) {
      Ast inner = expression();
      if (!accept(')')) fail("')'");
      return inner;
    }
    fail("number, identifier, '(' or '-'");
  }

  Ast number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        fail("exponent digits");
      }
      digits();
    }
    double value = 0.0;
    const auto* first = text_.data() + start;
    const auto* last = text_.data() + pos_;
    const auto result = std::from_chars(first, last, value);
    if (result.ec != std::errc() || result.ptr != last) {
      pos_ = start;
      fail("representable number");
    }
    return Ast::number(value);
  }

  Ast identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    std::string name(text_.substr(start, pos_ - start));
    const std::size_t after_name = pos_;
    skip_space();
    if (pos_ >= text_.size() || text_[pos_] != '(') {
      pos_ = after_name;
      return Ast::variable(std::move(name));
    }
    const FunctionEntry* entry = nullptr;
    for (const auto& f : kFunctions) {
      if (f.name == name) entry = &f;
    }
    if (!entry) {
      pos_ = start;
      throw ParseError(start, "known function name", "'" + name + "'");
    }
    ++pos_;  // '('
    std::vector<Ast> args;
    args.push_back(expression());
    while (accept(',')) args.push_back(expression());
    skip_space();
    if (static_cast<int>(args.size()) != entry->arity) {
      throw ParseError(pos_, std::to_string(entry->arity) + " argument(s) for " + name,
                       std::to_string(args.size()) + " argument(s)");
    }
    if (!accept(')')) fail("')'");
    return Ast::call(entry->fn, std::move(args));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

// Precedence levels used by the printer.
constexpr int kSum = 1;
constexpr int kProduct = 2;
constexpr int kUnary = 3;
constexpr int kPower = 4;
constexpr int kPrimary = 5;

int precedence(const Ast& ast) {
  return std::visit(
      [](const auto& n) -> int {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, Negate>) {
          return kUnary;
        } else if constexpr (std::is_same_v<N, Number>) {
          return std::signbit(n.value) ? kUnary : kPrimary;
        } else if constexpr (std::is_same_v<N, Binary>) {
          switch (n.op) {
            case BinaryOp::Add:
            case BinaryOp::Sub: return kSum;
            case BinaryOp::Mul:
            case BinaryOp::Div: return kProduct;
            case BinaryOp::Pow: return kPower;
          }
          return kPrimary;
        } else {
          return kPrimary;
        }
      },
      ast.node().value);
}

std::string render(const Ast& ast);

std::string render_at_least(const Ast& ast, int min_precedence) {
  std::string s = render(ast);
  if (precedence(ast) < min_precedence) return "(" + s + ")";
  return s;
}

std::string render(const Ast& ast) {
  return std::visit(
      [](const auto& n) -> std::string {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, Number>) {
          char buf[32];
          std::snprintf(buf, sizeof buf, "%.17g", n.value);
          return buf;
        } else if constexpr (std::is_same_v<N, Variable>) {
          return n.name;
        } else if constexpr (std::is_same_v<N, Negate>) {
          return "-" + render_at_least(n.child, kUnary);
        } else if constexpr (std::is_same_v<N, Binary>) {
          switch (n.op) {
            case BinaryOp::Add: return render_at_least(n.left, kSum) + " + " + render_at_least(n.right, kProduct);
            case BinaryOp::Sub: return render_at_least(n.left, kSum) + " - " + render_at_least(n.right, kProduct);
            case BinaryOp::Mul: return render_at_least(n.left, kProduct) + "*" + render_at_least(n.right, kUnary);
            case BinaryOp::Div: return render_at_least(n.left, kProduct) + "/" + render_at_least(n.right, kUnary);
            case BinaryOp::Pow: return render_at_least(n.left, kPrimary) + "^" + render_at_least(n.right, kUnary);
          }
          return {};
        } else {
          std::string s(function_name(n.fn));
          s += "(";
          for (std::size_t i = 0; i < n.args.size(); ++i) {
            if (i) s += ", ";
            s += render(n.args[i]);
          }
          return s + ")";
        }
      },
      ast.node().value);
}

void collect(const Ast& ast, std::set<std::string>& out) {
  std::visit(
      [&](const auto& n) {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, Variable>) {
          out.insert(n.name);
        } else if constexpr (std::is_same_v<N, Negate>) {
          collect(n.child, out);
        } else if constexpr (std::is_same_v<N, Binary>) {
          collect(n.left, out);
          collect(n.right, out);
        } else if constexpr (std::is_same_v<N, Call>) {
          for (const auto& a : n.args) collect(a, out);
        }
      },
      ast.node().value);
}

}  // namespace

Ast parse(std::string_view text) { return Parser(text).parse_all(); }

std::string to_string(const Ast& ast) { return render(ast); }

std::set<std::string> free_variables(const Ast& ast) {
  std::set<std::string> out;
  collect(ast, out);
  return out;
}

std::string_view function_name(Function fn) {
  for (const auto& f : kFunctions) {
    if (f.fn == fn) return f.name;
  }
  return "?";
}

}  // namespace finsler::expr
