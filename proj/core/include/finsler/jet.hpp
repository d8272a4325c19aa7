#pragma once

// Truncated multivariate Taylor arithmetic ("jets").
//
// A jet of order q in n variables stores the Taylor coefficients
//   c_alpha = (d^alpha f)(p) / alpha!
// of a scalar field f about a point p, for every multi-index alpha with
// |alpha| <= q. Arithmetic on jets is exact up to truncation, so the raw
// partial derivative of any composition of supported primitives is
// recovered as alpha! * c_alpha to machine precision.
//
// Coefficients are stored densely in graded order: every multi-index of
// degree d precedes every multi-index of degree d + 1, and the ordering
// inside a degree does not depend on the truncation order. The index set of
// a lower-order space is therefore a prefix of a higher-order one, which
// makes truncation a copy of a prefix.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <span>
#include <vector>

namespace finsler {

inline constexpr int kMaxJetOrder = 6;
inline constexpr int kMaxJetVars = 12;

class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> exponents);
  MultiIndex(std::initializer_list<int> exponents);

  /// All-zero index over num_vars variables.
  static MultiIndex zero(int num_vars);
  /// e_var, the index of a first partial.
  static MultiIndex unit(int num_vars, int var);

  int size() const { return static_cast<int>(exponents_.size()); }
  int degree() const;
  int operator[](int var) const { return exponents_[static_cast<std::size_t>(var)]; }
  const std::vector<int>& exponents() const { return exponents_; }

  /// alpha! = prod alpha_i!
  double factorial() const;

  MultiIndex operator+(const MultiIndex& other) const;
  MultiIndex with_added(int var, int count = 1) const;

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
  friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;

 private:
  std::vector<int> exponents_;
};

/// Enumeration of all multi-indices of degree <= order in num_vars variables
/// together with the precomputed tables jet arithmetic needs. Spaces are
/// interned: get() returns the same instance for the same (vars, order).
class JetSpace {
 public:
  struct Pair {
    std::uint32_t left;
    std::uint32_t right;
  };

  static std::shared_ptr<const JetSpace> get(int num_vars, int order);

  int num_vars() const { return num_vars_; }
  int order() const { return order_; }
  std::size_t size() const { return indices_.size(); }

  const MultiIndex& index(std::size_t position) const { return indices_[position]; }
  int degree(std::size_t position) const { return degrees_[position]; }

  /// Position of a multi-index; throws OrderExceeded if its degree exceeds
  /// the order, std::invalid_argument on an arity mismatch.
  std::size_t position(const MultiIndex& index) const;

  /// Number of multi-indices of degree <= d (prefix length of order d).
  std::size_t prefix_size(int d) const;

  /// Pairs (i, j) with index(i) + index(j) == index(k).
  std::span<const Pair> products(std::size_t k) const;

  /// For every position k of the order-1 prefix: position of index(k) + e_var.
  std::span<const std::uint32_t> shift(int var) const;

  JetSpace(int num_vars, int order);

 private:
  std::uint64_t encode(const MultiIndex& index) const;

  int num_vars_;
  int order_;
  std::vector<MultiIndex> indices_;
  std::vector<int> degrees_;
  std::vector<std::size_t> degree_offsets_;
  std::vector<std::uint64_t> sorted_keys_;
  std::vector<std::uint32_t> key_positions_;
  std::vector<std::uint32_t> product_offsets_;
  std::vector<Pair> product_pairs_;
  std::vector<std::vector<std::uint32_t>> shifts_;
};

using JetSpacePtr = std::shared_ptr<const JetSpace>;

class Jet {
 public:
  /// Constant jet.
  Jet(JetSpacePtr space, double value);
  Jet(JetSpacePtr space, std::vector<double> coeffs);

  /// The coordinate function x_var expanded about x_var = value.
  static Jet variable(JetSpacePtr space, int var, double value);

  const JetSpace& space() const { return *space_; }
  const JetSpacePtr& space_ptr() const { return space_; }
  int order() const { return space_->order(); }
  int num_vars() const { return space_->num_vars(); }

  double value() const { return coeffs_[0]; }
  std::span<const double> coeffs() const { return coeffs_; }
  double coeff(const MultiIndex& index) const;

  /// True when every coefficient past the constant term is zero.
  bool is_constant() const;

  Jet truncated(int order) const;

  /// d/dx_var, one order lower. Throws OrderExceeded on an order-0 jet.
  Jet derivative(int var) const;

  Jet operator-() const;
  Jet& operator+=(const Jet& other);
  Jet& operator-=(const Jet& other);
  Jet& operator+=(double value);
  Jet& operator-=(double value);
  Jet& operator*=(double value);

  friend Jet operator+(const Jet& a, const Jet& b);
  friend Jet operator-(const Jet& a, const Jet& b);
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);

 private:
  JetSpacePtr space_;
  std::vector<double> coeffs_;
};

Jet operator+(const Jet& a, double b);
Jet operator+(double a, const Jet& b);
Jet operator-(const Jet& a, double b);
Jet operator-(double a, const Jet& b);
Jet operator*(const Jet& a, double b);
Jet operator*(double a, const Jet& b);
Jet operator/(const Jet& a, double b);
Jet operator/(double a, const Jet& b);

Jet sqrt(const Jet& a);
Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet tan(const Jet& a);
/// Repeated multiplication; negative exponents invert the positive power.
Jet pow(const Jet& base, int exponent);
/// exp(exponent * log(base)); requires a positive base.
Jet pow(const Jet& base, double exponent);
Jet pow(const Jet& base, const Jet& exponent);

/// Raw partial derivative alpha! * c_alpha.
double partial(const Jet& jet, const MultiIndex& index);

// Real-valued counterparts of the jet primitives with identical domain rules
// and identical operation order, so that evaluating over doubles and over
// order-0 jets agrees bit for bit.
namespace prim {

double divide(double a, double b);
double sqrt(double a);
double exp(double a);
double log(double a);
double sin(double a);
double cos(double a);
double tan(double a);
double pow(double base, double exponent);

Jet divide(const Jet& a, const Jet& b);
using finsler::cos;
using finsler::exp;
using finsler::log;
using finsler::sin;
using finsler::sqrt;
using finsler::tan;
Jet pow(const Jet& base, const Jet& exponent);

}  // namespace prim

}  // namespace finsler
