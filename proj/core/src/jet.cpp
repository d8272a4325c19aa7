#include "finsler/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

#include "finsler/errors.hpp"

namespace finsler {

// ---------------------------------------------------------------------------
// MultiIndex
// ---------------------------------------------------------------------------

MultiIndex::MultiIndex(std::vector<int> exponents) : exponents_(std::move(exponents)) {
  for (int e : exponents_) {
    if (e < 0) throw std::invalid_argument("multi-index exponents must be non-negative");
  }
}

MultiIndex::MultiIndex(std::initializer_list<int> exponents)
    : MultiIndex(std::vector<int>(exponents)) {}

MultiIndex MultiIndex::zero(int num_vars) {
  return MultiIndex(std::vector<int>(static_cast<std::size_t>(num_vars), 0));
}

MultiIndex MultiIndex::unit(int num_vars, int var) { return zero(num_vars).with_added(var); }

int MultiIndex::degree() const { return std::accumulate(exponents_.begin(), exponents_.end(), 0); }

double MultiIndex::factorial() const {
  double result = 1.0;
  for (int e : exponents_) {
    for (int k = 2; k <= e; ++k) result *= k;
  }
  return result;
}

MultiIndex MultiIndex::operator+(const MultiIndex& other) const {
  if (other.size() != size()) throw std::invalid_argument("multi-index arity mismatch");
  std::vector<int> sum(exponents_);
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += other.exponents_[i];
  return MultiIndex(std::move(sum));
}

MultiIndex MultiIndex::with_added(int var, int count) const {
  if (var < 0 || var >= size()) throw std::invalid_argument("variable out of range");
  std::vector<int> e(exponents_);
  e[static_cast<std::size_t>(var)] += count;
  return MultiIndex(std::move(e));
}

// ---------------------------------------------------------------------------
// JetSpace
// ---------------------------------------------------------------------------

namespace {

// Multi-indices of exactly the given degree, lexicographically descending.
void enumerate_degree(int num_vars, int degree, std::vector<MultiIndex>& out) {
  std::vector<int> e(static_cast<std::size_t>(num_vars), 0);
  auto recurse = [&](auto&& self, int var, int remaining) -> void {
    if (var == num_vars - 1) {
      e[static_cast<std::size_t>(var)] = remaining;
      out.emplace_back(e);
      return;
    }
    for (int k = remaining; k >= 0; --k) {
      e[static_cast<std::size_t>(var)] = k;
      self(self, var + 1, remaining - k);
    }
    e[static_cast<std::size_t>(var)] = 0;
  };
  recurse(recurse, 0, degree);
}

}  // namespace

JetSpace::JetSpace(int num_vars, int order) : num_vars_(num_vars), order_(order) {
  if (num_vars < 1 || num_vars > kMaxJetVars) {
    throw std::invalid_argument("jet variable count must be in [1, " +
                                std::to_string(kMaxJetVars) + "]");
  }
  if (order < 0 || order > kMaxJetOrder) {
    throw std::invalid_argument("jet order must be in [0, " + std::to_string(kMaxJetOrder) + "]");
  }
  for (int d = 0; d <= order; ++d) {
    degree_offsets_.push_back(indices_.size());
    enumerate_degree(num_vars, d, indices_);
  }
  degree_offsets_.push_back(indices_.size());
  degrees_.reserve(indices_.size());
  for (const auto& idx : indices_) degrees_.push_back(idx.degree());

  std::vector<std::pair<std::uint64_t, std::uint32_t>> keyed;
  keyed.reserve(indices_.size());
  for (std::size_t k = 0; k < indices_.size(); ++k) {
    keyed.emplace_back(encode(indices_[k]), static_cast<std::uint32_t>(k));
  }
  std::sort(keyed.begin(), keyed.end());
  for (const auto& [key, pos] : keyed) {
    sorted_keys_.push_back(key);
    key_positions_.push_back(pos);
  }

  // Multiplication table in CSR layout keyed by the output position.
  std::vector<std::vector<Pair>> by_output(indices_.size());
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    const int room = order - degrees_[i];
    for (std::size_t j = 0; j < prefix_size(room); ++j) {
      const std::size_t k = position(indices_[i] + indices_[j]);
      by_output[k].push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
    }
  }
  product_offsets_.reserve(indices_.size() + 1);
  product_offsets_.push_back(0);
  for (auto& pairs : by_output) {
    product_pairs_.insert(product_pairs_.end(), pairs.begin(), pairs.end());
    product_offsets_.push_back(static_cast<std::uint32_t>(product_pairs_.size()));
  }

  if (order > 0) {
    const std::size_t lower = prefix_size(order - 1);
    shifts_.resize(static_cast<std::size_t>(num_vars));
    for (int v = 0; v < num_vars; ++v) {
      auto& table = shifts_[static_cast<std::size_t>(v)];
      table.reserve(lower);
      for (std::size_t k = 0; k < lower; ++k) {
        table.push_back(static_cast<std::uint32_t>(position(indices_[k].with_added(v))));
      }
    }
  }
}

std::shared_ptr<const JetSpace> JetSpace::get(int num_vars, int order) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const JetSpace>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{num_vars, order}];
  if (!slot) slot = std::make_shared<const JetSpace>(num_vars, order);
  return slot;
}

std::uint64_t JetSpace::encode(const MultiIndex& index) const {
  std::uint64_t key = 0;
  for (int e : index.exponents()) key = key * static_cast<std::uint64_t>(kMaxJetOrder + 1) +
                                        static_cast<std::uint64_t>(e);
  return key;
}

std::size_t JetSpace::position(const MultiIndex& index) const {
  if (index.size() != num_vars_) throw std::invalid_argument("multi-index arity mismatch");
  if (index.degree() > order_) {
    throw OrderExceeded("derivative of degree " + std::to_string(index.degree()) +
                        " requested from a jet of order " + std::to_string(order_));
  }
  const std::uint64_t key = encode(index);
  const auto it = std::lower_bound(sorted_keys_.begin(), sorted_keys_.end(), key);
  return key_positions_[static_cast<std::size_t>(it - sorted_keys_.begin())];
}

std::size_t JetSpace::prefix_size(int d) const {
  if (d < 0) return 0;
  return degree_offsets_[static_cast<std::size_t>(std::min(d, order_) + 1)];
}

std::span<const JetSpace::Pair> JetSpace::products(std::size_t k) const {
  return {product_pairs_.data() + product_offsets_[k],
          product_pairs_.data() + product_offsets_[k + 1]};
}

std::span<const std::uint32_t> JetSpace::shift(int var) const {
  if (order_ == 0) throw OrderExceeded("cannot differentiate an order-0 jet");
  return shifts_[static_cast<std::size_t>(var)];
}

// ---------------------------------------------------------------------------
// Jet
// ---------------------------------------------------------------------------

namespace {

const JetSpacePtr& common_space(const Jet& a, const Jet& b) {
  if (a.num_vars() != b.num_vars()) throw std::invalid_argument("jet variable count mismatch");
  return a.order() <= b.order() ? a.space_ptr() : b.space_ptr();
}

// Sum_k d[k] * h^k by Horner's rule, where h = a - a(0) is nilpotent.
Jet compose(const Jet& a, const std::vector<double>& d) {
  const int q = a.order();
  Jet result(a.space_ptr(), d[static_cast<std::size_t>(q)]);
  if (q == 0) return result;
  Jet h = a;
  h -= a.value();
  for (int k = q - 1; k >= 0; --k) {
    result = result * h;
    result += d[static_cast<std::size_t>(k)];
  }
  return result;
}

// Taylor coefficients of x^r about x0 > 0: C(r, k) x0^(r - k).
std::vector<double> power_series(double x0, double r, double head, int q) {
  std::vector<double> d(static_cast<std::size_t>(q) + 1);
  d[0] = head;
  for (int k = 1; k <= q; ++k) {
    d[static_cast<std::size_t>(k)] = d[static_cast<std::size_t>(k - 1)] * (r - (k - 1)) / (k * x0);
  }
  return d;
}

double inverse_factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return 1.0 / f;
}

bool integral_exponent(double e, int& out) {
  if (!std::isfinite(e) || std::floor(e) != e || std::abs(e) > 1024.0) return false;
  out = static_cast<int>(e);
  return true;
}

}  // namespace

Jet::Jet(JetSpacePtr space, double value)
    : space_(std::move(space)), coeffs_(space_->size(), 0.0) {
  coeffs_[0] = value;
}

Jet::Jet(JetSpacePtr space, std::vector<double> coeffs)
    : space_(std::move(space)), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != space_->size()) throw std::invalid_argument("jet coefficient count mismatch");
}

Jet Jet::variable(JetSpacePtr space, int var, double value) {
  if (var < 0 || var >= space->num_vars()) throw std::invalid_argument("variable out of range");
  Jet x(space, value);
  if (space->order() > 0) x.coeffs_[static_cast<std::size_t>(var) + 1] = 1.0;
  return x;
}

double Jet::coeff(const MultiIndex& index) const { return coeffs_[space_->position(index)]; }

bool Jet::is_constant() const {
  return std::all_of(coeffs_.begin() + 1, coeffs_.end(), [](double c) { return c == 0.0; });
}

Jet Jet::truncated(int order) const {
  if (order >= this->order()) return *this;
  auto space = JetSpace::get(num_vars(), order);
  std::vector<double> c(coeffs_.begin(),
                        coeffs_.begin() + static_cast<std::ptrdiff_t>(space->size()));
  return Jet(std::move(space), std::move(c));
}

Jet Jet::derivative(int var) const {
  if (var < 0 || var >= num_vars()) throw std::invalid_argument("variable out of range");
  const auto shift = space_->shift(var);
  auto lower = JetSpace::get(num_vars(), order() - 1);
  std::vector<double> c(lower->size());
  for (std::size_t k = 0; k < c.size(); ++k) {
    const std::uint32_t src = shift[k];
    c[k] = coeffs_[src] * space_->index(src)[var];
  }
  return Jet(std::move(lower), std::move(c));
}

Jet Jet::operator-() const {
  Jet r(*this);
  for (double& c : r.coeffs_) c = -c;
  return r;
}

Jet& Jet::operator+=(const Jet& other) {
  if (other.order() < order()) *this = truncated(other.order());
  if (num_vars() != other.num_vars()) throw std::invalid_argument("jet variable count mismatch");
  for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] += other.coeffs_[k];
  return *this;
}

Jet& Jet::operator-=(const Jet& other) {
  if (other.order() < order()) *this = truncated(other.order());
  if (num_vars() != other.num_vars()) throw std::invalid_argument("jet variable count mismatch");
  for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] -= other.coeffs_[k];
  return *this;
}

Jet& Jet::operator+=(double value) {
  coeffs_[0] += value;
  return *this;
}

Jet& Jet::operator-=(double value) {
  coeffs_[0] -= value;
  return *this;
}

Jet& Jet::operator*=(double value) {
  for (double& c : coeffs_) c *= value;
  return *this;
}

Jet operator+(const Jet& a, const Jet& b) {
  if (a.order() <= b.order()) {
    Jet r(a);
    r += b;
    return r;
  }
  Jet r(b);
  r += a;
  return r;
}

Jet operator-(const Jet& a, const Jet& b) {
  Jet r = a.order() <= b.order() ? a : a.truncated(b.order());
  r -= b;
  return r;
}

Jet operator*(const Jet& a, const Jet& b) {
  const JetSpacePtr& space = common_space(a, b);
  std::vector<double> c(space->size());
  const double* pa = a.coeffs_.data();
  const double* pb = b.coeffs_.data();
  for (std::size_t k = 0; k < c.size(); ++k) {
    const auto pairs = space->products(k);
    double s = pa[pairs[0].left] * pb[pairs[0].right];
    for (std::size_t p = 1; p < pairs.size(); ++p) s += pa[pairs[p].left] * pb[pairs[p].right];
    c[k] = s;
  }
  return Jet(space, std::move(c));
}

Jet operator/(const Jet& a, const Jet& b) {
  const JetSpacePtr& space = common_space(a, b);
  const double b0 = b.coeffs_[0];
  if (b0 == 0.0) throw DomainError("division by a jet with zero constant term");
  // Solve q * b = a coefficient by coefficient in graded order.
  std::vector<double> q(space->size());
  for (std::size_t k = 0; k < q.size(); ++k) {
    double s = a.coeffs_[k];
    for (const auto& [i, j] : space->products(k)) {
      if (j != 0) s -= q[i] * b.coeffs_[j];
    }
    q[k] = s / b0;
  }
  return Jet(space, std::move(q));
}

Jet operator+(const Jet& a, double b) {
  Jet r(a);
  r += b;
  return r;
}
Jet operator+(double a, const Jet& b) {
  Jet r(b);
  r.operator+=(a);
  return r;
}
Jet operator-(const Jet& a, double b) {
  Jet r(a);
  r -= b;
  return r;
}
Jet operator-(double a, const Jet& b) {
  Jet r = -b;
  r += a;
  return r;
}
Jet operator*(const Jet& a, double b) {
  Jet r(a);
  r *= b;
  return r;
}
Jet operator*(double a, const Jet& b) {
  Jet r(b);
  r *= a;
  return r;
}
Jet operator/(const Jet& a, double b) { return a / Jet(a.space_ptr(), b); }
Jet operator/(double a, const Jet& b) { return Jet(b.space_ptr(), a) / b; }

Jet sqrt(const Jet& a) {
  const double x0 = a.value();
  if (x0 < 0.0) throw DomainError("sqrt of a negative value");
  if (x0 == 0.0) {
    if (a.order() == 0) return Jet(a.space_ptr(), 0.0);
    throw DomainError("sqrt is not differentiable at 0");
  }
  return compose(a, power_series(x0, 0.5, std::sqrt(x0), a.order()));
}

Jet exp(const Jet& a) {
  const double e = std::exp(a.value());
  std::vector<double> d(static_cast<std::size_t>(a.order()) + 1);
  for (int k = 0; k <= a.order(); ++k) d[static_cast<std::size_t>(k)] = k == 0 ? e : e * inverse_factorial(k);
  return compose(a, d);
}

Jet log(const Jet& a) {
  const double x0 = a.value();
  if (x0 <= 0.0) throw DomainError("log of a non-positive value");
  std::vector<double> d(static_cast<std::size_t>(a.order()) + 1);
  d[0] = std::log(x0);
  double p = 1.0;
  for (int k = 1; k <= a.order(); ++k) {
    p /= x0;
    d[static_cast<std::size_t>(k)] = (k % 2 == 1 ? p : -p) / k;
  }
  return compose(a, d);
}

Jet sin(const Jet& a) {
  const double s = std::sin(a.value());
  const double c = std::cos(a.value());
  const double cycle[4] = {s, c, -s, -c};
  std::vector<double> d(static_cast<std::size_t>(a.order()) + 1);
  for (int k = 0; k <= a.order(); ++k) {
    d[static_cast<std::size_t>(k)] = k == 0 ? s : cycle[k % 4] * inverse_factorial(k);
  }
  return compose(a, d);
}

Jet cos(const Jet& a) {
  const double s = std::sin(a.value());
  const double c = std::cos(a.value());
  const double cycle[4] = {c, -s, -c, s};
  std::vector<double> d(static_cast<std::size_t>(a.order()) + 1);
  for (int k = 0; k <= a.order(); ++k) {
    d[static_cast<std::size_t>(k)] = k == 0 ? c : cycle[k % 4] * inverse_factorial(k);
  }
  return compose(a, d);
}

Jet tan(const Jet& a) {
  // d^k/dx^k tan = P_k(tan x) with P_0(t) = t and P_{k+1} = (1 + t^2) P_k'.
  const double t = std::tan(a.value());
  std::vector<double> poly{0.0, 1.0};
  std::vector<double> d(static_cast<std::size_t>(a.order()) + 1);
  d[0] = t;
  for (int k = 1; k <= a.order(); ++k) {
    std::vector<double> dp(poly.size() > 1 ? poly.size() - 1 : 1, 0.0);
    for (std::size_t i = 1; i < poly.size(); ++i) dp[i - 1] = poly[i] * static_cast<double>(i);
    std::vector<double> next(dp.size() + 2, 0.0);
    for (std::size_t i = 0; i < dp.size(); ++i) {
      next[i] += dp[i];
      next[i + 2] += dp[i];
    }
    poly = std::move(next);
    double v = 0.0;
    for (std::size_t i = poly.size(); i-- > 0;) v = v * t + poly[i];
    d[static_cast<std::size_t>(k)] = v * inverse_factorial(k);
  }
  return compose(a, d);
}

Jet pow(const Jet& base, int exponent) {
  if (exponent == 0) return Jet(base.space_ptr(), 1.0);
  const int n = exponent < 0 ? -exponent : exponent;
  Jet r = base;
  for (int k = 1; k < n; ++k) r = r * base;
  if (exponent < 0) return Jet(base.space_ptr(), 1.0) / r;
  return r;
}

Jet pow(const Jet& base, double exponent) {
  int n = 0;
  if (integral_exponent(exponent, n)) return pow(base, n);
  if (base.value() <= 0.0) throw DomainError("non-integer power of a non-positive base");
  return exp(log(base) * exponent);
}

Jet pow(const Jet& base, const Jet& exponent) {
  int n = 0;
  if (exponent.is_constant() && integral_exponent(exponent.value(), n)) return pow(base, n);
  if (base.value() <= 0.0) throw DomainError("non-integer power of a non-positive base");
  return exp(exponent * log(base));
}

double partial(const Jet& jet, const MultiIndex& index) {
  return jet.coeff(index) * index.factorial();
}

// ---------------------------------------------------------------------------
// Real primitives
// ---------------------------------------------------------------------------

namespace prim {

double divide(double a, double b) {
  if (b == 0.0) throw DomainError("division by zero");
  return a / b;
}

double sqrt(double a) {
  if (a < 0.0) throw DomainError("sqrt of a negative value");
  return std::sqrt(a);
}

double exp(double a) { return std::exp(a); }

double log(double a) {
  if (a <= 0.0) throw DomainError("log of a non-positive value");
  return std::log(a);
}

double sin(double a) { return std::sin(a); }
double cos(double a) { return std::cos(a); }
double tan(double a) { return std::tan(a); }

double pow(double base, double exponent) {
  int n = 0;
  if (integral_exponent(exponent, n)) {
    if (n == 0) return 1.0;
    const int m = n < 0 ? -n : n;
    double r = base;
    for (int k = 1; k < m; ++k) r = r * base;
    return n < 0 ? divide(1.0, r) : r;
  }
  if (base <= 0.0) throw DomainError("non-integer power of a non-positive base");
  return std::exp(exponent * std::log(base));
}

Jet divide(const Jet& a, const Jet& b) { return a / b; }

Jet pow(const Jet& base, const Jet& exponent) { return finsler::pow(base, exponent); }

}  // namespace prim

}  // namespace finsler
