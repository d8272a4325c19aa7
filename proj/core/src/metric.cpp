#include "finsler/metric.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "finsler/errors.hpp"
#include "finsler/product.hpp"

namespace finsler {

// ---------------------------------------------------------------------------
// Specs
// ---------------------------------------------------------------------------

Box Box::cube(int dim, double lo, double hi) {
  return Box{std::vector<std::pair<double, double>>(static_cast<std::size_t>(dim), {lo, hi})};
}

bool Box::contains(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < bounds[i].first || x[i] > bounds[i].second) return false;
  }
  return true;
}

SymmetricExprMatrix::SymmetricExprMatrix(int dim, std::vector<expr::Ast> upper)
    : dim_(dim), upper_(std::move(upper)) {
  if (dim < 1) throw std::invalid_argument("matrix dimension must be positive");
  if (static_cast<int>(upper_.size()) != dim * (dim + 1) / 2) {
    throw std::invalid_argument("upper triangle must hold n(n+1)/2 entries");
  }
}

SymmetricExprMatrix SymmetricExprMatrix::identity(int dim) {
  std::vector<expr::Ast> upper;
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) upper.push_back(expr::Ast::number(i == j ? 1.0 : 0.0));
  }
  return SymmetricExprMatrix(dim, std::move(upper));
}

const expr::Ast& SymmetricExprMatrix::at(int i, int j) const {
  if (i > j) std::swap(i, j);
  // Row i of the upper triangle starts after rows 0..i-1 of lengths n, n-1, ...
  const int offset = i * dim_ - i * (i - 1) / 2;
  return upper_[static_cast<std::size_t>(offset + (j - i))];
}

int MetricSpec::dim() const {
  return std::visit(
      [](const auto& s) -> int {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, EuclideanSpec>) {
          return s.dim;
        } else if constexpr (std::is_same_v<S, ProductSpec>) {
          return s.left->dim() + s.right->dim();
        } else {
          return s.a.dim();
        }
      },
      variant);
}

// ---------------------------------------------------------------------------
// Metric
// ---------------------------------------------------------------------------

struct Metric::Data {
  int dim = 0;
  MetricKind kind = MetricKind::Euclidean;
  ScalarField f2;
  Box box;
  double cone = 0.05;
  SymmetricExprMatrix a;
  std::vector<expr::Ast> b;
  std::optional<ProductParts> product;
};

int Metric::dim() const { return data_->dim; }
MetricKind Metric::kind() const { return data_->kind; }
const ScalarField& Metric::f_squared_field() const { return data_->f2; }
const Box& Metric::x_box() const { return data_->box; }
double Metric::cone_half_angle() const { return data_->cone; }
const ProductParts* Metric::product() const {
  return data_->product ? &*data_->product : nullptr;
}

namespace {

std::string coordinate_name(char prefix, int i) { return prefix + std::to_string(i + 1); }

template <typename T>
expr::Env<T> base_env(std::span<const T> x) {
  expr::Env<T> env;
  for (std::size_t i = 0; i < x.size(); ++i) env.emplace(coordinate_name('x', static_cast<int>(i)), x[i]);
  return env;
}

// c * v for a coefficient that may be a literal constant.
Jet scaled(const expr::detail::Value<Jet>& c, const Jet& v) {
  return c.v ? *c.v * v : c.c * v;
}

bool is_zero(const expr::detail::Value<Jet>& c) { return !c.v && c.c == 0.0; }

// a_ij(x) y^i y^j over jets.
Jet alpha_squared(const SymmetricExprMatrix& a, const expr::Env<Jet>& env, std::span<const Jet> y) {
  const int n = a.dim();
  Jet sum(y[0].space_ptr(), 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const auto c = expr::detail::evaluate(a.at(i, j), env);
      if (is_zero(c)) continue;
      Jet term = scaled(c, y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)]);
      if (i != j) term *= 2.0;
      sum += term;
    }
  }
  return sum;
}

Jet beta(const std::vector<expr::Ast>& b, const expr::Env<Jet>& env, std::span<const Jet> y) {
  Jet sum(y[0].space_ptr(), 0.0);
  for (std::size_t i = 0; i < b.size(); ++i) {
    const auto c = expr::detail::evaluate(b[i], env);
    if (is_zero(c)) continue;
    sum += scaled(c, y[i]);
  }
  return sum;
}

Matrix numeric_a(const SymmetricExprMatrix& a, std::span<const double> x) {
  const auto env = base_env<double>(x);
  Matrix m(a.dim(), a.dim());
  for (int i = 0; i < a.dim(); ++i) {
    for (int j = i; j < a.dim(); ++j) m(i, j) = m(j, i) = expr::eval(a.at(i, j), env);
  }
  return m;
}

Vector numeric_b(const std::vector<expr::Ast>& b, std::span<const double> x) {
  const auto env = base_env<double>(x);
  Vector v(static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < b.size(); ++i) v(static_cast<Eigen::Index>(i)) = expr::eval(b[i], env);
  return v;
}

std::shared_ptr<Metric::Data> base_data(int dim, MetricKind kind, const MetricSpec& spec) {
  auto d = std::make_shared<Metric::Data>();
  d->dim = dim;
  d->kind = kind;
  d->box = spec.x_box.value_or(Box::cube(dim, -0.5, 0.5));
  d->cone = spec.cone_half_angle;
  if (d->box.dim() != dim) throw std::invalid_argument("sampling box dimension does not match metric");
  return d;
}

}  // namespace

std::optional<double> Metric::beta_norm(std::span<const double> x) const {
  if (data_->kind != MetricKind::Randers && data_->kind != MetricKind::Square) return std::nullopt;
  const Matrix a = numeric_a(data_->a, x);
  const Vector b = numeric_b(data_->b, x);
  const double q = b.dot(invert(a) * b);
  return std::sqrt(std::max(q, 0.0));
}

std::optional<std::string> Metric::exclusion(std::span<const double> x,
                                             std::span<const double> y) const {
  double ynorm = 0.0;
  for (double v : y) ynorm += v * v;
  ynorm = std::sqrt(ynorm);
  if (ynorm == 0.0) return "zero fiber vector";

  if (const auto* p = product()) {
    const int m = p->left->dim();
    const auto xl = x.first(static_cast<std::size_t>(m));
    const auto yl = y.first(static_cast<std::size_t>(m));
    const auto xr = x.subspan(static_cast<std::size_t>(m));
    const auto yr = y.subspan(static_cast<std::size_t>(m));
    auto norm = [](std::span<const double> v) {
      double s = 0.0;
      for (double c : v) s += c * c;
      return std::sqrt(s);
    };
    constexpr double kSlit = 1e-6;
    if (norm(yl) <= kSlit * ynorm) return "left fiber component vanishes";
    if (norm(yr) <= kSlit * ynorm) return "right fiber component vanishes";
    if (auto r = p->left->exclusion(xl, yl)) return "left: " + *r;
    if (auto r = p->right->exclusion(xr, yr)) return "right: " + *r;
    return std::nullopt;
  }

  if (data_->kind == MetricKind::Randers || data_->kind == MetricKind::Square) {
    const Matrix a = numeric_a(data_->a, x);
    const Vector b = numeric_b(data_->b, x);
    const Eigen::Map<const Vector> v(y.data(), static_cast<Eigen::Index>(y.size()));
    const double alpha2 = v.dot(a * v);
    if (!(alpha2 > 0.0)) return "alpha vanishes along y";
    const double alpha = std::sqrt(alpha2);
    const double s = std::sin(data_->cone);
    if (alpha < s * ynorm) return "y inside the alpha-degeneracy cone";
    if (alpha + b.dot(v) < s * alpha) return "y inside the (alpha + beta)-degeneracy cone";
  }
  return std::nullopt;
}

std::optional<std::string> Metric::domain_violation(std::span<const double> x,
                                                    std::span<const double> y) const {
  if (auto r = exclusion(x, y)) return r;
  if (const auto* p = product()) {
    const auto m = static_cast<std::size_t>(p->left->dim());
    if (auto r = p->left->domain_violation(x.first(m), y.first(m))) return "left: " + *r;
    if (auto r = p->right->domain_violation(x.subspan(m), y.subspan(m))) return "right: " + *r;
    return std::nullopt;
  }
  if (auto nb = beta_norm(x); nb && !(*nb < 1.0)) {
    return "||b||_alpha = " + std::to_string(*nb) + " is not below 1";
  }
  return std::nullopt;
}

void Metric::check_domain(std::span<const double> x, std::span<const double> y) const {
  if (auto r = domain_violation(x, y)) throw DomainError(*r);
}

Metric Metric::with_x_box(Box box) const {
  if (box.dim() != dim()) throw std::invalid_argument("sampling box dimension does not match metric");
  auto d = std::make_shared<Data>(*data_);
  d->box = std::move(box);
  return Metric(std::move(d));
}

Metric evaluate_metric(const MetricSpec& spec) {
  const int n = spec.dim();
  return std::visit(
      [&](const auto& s) -> Metric {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, EuclideanSpec>) {
          if (n < 1) throw std::invalid_argument("metric dimension must be positive");
          auto d = base_data(n, MetricKind::Euclidean, spec);
          d->f2 = ScalarField(2 * n, [n](std::span<const Jet> args) {
            Jet sum = args[static_cast<std::size_t>(n)] * args[static_cast<std::size_t>(n)];
            for (int i = 1; i < n; ++i) {
              const auto& yi = args[static_cast<std::size_t>(n + i)];
              sum += yi * yi;
            }
            return sum;
          });
          return Metric(std::move(d));
        } else if constexpr (std::is_same_v<S, RiemannianSpec>) {
          auto d = base_data(n, MetricKind::Riemannian, spec);
          d->a = s.a;
          d->f2 = ScalarField(2 * n, [a = s.a, n](std::span<const Jet> args) {
            const auto env = base_env<Jet>(args.first(static_cast<std::size_t>(n)));
            return alpha_squared(a, env, args.subspan(static_cast<std::size_t>(n)));
          });
          return Metric(std::move(d));
        } else if constexpr (std::is_same_v<S, RandersSpec> || std::is_same_v<S, SquareSpec>) {
          constexpr bool square = std::is_same_v<S, SquareSpec>;
          if (static_cast<int>(s.b.size()) != n) throw std::invalid_argument("b must have n entries");
          auto d = base_data(n, square ? MetricKind::Square : MetricKind::Randers, spec);
          d->a = s.a;
          d->b = s.b;
          d->f2 = ScalarField(2 * n, [a = s.a, b = s.b, n](std::span<const Jet> args) {
            const auto env = base_env<Jet>(args.first(static_cast<std::size_t>(n)));
            const auto y = args.subspan(static_cast<std::size_t>(n));
            const Jet alpha = sqrt(alpha_squared(a, env, y));
            const Jet sum = alpha + beta(b, env, y);
            if constexpr (square) {
              const Jet f = (sum * sum) / alpha;
              return f * f;
            } else {
              return sum * sum;
            }
          });
          return Metric(std::move(d));
        } else {
          auto left = std::make_shared<const Metric>(evaluate_metric(*s.left));
          auto right = std::make_shared<const Metric>(evaluate_metric(*s.right));
          Metric p = product_metric(std::move(left), std::move(right), s.f);
          return spec.x_box ? p.with_x_box(*spec.x_box) : p;
        }
      },
      spec.variant);
}

Metric product_metric(std::shared_ptr<const Metric> left, std::shared_ptr<const Metric> right,
                      const ProductFunction& f) {
  const int m = left->dim();
  const int n = right->dim();
  const int total = m + n;
  auto d = std::make_shared<Metric::Data>();
  d->dim = total;
  d->kind = MetricKind::Product;
  d->box.bounds = left->x_box().bounds;
  d->box.bounds.insert(d->box.bounds.end(), right->x_box().bounds.begin(),
                       right->x_box().bounds.end());
  d->f2 = ScalarField(2 * total, [left, right, f, m, n, total](std::span<const Jet> args) {
    std::vector<Jet> la;
    std::vector<Jet> ra;
    la.reserve(static_cast<std::size_t>(2 * m));
    ra.reserve(static_cast<std::size_t>(2 * n));
    for (int i = 0; i < m; ++i) la.push_back(args[static_cast<std::size_t>(i)]);
    for (int i = 0; i < m; ++i) la.push_back(args[static_cast<std::size_t>(total + i)]);
    for (int i = 0; i < n; ++i) ra.push_back(args[static_cast<std::size_t>(m + i)]);
    for (int i = 0; i < n; ++i) ra.push_back(args[static_cast<std::size_t>(total + m + i)]);
    const Jet k = left->f_squared_field()(la);
    const Jet h = right->f_squared_field()(ra);
    return f(k, h);
  });
  d->product = ProductParts{std::move(left), std::move(right), f};
  return Metric(std::move(d));
}

std::vector<double> phase_point(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("x and y must have the same dimension");
  std::vector<double> p(x.begin(), x.end());
  p.insert(p.end(), y.begin(), y.end());
  return p;
}

double f_squared(const Metric& m, std::span<const double> x, std::span<const double> y) {
  if (static_cast<int>(x.size()) != m.dim()) throw std::invalid_argument("x has wrong dimension");
  const auto p = phase_point(x, y);
  return m.f_squared_field().value(p);
}

Matrix y_hessian(const Metric& m, std::span<const double> x, std::span<const double> y) {
  const int n = m.dim();
  if (static_cast<int>(x.size()) != n) throw std::invalid_argument("x has wrong dimension");
  const auto p = phase_point(x, y);
  const Jet j = lift(m.f_squared_field(), p, 2);
  Matrix h(n, n);
  for (int i = 0; i < n; ++i) {
    for (int k = i; k < n; ++k) {
      const auto idx = MultiIndex::zero(2 * n).with_added(n + i).with_added(n + k);
      h(i, k) = h(k, i) = partial(j, idx);
    }
  }
  return h;
}

FundamentalTensor fundamental_tensor(const Metric& m, std::span<const double> x,
                                     std::span<const double> y) {
  FundamentalTensor t;
  t.h = y_hessian(m, x, y);
  t.g = 0.5 * t.h;
  t.g_inv = invert(t.g);
  return t;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

bool ValidationReport::passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.passed || !e.gating; });
}

const ValidationEntry* ValidationReport::worst(const std::string& check) const {
  const ValidationEntry* w = nullptr;
  for (const auto& e : entries) {
    if (e.check == check && (!w || e.margin < w->margin)) w = &e;
  }
  return w;
}

std::pair<std::vector<double>, std::vector<double>> sample_point(const Metric& m, Sampler& rng,
                                                                 const SamplingOptions& options,
                                                                 bool require_domain) {
  const int n = m.dim();
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    for (int i = 0; i < n; ++i) {
      const auto [lo, hi] = m.x_box().bounds[static_cast<std::size_t>(i)];
      x[static_cast<std::size_t>(i)] = rng.uniform(lo, hi);
    }
    auto y = rng.on_sphere(n, options.y_radius);
    const auto reason = require_domain ? m.domain_violation(x, y) : m.exclusion(x, y);
    if (!reason) return {x, std::move(y)};
  }
  throw DomainError("no valid sample found after " + std::to_string(options.max_attempts) +
                    " attempts");
}

namespace {

void append_beta_norms(const Metric& m, std::span<const double> x, int sample, const std::string& prefix,
                       ValidationReport& report, bool& ok) {
  if (const auto* p = m.product()) {
    const auto k = static_cast<std::size_t>(p->left->dim());
    append_beta_norms(*p->left, x.first(k), sample, prefix + "left.", report, ok);
    append_beta_norms(*p->right, x.subspan(k), sample, prefix + "right.", report, ok);
    return;
  }
  if (auto nb = m.beta_norm(x)) {
    const bool pass = *nb < 1.0;
    ok = ok && pass;
    report.entries.push_back({prefix + "beta-norm", sample, *nb, 1.0, 1.0 - *nb, pass,
                              pass ? "" : "||b||_alpha >= 1"});
  }
}

}  // namespace

ValidationReport validate_metric(const Metric& m, int sample_count, std::uint64_t seed,
                                 const SamplingOptions& options) {
  if (sample_count < 1) throw std::invalid_argument("sample_count must be at least 1");
  ValidationReport report;
  constexpr double kHomogeneityTol = 1e-9;
  constexpr double kLambdas[] = {0.5, 2.0, 7.0};
  for (int s = 0; s < sample_count; ++s) {
    Sampler rng(derive_seed(seed, static_cast<std::uint64_t>(s)));
    std::vector<double> x;
    std::vector<double> y;
    try {
      std::tie(x, y) = sample_point(m, rng, options, false);
    } catch (const DomainError& e) {
      report.entries.push_back({"sampling", s, 0.0, 0.0, -1.0, false, e.what()});
      continue;
    }
    bool ok = true;
    append_beta_norms(m, x, s, "", report, ok);
    if (!ok) continue;
    try {
      const double f2 = f_squared(m, x, y);
      report.entries.push_back({"positivity", s, f2, 0.0, f2, f2 > 0.0, ""});

      double worst = 0.0;
      for (double lambda : kLambdas) {
        std::vector<double> ly(y);
        for (auto& c : ly) c *= lambda;
        const double expected = lambda * lambda * f2;
        worst = std::max(worst, std::abs(f_squared(m, x, ly) - expected) / std::abs(expected));
      }
      report.entries.push_back(
          {"homogeneity", s, worst, kHomogeneityTol, kHomogeneityTol - worst, worst <= kHomogeneityTol, ""});

      const Matrix g = 0.5 * y_hessian(m, x, y);
      const bool pd = is_positive_definite(g);
      const Eigen::LDLT<Matrix> ldlt(g);
      const double min_pivot = ldlt.vectorD().minCoeff() / std::max(max_abs(g), 1e-300);
      report.entries.push_back({"positive-definite", s, min_pivot, 0.0, min_pivot, pd,
                                pd ? "" : "pivoted Cholesky found a non-positive pivot", m.product() == nullptr});
      const double det = std::abs(g.determinant());
      const double det_floor = 1e-12 * std::pow(max_abs(g), static_cast<double>(g.rows()));
      report.entries.push_back({"nondegenerate", s, det, det_floor, det - det_floor, det >= det_floor,
                                det >= det_floor ? "" : "|det g| below 1e-12 max|g|^n"});
    } catch (const std::exception& e) {
      report.entries.push_back({"evaluation", s, 0.0, 0.0, -1.0, false, e.what()});
    }
  }
  if (const auto* p = m.product()) {
    auto fr = validate_product_function(p->f, default_product_grid());
    for (auto& e : fr.entries) {
      e.check = "f." + e.check;
      report.entries.push_back(std::move(e));
    }
  }
  return report;
}

ValidationReport validate_metric(const MetricSpec& spec, int sample_count, std::uint64_t seed,
                                 const SamplingOptions& options) {
  return validate_metric(evaluate_metric(spec), sample_count, seed, options);
}

}  // namespace finsler
