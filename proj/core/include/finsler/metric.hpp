#pragma once

// Finsler metrics: declarative specs, the evaluated form F^2(x, y), and the
// fundamental tensor g_ij = (1/2) d^2 F^2 / dy^i dy^j.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "finsler/expr.hpp"
#include "finsler/linalg.hpp"
#include "finsler/product_function.hpp"
#include "finsler/sampling.hpp"
#include "finsler/scalar_field.hpp"

namespace finsler {

/// Axis-aligned coordinate box used to sample base points.
struct Box {
  std::vector<std::pair<double, double>> bounds;

  static Box cube(int dim, double lo, double hi);
  int dim() const { return static_cast<int>(bounds.size()); }
  bool contains(std::span<const double> x) const;
};

/// Symmetric matrix of coefficient expressions over x1..xn; only the upper
/// triangle is stored, row by row.
class SymmetricExprMatrix {
 public:
  SymmetricExprMatrix() = default;
  SymmetricExprMatrix(int dim, std::vector<expr::Ast> upper);

  static SymmetricExprMatrix identity(int dim);

  int dim() const { return dim_; }
  const expr::Ast& at(int i, int j) const;
  const std::vector<expr::Ast>& upper() const { return upper_; }

 private:
  int dim_ = 0;
  std::vector<expr::Ast> upper_;
};

struct EuclideanSpec {
  int dim = 0;
};

struct RiemannianSpec {
  SymmetricExprMatrix a;
};

/// F = alpha + beta.
struct RandersSpec {
  SymmetricExprMatrix a;
  std::vector<expr::Ast> b;
};

/// F = (alpha + beta)^2 / alpha.
struct SquareSpec {
  SymmetricExprMatrix a;
  std::vector<expr::Ast> b;
};

struct MetricSpec;

struct ProductSpec {
  std::shared_ptr<const MetricSpec> left;
  std::shared_ptr<const MetricSpec> right;
  ProductFunction f;
};

struct MetricSpec {
  std::variant<EuclideanSpec, RiemannianSpec, RandersSpec, SquareSpec, ProductSpec> variant;
  /// Base-point sampling box; defaults to [-0.5, 0.5]^n (products: the
  /// concatenation of the factor boxes).
  std::optional<Box> x_box;
  /// Half-angle of the excluded cone around degenerate directions of
  /// Randers and square metrics, radians.
  double cone_half_angle = 0.05;

  int dim() const;
};

enum class MetricKind { Euclidean, Riemannian, Randers, Square, Product };

class Metric;

struct ProductParts {
  std::shared_ptr<const Metric> left;
  std::shared_ptr<const Metric> right;
  ProductFunction f;
};

/// An evaluated Finsler metric: dimension n and F^2 as a field of arity 2n
/// over (x^1..x^n, y^1..y^n). Cheap to copy.
class Metric {
 public:
  int dim() const;
  MetricKind kind() const;
  const ScalarField& f_squared_field() const;
  const Box& x_box() const;
  double cone_half_angle() const;

  /// Factors and product function for Minkowskian products, else nullptr.
  const ProductParts* product() const;

  /// ||b||_alpha at x for Randers and square metrics.
  std::optional<double> beta_norm(std::span<const double> x) const;

  /// Reason the point lies in an excluded region (degeneracy cone, product
  /// fiber slit, zero vector), if it does. Does not test ||b||_alpha.
  std::optional<std::string> exclusion(std::span<const double> x, std::span<const double> y) const;

  /// exclusion() plus the ||b||_alpha < 1 requirement, recursively.
  std::optional<std::string> domain_violation(std::span<const double> x,
                                              std::span<const double> y) const;

  /// Throws DomainError carrying domain_violation()'s reason.
  void check_domain(std::span<const double> x, std::span<const double> y) const;

  /// Same metric with a different base-point sampling box.
  Metric with_x_box(Box box) const;

  struct Data;
  explicit Metric(std::shared_ptr<const Data> data) : data_(std::move(data)) {}

 private:
  std::shared_ptr<const Data> data_;
};

/// Builds the evaluated metric for a spec (recursively for products).
Metric evaluate_metric(const MetricSpec& spec);

/// Concatenated (x, y) argument vector of length 2n.
std::vector<double> phase_point(std::span<const double> x, std::span<const double> y);

double f_squared(const Metric& m, std::span<const double> x, std::span<const double> y);

struct FundamentalTensor {
  Matrix g;      // (1/2) Hessian of F^2 in y
  Matrix h;      // full Hessian, 2g
  Matrix g_inv;  // inverse of g
};

/// Throws SingularMatrix if |det g| < 1e-12 * max|g|^n.
FundamentalTensor fundamental_tensor(const Metric& m, std::span<const double> x,
                                     std::span<const double> y);

/// Full y-Hessian of F^2 from an order-2 jet (no inversion).
Matrix y_hessian(const Metric& m, std::span<const double> x, std::span<const double> y);

struct ValidationEntry {
  std::string check;
  int sample = -1;
  double value = 0.0;
  double threshold = 0.0;
  /// Distance to failing, in the check's own units; negative when failed.
  double margin = 0.0;
  bool passed = true;
  std::string detail;
  /// Non-gating entries are informational and do not affect passed().
  bool gating = true;
};

struct ValidationReport {
  std::string subject;
  std::vector<ValidationEntry> entries;

  bool passed() const;
  /// Entry with the smallest margin for the named check.
  const ValidationEntry* worst(const std::string& check) const;
};

struct SamplingOptions {
  double y_radius = 1.0;
  int max_attempts = 1000;
};

/// Draws a base point from the metric's box and a fiber vector on the
/// y-sphere, rejecting excluded points (and, if require_domain, points that
/// violate ||b||_alpha < 1).
std::pair<std::vector<double>, std::vector<double>> sample_point(const Metric& m, Sampler& rng,
                                                                 const SamplingOptions& options,
                                                                 bool require_domain = true);

/// Per-sample metric axioms: 2-homogeneity of F^2 (lambda in {0.5, 2, 7}),
/// F^2 > 0, nondegeneracy and positive definiteness of g (pivoted Cholesky),
/// and the Randers norm bound. Product metrics also validate f on the
/// default grid; their positive definiteness is reported but not required,
/// since the product-function conditions only guarantee nondegeneracy.
ValidationReport validate_metric(const Metric& m, int sample_count, std::uint64_t seed,
                                 const SamplingOptions& options = {});
ValidationReport validate_metric(const MetricSpec& spec, int sample_count, std::uint64_t seed,
                                 const SamplingOptions& options = {});

}  // namespace finsler
