#include "finsler/product.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "finsler/errors.hpp"

namespace finsler {

Matrix BlockTensor::assembled() const {
  const auto m = ab.rows();
  const auto n = alpha_beta.rows();
  Matrix full(m + n, m + n);
  full.topLeftCorner(m, m) = ab;
  full.topRightCorner(m, n) = a_beta;
  full.bottomLeftCorner(n, m) = alpha_b;
  full.bottomRightCorner(n, n) = alpha_beta;
  return full;
}

BlockTensor BlockTensor::split(const Matrix& full, int m) {
  const auto n = full.rows() - m;
  return {full.topLeftCorner(m, m), full.topRightCorner(m, n), full.bottomLeftCorner(n, m),
          full.bottomRightCorner(n, n)};
}

std::vector<std::pair<double, double>> default_product_grid() {
  constexpr int kPoints = 20;
  std::vector<double> axis;
  for (int i = 0; i < kPoints; ++i) axis.push_back(std::pow(10.0, -2.0 + 4.0 * i / (kPoints - 1)));
  std::vector<std::pair<double, double>> grid;
  for (double s : axis) {
    for (double t : axis) grid.emplace_back(s, t);
  }
  return grid;
}

namespace {

const char* sign_of(double v) { return v > 0.0 ? "+" : (v < 0.0 ? "-" : "0"); }

}  // namespace

ValidationReport validate_product_function(const ProductFunction& f,
                                           std::span<const std::pair<double, double>> grid) {
  if (grid.empty()) throw std::invalid_argument("product-function grid must not be empty");
  ValidationReport report;
  report.subject = f.describe();
  constexpr double kHomogeneityTol = 1e-9;
  constexpr double kNonzeroTol = 1e-12;
  constexpr double kLambdas[] = {0.5, 2.0, 7.0};
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto [s, t] = grid[k];
    const int sample = static_cast<int>(k);
    if (!(s > 0.0) || !(t > 0.0)) throw std::invalid_argument("grid points must be strictly positive");
    try {
      const double value = f(s, t);
      double worst = 0.0;
      for (double lambda : kLambdas) {
        const double expected = lambda * value;
        worst = std::max(worst, std::abs(f(lambda * s, lambda * t) - expected) /
                                    std::max(std::abs(expected), 1e-300));
      }
      report.entries.push_back({"homogeneity", sample, worst, kHomogeneityTol, kHomogeneityTol - worst,
                                worst <= kHomogeneityTol, ""});
      report.entries.push_back({"positivity", sample, value, 0.0, value, value > 0.0, ""});

      const auto p = f.partials(s, t);
      // f_s, f_t and Delta are 0-homogeneous; compare against f / (s + t).
      const double scale = std::abs(value) / (s + t);
      const double fs_margin = std::abs(p.fs) - kNonzeroTol * scale;
      const double ft_margin = std::abs(p.ft) - kNonzeroTol * scale;
      report.entries.push_back({"f_s-nonzero", sample, p.fs, kNonzeroTol * scale, fs_margin,
                                fs_margin > 0.0, std::string("sign ") + sign_of(p.fs)});
      report.entries.push_back({"f_t-nonzero", sample, p.ft, kNonzeroTol * scale, ft_margin,
                                ft_margin > 0.0, std::string("sign ") + sign_of(p.ft)});
      const double delta = p.delta();
      const double delta_scale = std::abs(p.fs * p.ft) + 2.0 * std::abs(p.f * p.fst);
      const double delta_margin = std::abs(delta) - kNonzeroTol * delta_scale;
      report.entries.push_back({"delta-nonzero", sample, delta, kNonzeroTol * delta_scale,
                                delta_margin, delta_margin > 0.0,
                                std::string("sign ") + sign_of(delta)});
    } catch (const std::exception& e) {
      report.entries.push_back({"evaluation", sample, 0.0, 0.0, -1.0, false, e.what()});
    }
  }
  return report;
}

Metric product_metric(const Metric& left, const Metric& right, const ProductFunction& f) {
  return product_metric(std::make_shared<const Metric>(left), std::make_shared<const Metric>(right), f);
}

namespace {

struct FactorJet {
  double value;
  Vector grad;
  Matrix hess;
};

FactorJet factor_jet(const Metric& m, std::span<const double> x, std::span<const double> y) {
  const int n = m.dim();
  const auto p = phase_point(x, y);
  const Jet j = lift(m.f_squared_field(), p, 2);
  FactorJet out{j.value(), Vector(n), Matrix(n, n)};
  const auto zero = MultiIndex::zero(2 * n);
  for (int i = 0; i < n; ++i) {
    out.grad(i) = partial(j, zero.with_added(n + i));
    for (int k = i; k < n; ++k) {
      out.hess(i, k) = out.hess(k, i) = partial(j, zero.with_added(n + i).with_added(n + k));
    }
  }
  return out;
}

bool vanishes(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double c) { return c == 0.0; });
}

}  // namespace

FactorQuantities factor_quantities(const Metric& product, std::span<const double> x,
                                   std::span<const double> y) {
  const auto* parts = product.product();
  if (!parts) throw std::invalid_argument("metric is not a Minkowskian product");
  if (static_cast<int>(x.size()) != product.dim() || static_cast<int>(y.size()) != product.dim()) {
    throw std::invalid_argument("point has wrong dimension");
  }
  const auto m = static_cast<std::size_t>(parts->left->dim());
  if (vanishes(y.first(m))) throw DomainError("left fiber component vanishes");
  if (vanishes(y.subspan(m))) throw DomainError("right fiber component vanishes");
  const auto left = factor_jet(*parts->left, x.first(m), y.first(m));
  const auto right = factor_jet(*parts->right, x.subspan(m), y.subspan(m));
  FactorQuantities q;
  q.k = left.value;
  q.k_y = left.grad;
  q.k_yy = left.hess;
  q.h = right.value;
  q.h_y = right.grad;
  q.h_yy = right.hess;
  q.f = parts->f.partials(q.k, q.h);
  return q;
}

BlockTensor closed_form_blocks(const Metric& product, std::span<const double> x,
                               std::span<const double> y) {
  const auto q = factor_quantities(product, x, y);
  const auto& f = q.f;
  BlockTensor b;
  // Outer products are formed before scaling so the assembled matrix is
  // exactly symmetric.
  const Matrix kk = q.k_y * q.k_y.transpose();
  const Matrix kh = q.k_y * q.h_y.transpose();
  const Matrix hh = q.h_y * q.h_y.transpose();
  b.ab = f.fs * q.k_yy + f.fss * kk;
  b.a_beta = f.fst * kh;
  b.alpha_b = b.a_beta.transpose();
  b.alpha_beta = f.ft * q.h_yy + f.ftt * hh;
  return b;
}

BlockTensor closed_form_inverse(const Metric& product, std::span<const double> x,
                                std::span<const double> y) {
  const auto q = factor_quantities(product, x, y);
  const auto& f = q.f;
  const double delta = f.delta();
  const double delta_scale = std::abs(f.fs * f.ft) + 2.0 * std::abs(f.f * f.fst);
  if (!(std::abs(delta) > 1e-12 * delta_scale)) {
    throw SingularMatrix("Delta = f_K f_H - 2 f f_KH vanishes");
  }
  if (f.fs == 0.0 || f.ft == 0.0) throw SingularMatrix("f_K or f_H vanishes");
  const auto m = static_cast<Eigen::Index>(q.k_y.size());
  const auto n = static_cast<Eigen::Index>(q.h_y.size());
  const Eigen::Map<const Vector> ybar(y.data(), m);
  const Eigen::Map<const Vector> ytilde(y.data() + m, n);
  const Matrix k_inv = invert(q.k_yy);
  const Matrix h_inv = invert(q.h_yy);
  BlockTensor b;
  b.ab = (k_inv - (f.ft * f.fss / delta) * ybar * ybar.transpose()) / f.fs;
  b.a_beta = -(f.fst / delta) * ybar * ytilde.transpose();
  b.alpha_b = -(f.fst / delta) * ytilde * ybar.transpose();
  b.alpha_beta = (h_inv - (f.fs * f.ftt / delta) * ytilde * ytilde.transpose()) / f.ft;
  return b;
}

}  // namespace finsler
