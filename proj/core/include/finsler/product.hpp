#pragma once

// Minkowskian products F^2 = f(K, H) of two Finsler metrics, with the block
// formulas for the Hessian of F^2 and its inverse expressed through factor
// quantities K_a, K_ab, H_alpha, H_alpha_beta and the partials of f.

#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "finsler/linalg.hpp"
#include "finsler/metric.hpp"
#include "finsler/product_function.hpp"

namespace finsler {

/// Matrix split along the factor dimensions m (left) and n (right).
struct BlockTensor {
  Matrix ab;          // m x m
  Matrix a_beta;      // m x n
  Matrix alpha_b;     // n x m
  Matrix alpha_beta;  // n x n

  Matrix assembled() const;
  static BlockTensor split(const Matrix& full, int m);
};

/// Log-spaced 20 x 20 grid over [1e-2, 1e2]^2.
std::vector<std::pair<double, double>> default_product_grid();

/// Per-point homogeneity (lambda in {0.5, 2, 7}, 1e-9 relative), positivity
/// of f, nonvanishing f_s, f_t and Delta = f_s f_t - 2 f f_st. Entry details
/// record the sign of f_s, f_t and Delta.
ValidationReport validate_product_function(const ProductFunction& f,
                                           std::span<const std::pair<double, double>> grid);

Metric product_metric(std::shared_ptr<const Metric> left, std::shared_ptr<const Metric> right,
                      const ProductFunction& f);
Metric product_metric(const Metric& left, const Metric& right, const ProductFunction& f);

/// Factor data at a product point (x, y) = ((x^a, x^alpha), (y^a, y^alpha)).
struct FactorQuantities {
  double k = 0.0;
  Vector k_y;   // K_a
  Matrix k_yy;  // K_ab
  double h = 0.0;
  Vector h_y;   // H_alpha
  Matrix h_yy;  // H_alpha_beta
  ProductFunctionPartials f;
};

/// Throws DomainError if either factor fiber component vanishes and
/// std::invalid_argument if the metric is not a product.
FactorQuantities factor_quantities(const Metric& product, std::span<const double> x,
                                   std::span<const double> y);

/// Blocks of the full Hessian of F^2, computed from factor quantities only:
///   G_ab = f_K K_ab + f_KK K_a K_b,   G_a_beta = f_KH K_a H_beta,
///   G_alpha_beta = f_H H_alpha_beta + f_HH H_alpha H_beta.
BlockTensor closed_form_blocks(const Metric& product, std::span<const double> x,
                               std::span<const double> y);

/// Inverse of the full Hessian in closed form:
///   G^ba = (K^ba - f_H f_KK / Delta y^b y^a) / f_K,
///   G^b_alpha = -f_KH / Delta y^b y^alpha,
///   G^beta_alpha = (H^beta_alpha - f_K f_HH / Delta y^beta y^alpha) / f_H.
/// Throws SingularMatrix if Delta vanishes or a factor Hessian is singular.
BlockTensor closed_form_inverse(const Metric& product, std::span<const double> x,
                                std::span<const double> y);

}  // namespace finsler
