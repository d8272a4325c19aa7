#pragma once

#include <Eigen/Dense>
#include <vector>

#include "finsler/jet.hpp"

namespace finsler {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Dense inverse by LU with partial pivoting. Throws SingularMatrix when
/// |det A| < rel_tol * max|A_ij|^n.
Matrix invert(const Matrix& a, double rel_tol = 1e-12);

/// Pivoted Cholesky (LDL^T) test: every pivot strictly positive.
bool is_positive_definite(const Matrix& a);

/// Largest absolute entry.
double max_abs(const Matrix& a);

/// Solves A X = B for jet-valued A (n x n, row-major) and B (n entries).
/// Gaussian elimination, pivoting on the constant terms.
std::vector<Jet> solve(std::vector<Jet> a, std::vector<Jet> b, double rel_tol = 1e-12);

}  // namespace finsler
