#include "finsler/linalg.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "finsler/errors.hpp"

namespace finsler {

double max_abs(const Matrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

Matrix invert(const Matrix& a, double rel_tol) {
  if (a.rows() != a.cols()) throw std::invalid_argument("cannot invert a non-square matrix");
  const Eigen::PartialPivLU<Matrix> lu(a);
  const double scale = std::pow(max_abs(a), static_cast<double>(a.rows()));
  const double det = lu.determinant();
  if (!(std::abs(det) >= rel_tol * scale) || scale == 0.0) {
    throw SingularMatrix("matrix is numerically singular (|det| = " + std::to_string(std::abs(det)) +
                         ")");
  }
  return lu.inverse();
}

bool is_positive_definite(const Matrix& a) {
  const Eigen::LDLT<Matrix> ldlt(a);
  if (ldlt.info() != Eigen::Success) return false;
  return (ldlt.vectorD().array() > 0.0).all();
}

std::vector<Jet> solve(std::vector<Jet> a, std::vector<Jet> b, double rel_tol) {
  const std::size_t n = b.size();
  if (a.size() != n * n) throw std::invalid_argument("jet system has inconsistent shape");
  double scale = 0.0;
  for (const auto& j : a) scale = std::max(scale, std::abs(j.value()));
  auto at = [&](std::size_t r, std::size_t c) -> Jet& { return a[r * n + c]; };
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(at(r, col).value()) > std::abs(at(pivot, col).value())) pivot = r;
    }
    if (!(std::abs(at(pivot, col).value()) > rel_tol * scale)) {
      throw SingularMatrix("jet-valued system is numerically singular");
    }
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(at(pivot, c), at(col, c));
      std::swap(b[pivot], b[col]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const Jet factor = at(r, col) / at(col, col);
      for (std::size_t c = col + 1; c < n; ++c) at(r, c) -= factor * at(col, c);
      b[r] -= factor * b[col];
    }
  }
  std::vector<Jet> x(b);
  for (std::size_t i = n; i-- > 0;) {
    Jet s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= at(i, c) * x[c];
    x[i] = s / at(i, i);
  }
  return x;
}

}  // namespace finsler
