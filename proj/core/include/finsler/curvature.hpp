#pragma once

// Spray coefficients, Riemann curvature R^i_k, Ricci curvature and the
// Ricci tensor of a Finsler metric, all from jets of F^2.
//
//   G^i   = 1/4 g^il ([F^2]_{x^k y^l} y^k - [F^2]_{x^l})
//   R^i_k = 2 dG^i/dx^k - y^j d2G^i/dx^j dy^k + 2 G^j d2G^i/dy^j dy^k
//           - dG^i/dy^j dG^j/dy^k
//   Ric   = R^i_i,    Ric_ij = 1/2 d2 Ric / dy^i dy^j
//
// G needs F^2 to order 2, R to order 4 and Ric_ij to order 6.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "finsler/jet.hpp"
#include "finsler/linalg.hpp"
#include "finsler/metric.hpp"

namespace finsler {

enum class RicciTensorMode { Jet, FiniteDifference };

struct CurvatureOptions {
  /// Highest jet order the engine may use; the jet Ricci tensor needs 6.
  int max_order = kMaxJetOrder;
  RicciTensorMode mode = RicciTensorMode::Jet;
  /// Base step of the finite-difference Ricci tensor (scaled by max(1, |y_i|)).
  double fd_step = 1e-3;
};

struct SprayCoefficients {
  Vector g;  // G^i
};

struct RiemannCurvature {
  Matrix r;  // R^i_k, row i, column k
};

/// Taylor expansions of G^1..G^n about (x, y) in the 2n phase variables.
std::vector<Jet> spray_expansion(const Metric& m, std::span<const double> x,
                                 std::span<const double> y, int order);

/// R^i_k expansions (row-major n x n) two orders below the given spray jets.
std::vector<Jet> riemann_expansion(std::span<const Jet> spray, std::span<const double> y);

SprayCoefficients spray_coefficients(const Metric& m, std::span<const double> x,
                                     std::span<const double> y);
RiemannCurvature riemann_curvature(const Metric& m, std::span<const double> x,
                                   std::span<const double> y);
double ricci_scalar(const Metric& m, std::span<const double> x, std::span<const double> y);

/// Throws OrderExceeded in jet mode when options.max_order < 6.
Matrix ricci_tensor(const Metric& m, std::span<const double> x, std::span<const double> y,
                    const CurvatureOptions& options = {});

/// Everything at one (x, y).
struct CurvatureReport {
  std::vector<double> x;
  std::vector<double> y;
  double f_squared = 0.0;
  Matrix g;
  Matrix g_inv;
  Vector spray;
  Matrix riemann;
  double ric = 0.0;
  Matrix ric_tensor;
};

CurvatureReport curvature_report(const Metric& m, std::span<const double> x,
                                 std::span<const double> y, const CurvatureOptions& options = {});

enum class EinsteinVerdict { Einstein, RicciFlat, NotEinstein };

std::string to_string(EinsteinVerdict v);

struct EinsteinTolerances {
  /// Ricci-flat when max|Ric| / max F^2 is below this.
  double flat = 1e-7;
  /// Einstein needs isotropy spread and tensor residual below these.
  double spread = 1e-6;
  double residual = 1e-5;
};

struct EinsteinSample {
  std::vector<double> y;
  double f_squared = 0.0;
  double ric = 0.0;
  double lambda = 0.0;  // Ric / ((n - 1) F^2)
};

struct EinsteinDiagnostics {
  int dim = 0;
  double ric = 0.0;                      // Ric at the first direction
  double lambda_hat_unnormalized = 0.0;  // mean Ric / F^2
  double lambda_hat = 0.0;               // mean Ric / ((n - 1) F^2)
  double tensor_residual = 0.0;          // max |Ric_ij - (n-1) lambda_hat g_ij| / max|g|
  double isotropy_spread = 0.0;          // max - min of Ric / ((n - 1) F^2)
  double flatness = 0.0;                 // max|Ric| / max F^2
  EinsteinVerdict verdict = EinsteinVerdict::NotEinstein;
  std::vector<EinsteinSample> samples;
};

/// Requires at least 8 pairwise non-parallel directions. For n = 1 the
/// normalized quantities are reported as 0.
EinsteinDiagnostics einstein_diagnostics(const Metric& m, std::span<const double> x,
                                         std::span<const std::vector<double>> y_samples,
                                         const EinsteinTolerances& tolerances = {},
                                         const CurvatureOptions& options = {});

/// Seeded fiber directions at a fixed base point, pairwise non-parallel and
/// outside the metric's excluded regions.
std::vector<std::vector<double>> sample_directions(const Metric& m, std::span<const double> x,
                                                   int count, std::uint64_t seed, double radius = 1.0);

}  // namespace finsler
