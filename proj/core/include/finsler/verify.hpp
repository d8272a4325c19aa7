#pragma once

// Theorem checks over sampled points of Minkowskian products. Every check
// reports the worst residual seen and passes iff it stays below tolerance;
// biconditional statements are checked as consistency of sampled evidence.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "finsler/metric.hpp"
#include "finsler/scene.hpp"

namespace finsler {

struct CheckDetail {
  std::string product;
  int sample = -1;  // -1 for per-product summaries
  std::optional<double> residual;  // empty for skipped samples
  std::string note;
};

struct TheoremCheck {
  std::string id;
  int samples = 0;
  double worst_residual = 0.0;
  double tolerance = 0.0;
  std::vector<CheckDetail> details;

  bool passed() const { return worst_residual < tolerance; }
};

struct CheckOptions {
  int samples = 20;
  std::uint64_t seed = 0;
  double tolerance = 0.0;  // 0 selects the default for the check id
  double y_radius = 1.0;
  /// Einstein check only: base points and fiber directions per point.
  int einstein_points = 2;
  int einstein_directions = 8;
};

/// Closed-form blocks of the full Hessian against the jet Hessian (max
/// relative entry error).
TheoremCheck check_hessian_blocks(const Metric& product, std::string_view label, const CheckOptions& options);
/// max |closed-form inverse * h - I|.
TheoremCheck check_inverse_blocks(const Metric& product, std::string_view label, const CheckOptions& options);
/// max |G(product) - (G_left, G_right)|.
TheoremCheck check_spray_split(const Metric& product, std::string_view label, const CheckOptions& options);
/// Diagonal blocks of R against factor curvatures, off-diagonal blocks
/// against 0, relative to max(1, factor curvature scale).
TheoremCheck check_block_structure(const Metric& product, std::string_view label, const CheckOptions& options);
/// |Ric - Ric_left - Ric_right| / max(1, |Ric|).
TheoremCheck check_ricci_additivity(const Metric& product, std::string_view label, const CheckOptions& options);
/// Product Ricci-flat on the samples iff both factors are; residual is a
/// 0/1 inconsistency indicator per product.
TheoremCheck check_ricci_flat_iff(const Metric& product, std::string_view label, const CheckOptions& options);
/// Einstein product => f_KH = 0 and both factors Einstein with
/// lambda_left = f_K Lambda, lambda_right = f_H Lambda (unnormalized);
/// Ricci-flat product => both factors Ricci-flat; otherwise vacuous.
TheoremCheck check_einstein_dichotomy(const Metric& product, std::string_view label,
                                      const CheckOptions& options);

/// Threshold on |f_KH| for the linearity condition of the Einstein check.
inline constexpr double kLinearityTolerance = 1e-8;

struct VerifyReport {
  std::uint64_t seed = 0;
  std::vector<TheoremCheck> checks;  // sorted by id

  bool passed() const;
};

/// A scene metric or product failed validation; nothing was checked.
class SceneValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Validates every scene metric, then runs every check over every product
/// and merges the results per check id.
VerifyReport run_all(const Scene& scene, std::uint64_t seed);

/// {"seed", "passed", "checks": [{check_id, verdict, samples, worst_residual,
/// tolerance, details[]}]}
std::string report_json(const VerifyReport& report, int indent = 2);

}  // namespace finsler
