#pragma once

// Scene files: named metrics, the product test matrix, sampling settings and
// per-check tolerances, read from strict JSON.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "finsler/metric.hpp"
#include "finsler/product_function.hpp"

namespace finsler {

/// Schema violation; path names the offending field, e.g. "metrics.s2.a[1][0]".
class SceneError : public std::runtime_error {
 public:
  SceneError(std::string path, const std::string& message)
      : std::runtime_error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct SceneProduct {
  std::string name;
  std::string left;
  std::string right;
  ProductFunction f;
};

struct SceneSampling {
  int count = 20;
  std::uint64_t seed = 0;
  double y_sphere_radius = 1.0;
  /// Base points and fiber directions per Einstein check.
  int einstein_points = 2;
  int einstein_directions = 8;
};

inline constexpr std::string_view kCheckBlockRiemann = "prop-1.1-block-riemann";
inline constexpr std::string_view kCheckRicciFlatIff = "thm-1.2-ricci-flat-iff";
inline constexpr std::string_view kCheckEinsteinDichotomy = "thm-1.3-einstein-dichotomy";
inline constexpr std::string_view kCheckHessianBlocks = "prop-2.1-hessian-blocks";
inline constexpr std::string_view kCheckInverseBlocks = "prop-2.2-inverse-blocks";
inline constexpr std::string_view kCheckSpraySplit = "thm-2.1-spray-split";
inline constexpr std::string_view kCheckRicciAdditivity = "eq-3.5-ricci-additivity";

/// Default tolerance for every known check id.
const std::map<std::string, double, std::less<>>& default_tolerances();

struct Scene {
  std::map<std::string, MetricSpec> metrics;
  std::vector<SceneProduct> products;
  SceneSampling sampling;
  /// Overrides of default_tolerances().
  std::map<std::string, double, std::less<>> tolerances;

  bool has(std::string_view name) const;
  /// Spec of a named metric or product; throws SceneError for unknown names.
  MetricSpec spec(std::string_view name) const;
  Metric metric(std::string_view name) const;
  const SceneProduct* product(std::string_view name) const;
  double tolerance(std::string_view check_id) const;
};

/// "linear(a,b)", "ratio_square", or an expression over s and t.
ProductFunction parse_product_function(std::string_view text);

Scene parse_scene(std::string_view json_text);
Scene load_scene(const std::filesystem::path& path);

}  // namespace finsler
