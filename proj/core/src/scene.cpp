#include "finsler/scene.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <set>
#include <sstream>

#include <json.hpp>

namespace finsler {

using nlohmann::json;

const std::map<std::string, double, std::less<>>& default_tolerances() {
  static const std::map<std::string, double, std::less<>> table = {
      {std::string(kCheckBlockRiemann), 1e-7},
      // 0/1 inconsistency indicator.
      {std::string(kCheckRicciFlatIff), 0.5},
      {std::string(kCheckEinsteinDichotomy), 1e-5},
      {std::string(kCheckHessianBlocks), 1e-8},
      {std::string(kCheckInverseBlocks), 1e-8},
      {std::string(kCheckSpraySplit), 1e-9},
      {std::string(kCheckRicciAdditivity), 1e-7},
  };
  return table;
}

bool Scene::has(std::string_view name) const {
  return metrics.find(std::string(name)) != metrics.end() || product(name) != nullptr;
}

const SceneProduct* Scene::product(std::string_view name) const {
  for (const auto& p : products) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

MetricSpec Scene::spec(std::string_view name) const {
  if (auto it = metrics.find(std::string(name)); it != metrics.end()) return it->second;
  if (const auto* p = product(name)) {
    MetricSpec s;
    s.variant = ProductSpec{std::make_shared<const MetricSpec>(spec(p->left)),
                            std::make_shared<const MetricSpec>(spec(p->right)), p->f};
    return s;
  }
  throw SceneError("", "unknown metric '" + std::string(name) + "'");
}

Metric Scene::metric(std::string_view name) const { return evaluate_metric(spec(name)); }

double Scene::tolerance(std::string_view check_id) const {
  if (auto it = tolerances.find(check_id); it != tolerances.end()) return it->second;
  return default_tolerances().at(std::string(check_id));
}

ProductFunction parse_product_function(std::string_view text) {
  std::string s;
  for (char c : text) {
    if (c != ' ' && c != '\t') s += c;
  }
  if (s == "ratio_square") return ProductFunction::ratio_square();
  if (s.rfind("linear(", 0) == 0 && s.back() == ')') {
    const auto body = s.substr(7, s.size() - 8);
    const auto comma = body.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("linear(a,b) needs two coefficients");
    std::size_t used_a = 0;
    std::size_t used_b = 0;
    const auto a_text = body.substr(0, comma);
    const auto b_text = body.substr(comma + 1);
    double a = 0.0;
    double b = 0.0;
    try {
      a = std::stod(a_text, &used_a);
      b = std::stod(b_text, &used_b);
    } catch (const std::exception&) {
      throw std::invalid_argument("linear(a,b) coefficients must be numbers");
    }
    if (used_a != a_text.size() || used_b != b_text.size()) {
      throw std::invalid_argument("linear(a,b) coefficients must be numbers");
    }
    return ProductFunction::linear(a, b);
  }
  return ProductFunction::custom(expr::parse(text));
}

namespace {

std::string key_path(const std::string& base, std::string_view key) {
  return base.empty() ? std::string(key) : base + "." + std::string(key);
}

std::string index_path(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

void allow_only(const json& obj, const std::string& path, std::initializer_list<std::string_view> keys) {
  if (!obj.is_object()) throw SceneError(path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (auto k : keys) known = known || key == k;
    if (!known) throw SceneError(key_path(path, key), "unknown field");
  }
}

const json& require(const json& obj, const std::string& path, std::string_view key) {
  auto it = obj.find(std::string(key));
  if (it == obj.end()) throw SceneError(key_path(path, key), "missing required field");
  return *it;
}

int as_int(const json& v, const std::string& path, int lo) {
  if (!v.is_number_integer()) throw SceneError(path, "expected an integer");
  const auto value = v.get<std::int64_t>();
  if (value < lo || value > std::numeric_limits<int>::max()) {
    throw SceneError(path, "must be an integer >= " + std::to_string(lo));
  }
  return static_cast<int>(value);
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw SceneError(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw SceneError(path, "must be finite");
  return d;
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw SceneError(path, "expected a string");
  return v.get<std::string>();
}

expr::Ast coefficient(const json& v, const std::string& path, int dim) {
  expr::Ast ast;
  if (v.is_number()) {
    ast = expr::Ast::number(as_number(v, path));
  } else if (v.is_string()) {
    try {
      ast = expr::parse(v.get<std::string>());
    } catch (const expr::ParseError& e) {
      throw SceneError(path, e.what());
    }
  } else {
    throw SceneError(path, "expected an expression string or a number");
  }
  for (const auto& name : expr::free_variables(ast)) {
    bool ok = false;
    for (int i = 1; i <= dim; ++i) ok = ok || name == "x" + std::to_string(i);
    if (!ok) {
      throw SceneError(path, "unknown variable '" + name + "' (allowed: x1..x" + std::to_string(dim) + ")");
    }
  }
  return ast;
}

SymmetricExprMatrix parse_a(const json& v, const std::string& path, int dim) {
  if (!v.is_array() || v.size() != static_cast<std::size_t>(dim)) {
    throw SceneError(path, "expected " + std::to_string(dim) + " upper-triangle rows");
  }
  std::vector<expr::Ast> upper;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto row_path = index_path(path, i);
    const auto& row = v[i];
    const auto want = static_cast<std::size_t>(dim) - i;
    if (!row.is_array() || row.size() != want) {
      throw SceneError(row_path, "row " + std::to_string(i) + " of the upper triangle needs " +
                                     std::to_string(want) + " entries");
    }
    for (std::size_t j = 0; j < row.size(); ++j) upper.push_back(coefficient(row[j], index_path(row_path, j), dim));
  }
  return SymmetricExprMatrix(dim, std::move(upper));
}

std::vector<expr::Ast> parse_b(const json& v, const std::string& path, int dim) {
  if (!v.is_array() || v.size() != static_cast<std::size_t>(dim)) {
    throw SceneError(path, "expected " + std::to_string(dim) + " entries");
  }
  std::vector<expr::Ast> b;
  for (std::size_t i = 0; i < v.size(); ++i) b.push_back(coefficient(v[i], index_path(path, i), dim));
  return b;
}

Box parse_box(const json& v, const std::string& path, int dim) {
  if (!v.is_array() || v.size() != static_cast<std::size_t>(dim)) {
    throw SceneError(path, "expected " + std::to_string(dim) + " [lo, hi] pairs");
  }
  Box box;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto p = index_path(path, i);
    if (!v[i].is_array() || v[i].size() != 2) throw SceneError(p, "expected [lo, hi]");
    const double lo = as_number(v[i][0], index_path(p, 0));
    const double hi = as_number(v[i][1], index_path(p, 1));
    if (!(lo < hi)) throw SceneError(p, "lo must be below hi");
    box.bounds.emplace_back(lo, hi);
  }
  return box;
}

MetricSpec parse_metric(const json& v, const std::string& path) {
  allow_only(v, path, {"type", "dim", "a", "b", "x_box", "cone_half_angle"});
  const auto type = as_string(require(v, path, "type"), key_path(path, "type"));
  const int dim = as_int(require(v, path, "dim"), key_path(path, "dim"), 1);
  auto forbid = [&](std::string_view key) {
    if (v.contains(std::string(key))) {
      throw SceneError(key_path(path, key), "not allowed for type '" + type + "'");
    }
  };
  MetricSpec spec;
  if (type == "euclidean") {
    forbid("a");
    forbid("b");
    spec.variant = EuclideanSpec{dim};
  } else if (type == "riemannian") {
    forbid("b");
    spec.variant = RiemannianSpec{parse_a(require(v, path, "a"), key_path(path, "a"), dim)};
  } else if (type == "randers" || type == "square") {
    auto a = parse_a(require(v, path, "a"), key_path(path, "a"), dim);
    auto b = parse_b(require(v, path, "b"), key_path(path, "b"), dim);
    if (type == "randers") {
      spec.variant = RandersSpec{std::move(a), std::move(b)};
    } else {
      spec.variant = SquareSpec{std::move(a), std::move(b)};
    }
  } else {
    throw SceneError(key_path(path, "type"), "unknown metric type '" + type +
                                                 "' (expected euclidean, riemannian, randers or square)");
  }
  if (v.contains("x_box")) spec.x_box = parse_box(v["x_box"], key_path(path, "x_box"), dim);
  if (v.contains("cone_half_angle")) {
    const auto p = key_path(path, "cone_half_angle");
    const double c = as_number(v["cone_half_angle"], p);
    if (!(c > 0.0 && c < 1.5)) throw SceneError(p, "must lie in (0, 1.5) radians");
    spec.cone_half_angle = c;
  }
  return spec;
}

SceneProduct parse_product(const json& v, const std::string& path, const Scene& scene,
                           const std::set<std::string>& earlier) {
  allow_only(v, path, {"name", "left", "right", "f"});
  const auto name = as_string(require(v, path, "name"), key_path(path, "name"));
  if (name.empty()) throw SceneError(key_path(path, "name"), "must not be empty");
  if (scene.metrics.count(name) || earlier.count(name)) {
    throw SceneError(key_path(path, "name"), "duplicate name '" + name + "'");
  }
  auto factor = [&](std::string_view key) {
    const auto fp = key_path(path, key);
    auto target = as_string(require(v, path, key), fp);
    if (!scene.metrics.count(target) && !earlier.count(target)) {
      throw SceneError(fp, "unknown metric '" + target + "'");
    }
    return target;
  };
  auto left = factor("left");
  auto right = factor("right");
  const auto fp = key_path(path, "f");
  const auto text = as_string(require(v, path, "f"), fp);
  try {
    return SceneProduct{name, std::move(left), std::move(right), parse_product_function(text)};
  } catch (const std::exception& e) {
    throw SceneError(fp, e.what());
  }
}

SceneSampling parse_sampling(const json& v, const std::string& path) {
  allow_only(v, path, {"count", "seed", "y_sphere_radius", "einstein_points", "einstein_directions"});
  SceneSampling s;
  if (v.contains("count")) s.count = as_int(v["count"], key_path(path, "count"), 1);
  if (v.contains("seed")) {
    const auto& seed = v["seed"];
    if (!seed.is_number_unsigned()) {
      throw SceneError(key_path(path, "seed"), "expected a non-negative integer");
    }
    s.seed = seed.get<std::uint64_t>();
  }
  if (v.contains("y_sphere_radius")) {
    const auto p = key_path(path, "y_sphere_radius");
    s.y_sphere_radius = as_number(v["y_sphere_radius"], p);
    if (!(s.y_sphere_radius > 0.0)) throw SceneError(p, "must be positive");
  }
  if (v.contains("einstein_points")) s.einstein_points = as_int(v["einstein_points"], key_path(path, "einstein_points"), 1);
  if (v.contains("einstein_directions")) {
    s.einstein_directions = as_int(v["einstein_directions"], key_path(path, "einstein_directions"), 8);
  }
  return s;
}

}  // namespace

Scene parse_scene(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SceneError("", std::string("invalid JSON: ") + e.what());
  }
  allow_only(root, "", {"metrics", "products", "sampling", "tolerances"});
  Scene scene;
  if (!root.contains("metrics") || !root["metrics"].is_object() || root["metrics"].empty()) {
    if (root.contains("metrics") && !root["metrics"].is_object()) throw SceneError("metrics", "expected an object");
    throw SceneError("metrics", "no metrics defined");
  }
  for (const auto& [name, value] : root["metrics"].items()) {
    if (name.empty()) throw SceneError("metrics", "metric names must not be empty");
    scene.metrics.emplace(name, parse_metric(value, "metrics." + name));
  }
  if (root.contains("products")) {
    const auto& products = root["products"];
    if (!products.is_array()) throw SceneError("products", "expected an array");
    std::set<std::string> names;
    for (std::size_t i = 0; i < products.size(); ++i) {
      auto p = parse_product(products[i], index_path("products", i), scene, names);
      names.insert(p.name);
      scene.products.push_back(std::move(p));
    }
  }
  if (root.contains("sampling")) scene.sampling = parse_sampling(root["sampling"], "sampling");
  if (root.contains("tolerances")) {
    const auto& tol = root["tolerances"];
    if (!tol.is_object()) throw SceneError("tolerances", "expected an object");
    for (const auto& [id, value] : tol.items()) {
      const auto p = "tolerances." + id;
      if (!default_tolerances().count(id)) throw SceneError(p, "unknown check id");
      const double t = as_number(value, p);
      if (!(t > 0.0)) throw SceneError(p, "must be positive");
      scene.tolerances[id] = t;
    }
  }
  return scene;
}

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SceneError("", "cannot read scene file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scene(text.str());
}

}  // namespace finsler
