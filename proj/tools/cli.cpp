#include "cli.hpp"

#include <charconv>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "finsler/curvature.hpp"
#include "finsler/errors.hpp"
#include "finsler/geodesic.hpp"
#include "finsler/product.hpp"
#include "finsler/scene.hpp"
#include "finsler/verify.hpp"

namespace finsler::cli {

namespace {

using nlohmann::json;

/// Bad command-line input; exit code 2.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::vector<double> parse_csv(const std::string& text, const std::string& option) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = text.find(',', pos);
    auto field = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    const auto first = field.find_first_not_of(" \t");
    const auto last = field.find_last_not_of(" \t");
    field = first == std::string::npos ? "" : field.substr(first, last - first + 1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
      throw InputError(option + ": malformed number '" + field + "' in '" + text + "'");
    }
    out.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::vector<double> vector_arg(const std::string& text, const std::string& option, int dim) {
  auto v = parse_csv(text, option);
  if (static_cast<int>(v.size()) != dim) {
    throw InputError(fmt::format("{}: expected {} comma-separated values, got {}", option, dim, v.size()));
  }
  return v;
}

json to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json to_json(const BlockTensor& b) {
  return {{"ab", to_json(b.ab)},
          {"a_beta", to_json(b.a_beta)},
          {"alpha_b", to_json(b.alpha_b)},
          {"alpha_beta", to_json(b.alpha_beta)},
          {"assembled", to_json(b.assembled())}};
}

void print_vector(std::ostream& out, const std::string& label, std::span<const double> v) {
  out << label << " = [";
  for (std::size_t i = 0; i < v.size(); ++i) out << (i ? ", " : "") << num(v[i]);
  out << "]\n";
}

void print_vector(std::ostream& out, const std::string& label, const Vector& v) {
  print_vector(out, label, std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

// Row-major with right-aligned columns.
void print_matrix(std::ostream& out, const std::string& label, const Matrix& m) {
  out << label << " =\n";
  std::vector<std::size_t> width(static_cast<std::size_t>(m.cols()), 0);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      width[static_cast<std::size_t>(j)] = std::max(width[static_cast<std::size_t>(j)], num(m(i, j)).size());
    }
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << " ";
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out << fmt::format(" {:>{}}", num(m(i, j)), width[static_cast<std::size_t>(j)]);
    }
    out << "\n";
  }
}

std::string kind_name(MetricKind k) {
  switch (k) {
    case MetricKind::Euclidean: return "euclidean";
    case MetricKind::Riemannian: return "riemannian";
    case MetricKind::Randers: return "randers";
    case MetricKind::Square: return "square";
    case MetricKind::Product: return "product";
  }
  return "?";
}

struct Common {
  std::string scene_path;
  bool json = false;
};

struct PointArgs {
  std::string metric;
  std::string x;
  std::string y;
};

Metric lookup(const Scene& scene, const std::string& name) {
  if (!scene.has(name)) throw InputError("--metric: unknown metric '" + name + "'");
  return scene.metric(name);
}

void check_point(const Metric& m, std::span<const double> x, std::span<const double> y) {
  if (auto why = m.domain_violation(x, y)) throw InputError("--x/--y: point outside the metric's domain: " + *why);
}

std::uint64_t pick_seed(const std::optional<std::uint64_t>& flag, const Scene& scene) {
  return flag ? *flag : scene.sampling.seed;
}

int cmd_validate(const Common& c, std::optional<std::uint64_t> seed_flag, std::ostream& out) {
  const auto scene = load_scene(c.scene_path);
  const auto seed = pick_seed(seed_flag, scene);
  std::vector<std::string> names;
  for (const auto& [name, spec] : scene.metrics) names.push_back(name);
  for (const auto& p : scene.products) names.push_back(p.name);

  SamplingOptions sampling;
  sampling.y_radius = scene.sampling.y_sphere_radius;
  bool all = true;
  json reports = json::array();
  for (const auto& name : names) {
    const auto report = validate_metric(scene.metric(name), scene.sampling.count, derive_seed(seed, reports.size()), sampling);
    all = all && report.passed();
    // Worst entry per check, in first-seen order.
    std::vector<std::string> checks;
    for (const auto& e : report.entries) {
      if (std::find(checks.begin(), checks.end(), e.check) == checks.end()) checks.push_back(e.check);
    }
    json summary = json::array();
    if (!c.json) out << fmt::format("{} [{}]: {}\n", name, report.subject.empty() ? kind_name(scene.metric(name).kind()) : report.subject, report.passed() ? "pass" : "FAIL");
    for (const auto& check : checks) {
      const auto* w = report.worst(check);
      int failed = 0;
      int total = 0;
      for (const auto& e : report.entries) {
        if (e.check == check) {
          ++total;
          failed += e.passed ? 0 : 1;
        }
      }
      summary.push_back({{"check", check},
                         {"entries", total},
                         {"failed", failed},
                         {"gating", w->gating},
                         {"worst_value", w->value},
                         {"worst_margin", w->margin},
                         {"worst_sample", w->sample},
                         {"detail", w->detail}});
      if (!c.json) {
        out << fmt::format("  {:<24} {:>4}/{:<4} failed  worst margin {} (value {}, sample {}){}{}\n", check, failed, total,
                           num(w->margin), num(w->value), w->sample, w->gating ? "" : " [informational]",
                           w->detail.empty() ? "" : "  " + w->detail);
      }
    }
    reports.push_back({{"name", name}, {"subject", report.subject}, {"passed", report.passed()}, {"checks", summary}});
  }
  if (c.json) out << json{{"seed", seed}, {"passed", all}, {"metrics", reports}}.dump(2) << "\n";
  return all ? kExitOk : kExitCheckFailed;
}

int cmd_tensor(const Common& c, const PointArgs& p, std::ostream& out) {
  const auto scene = load_scene(c.scene_path);
  const auto m = lookup(scene, p.metric);
  const auto x = vector_arg(p.x, "--x", m.dim());
  const auto y = vector_arg(p.y, "--y", m.dim());
  check_point(m, x, y);
  const auto t = fundamental_tensor(m, x, y);
  const double f2 = f_squared(m, x, y);
  std::optional<BlockTensor> blocks;
  std::optional<BlockTensor> inverse;
  std::string inverse_error;
  if (m.product()) {
    blocks = closed_form_blocks(m, x, y);
    try {
      inverse = closed_form_inverse(m, x, y);
    } catch (const SingularMatrix& e) {
      inverse_error = e.what();
    }
  }
  if (c.json) {
    json j = {{"metric", p.metric}, {"kind", kind_name(m.kind())}, {"x", x}, {"y", y}, {"f_squared", f2},
              {"g", to_json(t.g)}, {"h", to_json(t.h)}, {"g_inv", to_json(t.g_inv)}};
    if (blocks) j["closed_form_blocks"] = to_json(*blocks);
    if (inverse) j["closed_form_inverse"] = to_json(*inverse);
    if (!inverse_error.empty()) j["closed_form_inverse_error"] = inverse_error;
    out << j.dump(2) << "\n";
    return kExitOk;
  }
  out << fmt::format("metric {} ({}, dim {})\n", p.metric, kind_name(m.kind()), m.dim());
  print_vector(out, "x", x);
  print_vector(out, "y", y);
  out << "F^2 = " << num(f2) << "\n";
  print_matrix(out, "g", t.g);
  print_matrix(out, "h", t.h);
  print_matrix(out, "g^-1", t.g_inv);
  if (blocks) print_matrix(out, "closed-form blocks of h", blocks->assembled());
  if (inverse) print_matrix(out, "closed-form inverse of h", inverse->assembled());
  if (!inverse_error.empty()) out << "closed-form inverse unavailable: " << inverse_error << "\n";
  return kExitOk;
}

int cmd_curvature(const Common& c, const PointArgs& p, bool fd, std::ostream& out) {
  const auto scene = load_scene(c.scene_path);
  const auto m = lookup(scene, p.metric);
  const auto x = vector_arg(p.x, "--x", m.dim());
  const auto y = vector_arg(p.y, "--y", m.dim());
  check_point(m, x, y);
  CurvatureOptions options;
  if (fd) options.mode = RicciTensorMode::FiniteDifference;
  const auto r = curvature_report(m, x, y, options);
  if (c.json) {
    out << json{{"metric", p.metric}, {"x", x}, {"y", y}, {"f_squared", r.f_squared},
                {"g", to_json(r.g)}, {"g_inv", to_json(r.g_inv)}, {"spray", to_json(r.spray)},
                {"riemann", to_json(r.riemann)}, {"ric", r.ric}, {"ric_tensor", to_json(r.ric_tensor)},
                {"ricci_tensor_mode", fd ? "finite-difference" : "jet"}}
               .dump(2)
        << "\n";
    return kExitOk;
  }
  out << fmt::format("metric {} ({}, dim {})\n", p.metric, kind_name(m.kind()), m.dim());
  print_vector(out, "x", x);
  print_vector(out, "y", y);
  out << "F^2 = " << num(r.f_squared) << "\n";
  print_vector(out, "G", r.spray);
  print_matrix(out, "R^i_k", r.riemann);
  out << "Ric = " << num(r.ric) << "\n";
  print_matrix(out, fd ? "Ric_ij (finite differences)" : "Ric_ij", r.ric_tensor);
  return kExitOk;
}

int cmd_einstein(const Common& c, const std::string& metric, const std::string& x_text, int samples,
                 std::optional<std::uint64_t> seed_flag, std::ostream& out) {
  const auto scene = load_scene(c.scene_path);
  const auto m = lookup(scene, metric);
  const auto x = vector_arg(x_text, "--x", m.dim());
  if (samples < 8) throw InputError("--samples: at least 8 directions are required");
  const auto seed = pick_seed(seed_flag, scene);
  const auto dirs = sample_directions(m, x, samples, seed, scene.sampling.y_sphere_radius);
  const auto d = einstein_diagnostics(m, x, dirs);
  if (c.json) {
    json per = json::array();
    for (const auto& s : d.samples) per.push_back({{"y", s.y}, {"f_squared", s.f_squared}, {"ric", s.ric}, {"lambda", s.lambda}});
    out << json{{"metric", metric}, {"x", x}, {"seed", seed}, {"dim", d.dim}, {"ric", d.ric},
                {"lambda_hat", d.lambda_hat}, {"lambda_hat_unnormalized", d.lambda_hat_unnormalized},
                {"tensor_residual", d.tensor_residual}, {"isotropy_spread", d.isotropy_spread},
                {"flatness", d.flatness}, {"verdict", to_string(d.verdict)}, {"samples", per}}
               .dump(2)
        << "\n";
    return kExitOk;
  }
  out << fmt::format("metric {} ({}, dim {}), {} directions, seed {}\n", metric, kind_name(m.kind()), m.dim(),
                     dirs.size(), seed);
  print_vector(out, "x", x);
  out << "Ric (first direction)     = " << num(d.ric) << "\n";
  out << "lambda_hat                = " << num(d.lambda_hat) << "\n";
  out << "lambda_hat (Ric/F^2)      = " << num(d.lambda_hat_unnormalized) << "\n";
  out << "isotropy spread           = " << num(d.isotropy_spread) << "\n";
  out << "tensor residual           = " << num(d.tensor_residual) << "\n";
  out << "max|Ric| / max F^2        = " << num(d.flatness) << "\n";
  out << "verdict                   = " << to_string(d.verdict) << "\n";
  return kExitOk;
}

struct GeodesicArgs {
  std::string metric;
  std::string x0;
  std::string y0;
  double t_max = 0.0;
  double dt = 0.0;
  std::string out_path;
};

int cmd_geodesic(const Common& c, const GeodesicArgs& g, std::ostream& out) {
  const auto scene = load_scene(c.scene_path);
  const auto m = lookup(scene, g.metric);
  const auto x0 = vector_arg(g.x0, "--x0", m.dim());
  const auto y0 = vector_arg(g.y0, "--y0", m.dim());
  if (!(g.dt > 0.0)) throw InputError("--dt: must be positive");
  if (!(g.t_max >= g.dt)) throw InputError("--t-max: must be at least --dt");
  if (auto why = m.domain_violation(x0, y0)) throw InputError("--x0/--y0: outside the metric's domain: " + *why);
  const auto trace = integrate_geodesic(m, x0, y0, g.t_max, g.dt);
  std::ofstream file(g.out_path);
  if (!file) throw InputError("--out: cannot write '" + g.out_path + "'");
  write_trace_csv(trace, file);
  const auto& last = trace.final_state();
  if (c.json) {
    json j = {{"metric", g.metric}, {"steps", trace.times.size() - 1}, {"t_end", trace.times.back()},
              {"x_end", last.x}, {"y_end", last.y}, {"max_speed_drift", trace.max_speed_drift},
              {"completed", trace.completed()}, {"out", g.out_path}};
    if (trace.stopped_early) j["stopped_early"] = *trace.stopped_early;
    out << j.dump(2) << "\n";
  } else {
    out << fmt::format("metric {}: {} steps to t = {}\n", g.metric, trace.times.size() - 1, num(trace.times.back()));
    print_vector(out, "x(end)", last.x);
    print_vector(out, "y(end)", last.y);
    out << "max speed drift = " << num(trace.max_speed_drift) << "\n";
    if (trace.stopped_early) out << "stopped early: " << *trace.stopped_early << "\n";
    out << "trace written to " << g.out_path << "\n";
  }
  return trace.completed() ? kExitOk : kExitCheckFailed;
}

int cmd_verify(const Common& c, std::optional<std::uint64_t> seed_flag, std::ostream& out) {
  const auto scene = load_scene(c.scene_path);
  const auto seed = pick_seed(seed_flag, scene);
  const auto report = run_all(scene, seed);
  if (c.json) {
    out << report_json(report) << "\n";
  } else {
    out << fmt::format("seed {}\n", seed);
    for (const auto& check : report.checks) {
      int skipped = 0;
      for (const auto& d : check.details) skipped += d.residual ? 0 : 1;
      out << fmt::format("{:<28} {}  samples {:>5}  worst residual {:<24} tolerance {}{}\n", check.id,
                         check.passed() ? "pass" : "FAIL", check.samples, num(check.worst_residual),
                         num(check.tolerance), skipped ? fmt::format("  ({} skipped)", skipped) : "");
    }
    out << (report.passed() ? "all checks passed (numerical evidence consistent with every statement)\n"
                            : "some checks FAILED\n");
  }
  return report.passed() ? kExitOk : kExitCheckFailed;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Finsler geometry engine: metrics, curvature, geodesics and theorem checks"};
  app.require_subcommand(1);
  Common common;
  std::optional<std::uint64_t> seed;
  PointArgs point;
  GeodesicArgs geo;
  bool fd = false;
  int samples = 8;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("scene", common.scene_path, "Scene JSON file")->required();
    sub->add_flag("--json", common.json, "Structured JSON output");
  };
  auto* validate = app.add_subcommand("validate", "Metric and product-function validation report");
  add_common(validate);
  validate->add_option("--seed", seed, "Sampling seed (default: scene seed, else 0)");

  auto* tensor = app.add_subcommand("tensor", "Fundamental tensor g, h, g^-1 and product closed forms");
  add_common(tensor);
  tensor->add_option("--metric", point.metric, "Metric or product name")->required();
  tensor->add_option("--x", point.x, "Base point, comma separated")->required();
  tensor->add_option("--y", point.y, "Fiber vector, comma separated")->required();

  auto* curvature = app.add_subcommand("curvature", "Spray, Riemann curvature, Ric and Ric_ij");
  add_common(curvature);
  curvature->add_option("--metric", point.metric, "Metric or product name")->required();
  curvature->add_option("--x", point.x, "Base point, comma separated")->required();
  curvature->add_option("--y", point.y, "Fiber vector, comma separated")->required();
  curvature->add_flag("--fd", fd, "Ricci tensor by finite differences of Ric");

  auto* einstein = app.add_subcommand("einstein", "Einstein diagnostics at a base point");
  add_common(einstein);
  einstein->add_option("--metric", point.metric, "Metric or product name")->required();
  einstein->add_option("--x", point.x, "Base point, comma separated")->required();
  einstein->add_option("--samples", samples, "Number of fiber directions (>= 8)");
  einstein->add_option("--seed", seed, "Sampling seed (default: scene seed, else 0)");

  auto* geodesic = app.add_subcommand("geodesic", "Integrate a geodesic and write its trace CSV");
  add_common(geodesic);
  geodesic->add_option("--metric", geo.metric, "Metric or product name")->required();
  geodesic->add_option("--x0", geo.x0, "Initial point, comma separated")->required();
  geodesic->add_option("--y0", geo.y0, "Initial velocity, comma separated")->required();
  geodesic->add_option("--t-max", geo.t_max, "Final time")->required();
  geodesic->add_option("--dt", geo.dt, "RK4 step")->required();
  geodesic->add_option("--out", geo.out_path, "Trace CSV path")->required();

  auto* verify = app.add_subcommand("verify", "Run every theorem check over the scene");
  add_common(verify);
  verify->add_option("--seed", seed, "Sampling seed (default: scene seed, else 0)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (*validate) return cmd_validate(common, seed, out);
    if (*tensor) return cmd_tensor(common, point, out);
    if (*curvature) return cmd_curvature(common, point, fd, out);
    if (*einstein) return cmd_einstein(common, point.metric, point.x, samples, seed, out);
    if (*geodesic) return cmd_geodesic(common, geo, out);
    if (*verify) return cmd_verify(common, seed, out);
  } catch (const SceneError& e) {
    err << "error: scene: " << e.what() << "\n";
    return kExitInputError;
  } catch (const SceneValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const DomainError& e) {
    err << "error: domain: " << e.what() << "\n";
    return kExitInputError;
  } catch (const SingularMatrix& e) {
    err << "error: singular fundamental tensor: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace finsler::cli
