#include "finsler/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include <json.hpp>

#include "finsler/curvature.hpp"
#include "finsler/errors.hpp"
#include "finsler/product.hpp"

namespace finsler {

namespace {

struct Split {
  std::vector<double> x_left, x_right, y_left, y_right;
};

const ProductParts& parts_of(const Metric& m) {
  const auto* p = m.product();
  if (!p) throw std::invalid_argument("theorem checks need a Minkowskian product metric");
  return *p;
}

Split split(const ProductParts& parts, std::span<const double> x, std::span<const double> y) {
  const auto m = static_cast<std::size_t>(parts.left->dim());
  return {{x.begin(), x.begin() + static_cast<std::ptrdiff_t>(m)},
          {x.begin() + static_cast<std::ptrdiff_t>(m), x.end()},
          {y.begin(), y.begin() + static_cast<std::ptrdiff_t>(m)},
          {y.begin() + static_cast<std::ptrdiff_t>(m), y.end()}};
}

// FNV-1a, so sample streams depend on names rather than scene order.
std::uint64_t stream_id(std::string_view id, std::string_view label) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  };
  mix(id);
  mix("/");
  mix(label);
  return h;
}

TheoremCheck start(std::string_view id, const CheckOptions& options) {
  TheoremCheck check;
  check.id = std::string(id);
  check.tolerance = options.tolerance > 0.0 ? options.tolerance : default_tolerances().at(check.id);
  return check;
}

void record(TheoremCheck& check, std::string_view label, int sample, double residual, std::string note = {}) {
  ++check.samples;
  // NaN must never pass.
  check.worst_residual = std::isnan(residual) ? INFINITY : std::max(check.worst_residual, residual);
  check.details.push_back({std::string(label), sample, residual, std::move(note)});
}

void skip(TheoremCheck& check, std::string_view label, int sample, const std::exception& e) {
  check.details.push_back({std::string(label), sample, std::nullopt, std::string("skipped: ") + e.what()});
}

// Runs fn(x, y) -> residual over seeded valid samples of the product.
template <class Fn>
TheoremCheck sampled_check(std::string_view id, const Metric& product, std::string_view label,
                           const CheckOptions& options, Fn&& fn) {
  auto check = start(id, options);
  Sampler rng(derive_seed(options.seed, stream_id(id, label)));
  const SamplingOptions sampling{options.y_radius, 1000};
  for (int s = 0; s < options.samples; ++s) {
    try {
      const auto [x, y] = sample_point(product, rng, sampling);
      record(check, label, s, fn(x, y));
    } catch (const DomainError& e) {
      skip(check, label, s, e);
    } catch (const SingularMatrix& e) {
      skip(check, label, s, e);
    }
  }
  return check;
}

Matrix riemann_of(const Metric& m, std::span<const double> x, std::span<const double> y) {
  return riemann_curvature(m, x, y).r;
}

}  // namespace

TheoremCheck check_hessian_blocks(const Metric& product, std::string_view label, const CheckOptions& options) {
  parts_of(product);
  return sampled_check(kCheckHessianBlocks, product, label, options, [&](const auto& x, const auto& y) {
    const Matrix h = y_hessian(product, x, y);
    const Matrix blocks = closed_form_blocks(product, x, y).assembled();
    return max_abs(blocks - h) / max_abs(h);
  });
}

TheoremCheck check_inverse_blocks(const Metric& product, std::string_view label, const CheckOptions& options) {
  parts_of(product);
  return sampled_check(kCheckInverseBlocks, product, label, options, [&](const auto& x, const auto& y) {
    const Matrix h = y_hessian(product, x, y);
    const Matrix inv = closed_form_inverse(product, x, y).assembled();
    return max_abs(inv * h - Matrix::Identity(h.rows(), h.cols()));
  });
}

TheoremCheck check_spray_split(const Metric& product, std::string_view label, const CheckOptions& options) {
  const auto& parts = parts_of(product);
  return sampled_check(kCheckSpraySplit, product, label, options, [&](const auto& x, const auto& y) {
    const auto s = split(parts, x, y);
    const Vector g = spray_coefficients(product, x, y).g;
    Vector expected(g.size());
    expected << spray_coefficients(*parts.left, s.x_left, s.y_left).g,
        spray_coefficients(*parts.right, s.x_right, s.y_right).g;
    return max_abs(g - expected);
  });
}

TheoremCheck check_block_structure(const Metric& product, std::string_view label, const CheckOptions& options) {
  const auto& parts = parts_of(product);
  const int m = parts.left->dim();
  return sampled_check(kCheckBlockRiemann, product, label, options, [&](const auto& x, const auto& y) {
    const auto s = split(parts, x, y);
    const auto blocks = BlockTensor::split(riemann_of(product, x, y), m);
    const Matrix left = riemann_of(*parts.left, s.x_left, s.y_left);
    const Matrix right = riemann_of(*parts.right, s.x_right, s.y_right);
    const double scale = std::max({1.0, max_abs(left), max_abs(right)});
    const double worst = std::max({max_abs(blocks.ab - left), max_abs(blocks.alpha_beta - right),
                                   max_abs(blocks.a_beta), max_abs(blocks.alpha_b)});
    return worst / scale;
  });
}

TheoremCheck check_ricci_additivity(const Metric& product, std::string_view label, const CheckOptions& options) {
  const auto& parts = parts_of(product);
  return sampled_check(kCheckRicciAdditivity, product, label, options, [&](const auto& x, const auto& y) {
    const auto s = split(parts, x, y);
    const double ric = ricci_scalar(product, x, y);
    const double sum = ricci_scalar(*parts.left, s.x_left, s.y_left) + ricci_scalar(*parts.right, s.x_right, s.y_right);
    return std::abs(ric - sum) / std::max(1.0, std::abs(ric));
  });
}

namespace {

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* flat_word(bool flat) { return flat ? "ricci-flat" : "not ricci-flat"; }

}  // namespace

TheoremCheck check_ricci_flat_iff(const Metric& product, std::string_view label, const CheckOptions& options) {
  const auto& parts = parts_of(product);
  auto check = start(kCheckRicciFlatIff, options);
  Sampler rng(derive_seed(options.seed, stream_id(kCheckRicciFlatIff, label)));
  const SamplingOptions sampling{options.y_radius, 1000};
  const double flat_tol = EinsteinTolerances{}.flat;

  struct Side {
    double max_ric = 0.0;
    double max_f2 = 0.0;
    bool flat() const { return max_ric / max_f2 < EinsteinTolerances{}.flat; }
    void add(double ric, double f2) {
      max_ric = std::max(max_ric, std::abs(ric));
      max_f2 = std::max(max_f2, f2);
    }
  } prod, left, right;

  int evaluated = 0;
  for (int s = 0; s < options.samples; ++s) {
    try {
      const auto [x, y] = sample_point(product, rng, sampling);
      const auto sp = split(parts, x, y);
      const double ric = ricci_scalar(product, x, y);
      const double ric_l = ricci_scalar(*parts.left, sp.x_left, sp.y_left);
      const double ric_r = ricci_scalar(*parts.right, sp.x_right, sp.y_right);
      const double f2 = f_squared(product, x, y);
      const double f2_l = f_squared(*parts.left, sp.x_left, sp.y_left);
      const double f2_r = f_squared(*parts.right, sp.x_right, sp.y_right);
      prod.add(ric, f2);
      left.add(ric_l, f2_l);
      right.add(ric_r, f2_r);
      // Pointwise biconditional, same flatness threshold on each side.
      const bool pf = std::abs(ric) / f2 < flat_tol;
      const bool lf = std::abs(ric_l) / f2_l < flat_tol;
      const bool rf = std::abs(ric_r) / f2_r < flat_tol;
      const bool consistent = pf == (lf && rf);
      record(check, label, s, consistent ? 0.0 : 1.0,
             "Ric/F^2 = " + fmt17(ric / f2) + ", left " + fmt17(ric_l / f2_l) + ", right " + fmt17(ric_r / f2_r));
      ++evaluated;
    } catch (const DomainError& e) {
      skip(check, label, s, e);
    } catch (const SingularMatrix& e) {
      skip(check, label, s, e);
    }
  }
  if (evaluated > 0) {
    const bool consistent = prod.flat() == (left.flat() && right.flat());
    check.worst_residual = std::max(check.worst_residual, consistent ? 0.0 : 1.0);
    check.details.push_back({std::string(label), -1, consistent ? 0.0 : 1.0,
                             std::string(consistent ? "consistent with" : "inconsistent with") +
                                 " the biconditional: product " + flat_word(prod.flat()) + ", left " +
                                 flat_word(left.flat()) + ", right " + flat_word(right.flat())});
  }
  return check;
}

TheoremCheck check_einstein_dichotomy(const Metric& product, std::string_view label,
                                      const CheckOptions& options) {
  const auto& parts = parts_of(product);
  auto check = start(kCheckEinsteinDichotomy, options);
  const auto base_seed = derive_seed(options.seed, stream_id(kCheckEinsteinDichotomy, label));
  Sampler rng(base_seed);
  const SamplingOptions sampling{options.y_radius, 1000};
  for (int s = 0; s < options.einstein_points; ++s) {
    try {
      const auto [x, y0] = sample_point(product, rng, sampling);
      const auto dirs = sample_directions(product, x, options.einstein_directions,
                                          derive_seed(base_seed, 3 * static_cast<std::uint64_t>(s)), options.y_radius);
      const auto d = einstein_diagnostics(product, x, dirs);
      const auto sp = split(parts, x, y0);

      auto factor = [&](const Metric& f, const std::vector<double>& xf, std::uint64_t k) {
        const auto fd = sample_directions(f, xf, options.einstein_directions,
                                          derive_seed(base_seed, 3 * static_cast<std::uint64_t>(s) + k),
                                          options.y_radius);
        return einstein_diagnostics(f, xf, fd);
      };
      const auto dl = factor(*parts.left, sp.x_left, 1);
      const auto dr = factor(*parts.right, sp.x_right, 2);

      const std::string summary = "product " + to_string(d.verdict) + " (Ric/F^2 = " +
                                  fmt17(d.lambda_hat_unnormalized) + ", spread " + fmt17(d.isotropy_spread) +
                                  ", tensor residual " + fmt17(d.tensor_residual) + "); left " +
                                  to_string(dl.verdict) + " (" + fmt17(dl.lambda_hat_unnormalized) + "), right " +
                                  to_string(dr.verdict) + " (" + fmt17(dr.lambda_hat_unnormalized) + ")";
      switch (d.verdict) {
        case EinsteinVerdict::NotEinstein:
          record(check, label, s, 0.0, "vacuous: " + summary);
          break;
        case EinsteinVerdict::RicciFlat: {
          const bool ok = dl.verdict == EinsteinVerdict::RicciFlat && dr.verdict == EinsteinVerdict::RicciFlat;
          record(check, label, s, ok ? 0.0 : 1.0, (ok ? "factors ricci-flat: " : "factor not ricci-flat: ") + summary);
          break;
        }
        case EinsteinVerdict::Einstein: {
          // Linearity probe at the (K, H) of every sampled direction.
          double worst_fkh = 0.0;
          double fk = 0.0;
          double fh = 0.0;
          for (const auto& y : dirs) {
            const auto q = factor_quantities(product, x, y);
            worst_fkh = std::max(worst_fkh, std::abs(q.f.fst));
            fk = q.f.fs;
            fh = q.f.ft;
          }
          const bool factors_einstein =
              dl.verdict != EinsteinVerdict::NotEinstein && dr.verdict != EinsteinVerdict::NotEinstein;
          const double lam = d.lambda_hat_unnormalized;
          const double mismatch = std::max(std::abs(dl.lambda_hat_unnormalized - fk * lam),
                                           std::abs(dr.lambda_hat_unnormalized - fh * lam));
          std::string note = "max |f_KH| = " + fmt17(worst_fkh) + "; " + summary;
          if (worst_fkh >= kLinearityTolerance) {
            record(check, label, s, 1.0, "f not linear: " + note);
          } else if (!factors_einstein) {
            record(check, label, s, 1.0, "factor not einstein: " + note);
          } else {
            record(check, label, s, mismatch, note);
          }
          break;
        }
      }
    } catch (const DomainError& e) {
      skip(check, label, s, e);
    } catch (const SingularMatrix& e) {
      skip(check, label, s, e);
    }
  }
  return check;
}

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed(); });
}

namespace {

std::string first_failure(const ValidationReport& r) {
  for (const auto& e : r.entries) {
    if (!e.passed) {
      return e.check + " at sample " + std::to_string(e.sample) + " (value " + fmt17(e.value) + ")" +
             (e.detail.empty() ? "" : ": " + e.detail);
    }
  }
  return "";
}

}  // namespace

VerifyReport run_all(const Scene& scene, std::uint64_t seed) {
  std::vector<std::string> names;
  for (const auto& [name, spec] : scene.metrics) names.push_back(name);
  for (const auto& p : scene.products) names.push_back(p.name);

  SamplingOptions sampling;
  sampling.y_radius = scene.sampling.y_sphere_radius;
  std::string failures;
  for (const auto& name : names) {
    const auto report = validate_metric(scene.metric(name), scene.sampling.count,
                                        derive_seed(seed, stream_id("validate", name)), sampling);
    if (!report.passed()) failures += "\n  " + name + ": " + first_failure(report);
  }
  if (!failures.empty()) throw SceneValidationError("scene validation failed:" + failures);

  using CheckFn = TheoremCheck (*)(const Metric&, std::string_view, const CheckOptions&);
  const std::vector<std::pair<std::string_view, CheckFn>> table = {
      {kCheckBlockRiemann, check_block_structure},     {kCheckRicciFlatIff, check_ricci_flat_iff},
      {kCheckEinsteinDichotomy, check_einstein_dichotomy}, {kCheckHessianBlocks, check_hessian_blocks},
      {kCheckInverseBlocks, check_inverse_blocks},     {kCheckSpraySplit, check_spray_split},
      {kCheckRicciAdditivity, check_ricci_additivity},
  };

  VerifyReport report;
  report.seed = seed;
  for (const auto& [id, fn] : table) {
    TheoremCheck merged;
    merged.id = std::string(id);
    merged.tolerance = scene.tolerance(id);
    for (const auto& p : scene.products) {
      CheckOptions options;
      options.samples = scene.sampling.count;
      options.seed = seed;
      options.tolerance = merged.tolerance;
      options.y_radius = scene.sampling.y_sphere_radius;
      options.einstein_points = scene.sampling.einstein_points;
      options.einstein_directions = scene.sampling.einstein_directions;
      auto c = fn(scene.metric(p.name), p.name, options);
      merged.samples += c.samples;
      merged.worst_residual = std::max(merged.worst_residual, c.worst_residual);
      std::move(c.details.begin(), c.details.end(), std::back_inserter(merged.details));
    }
    report.checks.push_back(std::move(merged));
  }
  std::sort(report.checks.begin(), report.checks.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return report;
}

std::string report_json(const VerifyReport& report, int indent) {
  using nlohmann::json;
  json checks = json::array();
  for (const auto& c : report.checks) {
    json details = json::array();
    for (const auto& d : c.details) {
      json entry = {{"product", d.product}};
      if (d.sample >= 0) entry["sample"] = d.sample;
      entry["residual"] = d.residual ? json(*d.residual) : json(nullptr);
      if (!d.note.empty()) entry["note"] = d.note;
      details.push_back(std::move(entry));
    }
    checks.push_back({{"check_id", c.id},
                      {"verdict", c.passed() ? "pass" : "fail"},
                      {"samples", c.samples},
                      {"worst_residual", c.worst_residual},
                      {"tolerance", c.tolerance},
                      {"details", std::move(details)}});
  }
  json root = {{"seed", report.seed}, {"passed", report.passed()}, {"checks", std::move(checks)}};
  return root.dump(indent);
}

}  // namespace finsler
