// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "finsler/curvature.hpp"
#include "finsler/geodesic.hpp"
#include "finsler/product.hpp"
#include "finsler/verify.hpp"
#include "parser_corpus.hpp"
#include "random_fields.hpp"
#include "zoo.hpp"

using namespace finsler;

namespace {

struct Outcome {
  bool passed;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double vec_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

CheckOptions opts(int samples, double tolerance) {
  CheckOptions o;
  o.samples = samples;
  o.tolerance = tolerance;
  return o;
}

std::vector<zoo::Named> products_for_checks() {
  auto out = zoo::test_matrix();
  out.push_back({"sphere x sphere linear(1,1)", zoo::product(zoo::sphere(), zoo::sphere(), ProductFunction::linear(1, 1))});
  out.push_back({"sphere x sphere ratio_square", zoo::product(zoo::sphere(), zoo::sphere(), ProductFunction::ratio_square())});
  return out;
}

Outcome harness_check(TheoremCheck (*fn)(const Metric&, std::string_view, const CheckOptions&), int samples,
                      double tolerance) {
  double worst = 0.0;
  int skipped = 0;
  int total = 0;
  for (const auto& entry : products_for_checks()) {
    const auto c = fn(zoo::make(entry.spec), entry.name, opts(samples, tolerance));
    worst = std::max(worst, c.worst_residual);
    total += c.samples;
    for (const auto& d : c.details) skipped += d.residual.has_value() ? 0 : 1;
  }
  return {worst < tolerance && skipped == 0,
          "worst " + num(worst) + " < " + num(tolerance) + " over " + std::to_string(total) + " samples, " +
              std::to_string(skipped) + " skipped"};
}

Outcome hessian_blocks() {
  const auto start = Clock::now();
  double worst = 0.0;
  for (const auto& entry : zoo::test_matrix()) {
    const auto m = zoo::make(entry.spec);
    Sampler rng(derive_seed(1, entry.name.size()));
    for (int k = 0; k < 100; ++k) {
      const auto [x, y] = sample_point(m, rng, {});
      const Matrix h = y_hessian(m, x, y);
      worst = std::max(worst, max_abs(closed_form_blocks(m, x, y).assembled() - h) / max_abs(h));
    }
  }
  const double t = seconds_since(start);
  return {worst < 1e-8 && t < 5.0, "worst relative " + num(worst) + " < 1e-08, runtime " + num(t) + " s < 5 s"};
}

Outcome inverse_blocks() {
  double worst = 0.0;
  for (const auto& entry : zoo::test_matrix()) {
    const auto m = zoo::make(entry.spec);
    Sampler rng(derive_seed(2, entry.name.size()));
    for (int k = 0; k < 100; ++k) {
      const auto [x, y] = sample_point(m, rng, {});
      const Matrix h = y_hessian(m, x, y);
      const Matrix inv = closed_form_inverse(m, x, y).assembled();
      worst = std::max(worst, max_abs(inv * h - Matrix::Identity(m.dim(), m.dim())));
    }
  }
  const auto prod = zoo::make(zoo::product(zoo::euclidean(1), zoo::euclidean(1), ProductFunction::ratio_square()));
  const std::vector<double> x{0, 0};
  const std::vector<double> y{1, 1};
  Matrix h(2, 2), hinv(2, 2);
  h << 12, -8, -8, 6;
  hinv << 0.75, 1, 1, 1.5;
  const double fixed = std::max(max_abs(y_hessian(prod, x, y) - h), max_abs(closed_form_inverse(prod, x, y).assembled() - hinv));
  return {worst < 1e-8 && fixed < 1e-8,
          "worst |inv h - I| " + num(worst) + " < 1e-08, fixed point error " + num(fixed)};
}

Outcome ricci_flat_iff() {
  const auto flat = zoo::make(zoo::product(zoo::randers_flat(), zoo::euclidean(2), ProductFunction::ratio_square()));
  const auto flat_lin = zoo::make(zoo::product(zoo::euclidean(2), zoo::euclidean(2), ProductFunction::linear(2, 3)));
  const auto se = zoo::make(zoo::product(zoo::sphere(), zoo::euclidean(2), ProductFunction::linear(1, 1)));
  const auto a = check_ricci_flat_iff(flat, "flat", opts(50, 0.5));
  const auto b = check_ricci_flat_iff(flat_lin, "flat_lin", opts(50, 0.5));
  const auto c = check_ricci_flat_iff(se, "se", opts(50, 0.5));
  auto summary = [](const TheoremCheck& t) { return t.details.back().note; };
  const bool flat_ok = summary(a).find("product ricci-flat, left ricci-flat") != std::string::npos &&
                       summary(b).find("product ricci-flat, left ricci-flat") != std::string::npos;
  const bool se_ok = summary(c).find("product not ricci-flat, left not ricci-flat") != std::string::npos;
  const double worst = std::max({a.worst_residual, b.worst_residual, c.worst_residual});
  return {flat_ok && se_ok && worst == 0.0,
          "flat x flat ricci-flat: " + std::string(flat_ok ? "yes" : "no") + ", sphere x flat non-flat on both sides: " +
              (se_ok ? "yes" : "no") + ", inconsistent samples: " + (worst == 0.0 ? "0" : "some")};
}

Outcome einstein_dichotomy() {
  const std::vector<double> x{1.0, 0.2, 1.3, -0.5};
  const std::vector<double> xl{1.0, 0.2};
  const std::vector<double> xr{1.3, -0.5};
  const auto lin = zoo::make(zoo::product(zoo::sphere(), zoo::sphere(), ProductFunction::linear(1, 1)));
  const auto rsq = zoo::make(zoo::product(zoo::sphere(), zoo::sphere(), ProductFunction::ratio_square()));
  const auto s2 = zoo::make(zoo::sphere());
  const auto dp = einstein_diagnostics(lin, x, sample_directions(lin, x, 8, 1));
  const auto dl = einstein_diagnostics(s2, xl, sample_directions(s2, xl, 8, 2));
  const auto dr = einstein_diagnostics(s2, xr, sample_directions(s2, xr, 8, 3));
  const auto dq = einstein_diagnostics(rsq, x, sample_directions(rsq, x, 8, 4));
  const double err = std::max({std::abs(dp.lambda_hat_unnormalized - 1.0), std::abs(dl.lambda_hat_unnormalized - 1.0),
                               std::abs(dr.lambda_hat_unnormalized - 1.0)});
  const bool lin_ok = dp.verdict == EinsteinVerdict::Einstein && dl.verdict == EinsteinVerdict::Einstein &&
                      dr.verdict == EinsteinVerdict::Einstein && err < 1e-5;
  const double fkh = rsq.product()->f.partials(1.0, 1.0).fst;
  const bool rsq_ok = dq.verdict == EinsteinVerdict::NotEinstein && dq.isotropy_spread > 1e-3 && std::abs(fkh) > 1e-8;
  return {lin_ok && rsq_ok, "linear(1,1): einstein, max |Ric/F^2 - 1| " + num(err) + " < 1e-05; ratio_square: " +
                                to_string(dq.verdict) + ", spread " + num(dq.isotropy_spread) + " > 1e-03"};
}

Outcome riemannian_reduction() {
  const auto s2 = zoo::make(zoo::sphere());
  const std::vector<double> xs{M_PI / 4.0, 0.0};
  const auto ds = einstein_diagnostics(s2, xs, sample_directions(s2, xs, 8, 5));
  double ric_err = 0.0;
  for (const auto& smp : ds.samples) {
    ric_err = std::max(ric_err, max_abs(ricci_tensor(s2, xs, smp.y) - fundamental_tensor(s2, xs, smp.y).g));
  }
  const auto funk = zoo::make(zoo::funk());
  const std::vector<double> xf{0.1, -0.2};
  const auto dirs = sample_directions(funk, xf, 8, 6);
  const auto df = einstein_diagnostics(funk, xf, dirs);
  // Independent pipeline: Ric_ij by finite differences of Ric against (n - 1) lambda g.
  CurvatureOptions fd;
  fd.mode = RicciTensorMode::FiniteDifference;
  double fd_err = 0.0;
  for (const auto& y : dirs) {
    const Matrix g = fundamental_tensor(funk, xf, y).g;
    fd_err = std::max(fd_err, max_abs(ricci_tensor(funk, xf, y, fd) - (-0.25) * g) / max_abs(g));
  }
  const bool ok = std::abs(ds.lambda_hat - 1.0) < 1e-6 && ric_err < 1e-6 && std::abs(df.lambda_hat + 0.25) < 1e-4 &&
                  fd_err < 1e-4;
  return {ok, "sphere lambda " + num(ds.lambda_hat) + ", |Ric_ij - g_ij| " + num(ric_err) + "; Funk lambda " +
                  num(df.lambda_hat) + ", finite-difference Ric_ij vs -g/4 " + num(fd_err)};
}

Outcome geodesics() {
  std::vector<std::string> failures;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };
  const auto e2 = zoo::make(zoo::euclidean(2));
  const auto line = integrate_geodesic(e2, std::vector<double>{0, 0}, std::vector<double>{1, 2}, 1.0, 1e-3);
  expect(vec_dist(line.final_state().x, {1, 2}) < 1e-12 && line.max_speed_drift < 1e-12, "line");

  const auto s2 = zoo::make(zoo::sphere());
  const auto eq = integrate_geodesic(s2, std::vector<double>{M_PI / 2, 0}, std::vector<double>{0, 1}, M_PI, 1e-3);
  expect(vec_dist(eq.final_state().x, {M_PI / 2, M_PI}) < 1e-6 && eq.max_speed_drift < 1e-8, "equator");

  double drift = 0.0;
  for (const auto& entry : zoo::all_metrics()) {
    const auto m = zoo::make(entry.spec);
    Sampler rng(1);
    auto [x, y] = sample_point(m, rng, {});
    const double f = std::sqrt(f_squared(m, x, y));
    for (auto& v : y) v *= 0.5 / f;
    const auto t = integrate_geodesic(m, x, y, 10.0, 1e-3);
    expect(t.completed(), "domain exit on " + entry.name);
    drift = std::max(drift, t.max_speed_drift);
  }
  expect(drift < 1e-6, "speed drift");

  auto end = [&](double dt) {
    return integrate_geodesic(s2, std::vector<double>{1.0, 0.0}, std::vector<double>{0.3, 0.8}, 2.0, dt).final_state().x;
  };
  const auto a = end(0.1), b = end(0.05), c = end(0.025);
  const double ratio = vec_dist(a, b) / vec_dist(b, c);
  expect(ratio >= 12.0 && ratio <= 20.0, "RK4 ratio");

  double proj = 0.0;
  for (const auto& entry : zoo::test_matrix()) {
    const auto m = zoo::make(entry.spec);
    const auto& parts = *m.product();
    const auto k = static_cast<std::ptrdiff_t>(parts.left->dim());
    Sampler rng(2);
    const auto [x, y] = sample_point(m, rng, {});
    const auto t = integrate_geodesic(m, x, y, 1.0, 1e-3).final_state().x;
    const auto tl = integrate_geodesic(*parts.left, std::vector<double>(x.begin(), x.begin() + k),
                                       std::vector<double>(y.begin(), y.begin() + k), 1.0, 1e-3).final_state().x;
    const auto tr = integrate_geodesic(*parts.right, std::vector<double>(x.begin() + k, x.end()),
                                       std::vector<double>(y.begin() + k, y.end()), 1.0, 1e-3).final_state().x;
    proj = std::max({proj, vec_dist(std::vector<double>(t.begin(), t.begin() + k), tl),
                     vec_dist(std::vector<double>(t.begin() + k, t.end()), tr)});
  }
  expect(proj < 1e-6, "product projections");

  std::string detail = "max drift " + num(drift) + ", RK4 ratio " + num(ratio) + ", projection error " + num(proj);
  for (const auto& f : failures) detail += "; failed: " + f;
  return {failures.empty(), detail};
}

Outcome ad_consistency() {
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    Sampler rng(derive_seed(101, static_cast<std::uint64_t>(k)));
    const int vars = 1 + static_cast<int>(rng.uniform() * 3);
    const auto f = random_fields::field(expr::parse(random_fields::generate(rng, vars, 3)), vars);
    std::vector<double> p;
    for (int i = 0; i < vars; ++i) p.push_back(rng.uniform(-1.0, 1.0));
    const Jet j = lift(f, p, 4);
    for (const auto& idx : random_fields::indices(vars, 4)) {
      const double ad = partial(j, idx);
      worst = std::max(worst, std::abs(ad - fd_partial(f, p, idx)) / std::max(1.0, std::abs(ad)));
    }
  }
  int round_trips = 0;
  for (const auto& text : parser_corpus::kCorpus) {
    const auto printed = expr::to_string(expr::parse(text));
    if (expr::parse(printed) == expr::parse(text)) ++round_trips;
  }
  int offsets = 0;
  for (const auto& c : parser_corpus::kMalformed) {
    try {
      (void)expr::parse(c.text);
    } catch (const expr::ParseError& e) {
      if (e.byte_offset() == c.offset) ++offsets;
    }
  }
  const bool ok = worst < 1e-5 && round_trips == 50 && offsets == 10;
  return {ok, "worst jet vs finite difference " + num(worst) + " < 1e-05, round trips " + std::to_string(round_trips) +
                  "/50, exact error offsets " + std::to_string(offsets) + "/10"};
}

Outcome full_verify() {
  auto once = [](std::string& out) {
    const char* argv[] = {"finsler", "verify", FINSLER_DEMO_SCENE, "--json"};
    std::ostringstream o, e;
    const int code = cli::run(4, argv, o, e);
    out = o.str();
    return code;
  };
  std::string first, second;
  const auto start = Clock::now();
  const int code = once(first);
  const double t = seconds_since(start);
  const int code2 = once(second);
  const bool same = first == second;
  return {code == 0 && code2 == 0 && same && t < 60.0,
          "exit " + std::to_string(code) + ", runtime " + num(t) + " s < 60 s, repeat run identical: " +
              (same ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 Hessian block formula", hessian_blocks},
      {"2 inverse block formula", inverse_blocks},
      {"3 spray splitting", [] { return harness_check(check_spray_split, 50, 1e-9); }},
      {"4 Riemann block structure", [] { return harness_check(check_block_structure, 50, 1e-7); }},
      {"5 Ricci additivity", [] { return harness_check(check_ricci_additivity, 50, 1e-7); }},
      {"6 Ricci-flat biconditional", ricci_flat_iff},
      {"7 Einstein dichotomy", einstein_dichotomy},
      {"8 Riemannian reduction and Funk oracle", riemannian_reduction},
      {"9 geodesics", geodesics},
      {"10 AD self-consistency and parser", ad_consistency},
      {"11 full verify suite", full_verify},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o{false, ""};
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s  %-40s %s\n", o.passed ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    failed += o.passed ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
