#include "finsler/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "finsler/errors.hpp"
#include "finsler/sampling.hpp"

namespace finsler {

namespace {

void require_point(const Metric& m, std::span<const double> x, std::span<const double> y) {
  if (static_cast<int>(x.size()) != m.dim() || static_cast<int>(y.size()) != m.dim()) {
    throw std::invalid_argument("point has wrong dimension");
  }
  if (std::all_of(y.begin(), y.end(), [](double c) { return c == 0.0; })) {
    throw DomainError("fiber vector must be nonzero");
  }
}

}  // namespace

std::vector<Jet> spray_expansion(const Metric& m, std::span<const double> x,
                                 std::span<const double> y, int order) {
  require_point(m, x, y);
  if (order + 2 > kMaxJetOrder) {
    throw OrderExceeded("spray expansion of order " + std::to_string(order) + " needs F^2 to order " +
                        std::to_string(order + 2));
  }
  const int n = m.dim();
  const auto n_ = static_cast<std::size_t>(n);
  const auto p = phase_point(x, y);
  const Jet f2 = expand(m.f_squared_field(), p, order + 2);
  const auto space = JetSpace::get(2 * n, order);

  std::vector<Jet> fy;
  fy.reserve(n_);
  for (int l = 0; l < n; ++l) fy.push_back(f2.derivative(n + l));

  std::vector<Jet> yvar;
  yvar.reserve(n_);
  for (int k = 0; k < n; ++k) yvar.push_back(Jet::variable(space, n + k, y[static_cast<std::size_t>(k)]));

  std::vector<Jet> g;
  g.reserve(n_ * n_);
  for (int l = 0; l < n; ++l) {
    for (int k = 0; k < n; ++k) {
      if (k < l) {
        g.push_back(g[static_cast<std::size_t>(k) * n_ + static_cast<std::size_t>(l)]);
      } else {
        g.push_back(0.5 * fy[static_cast<std::size_t>(l)].derivative(n + k));
      }
    }
  }

  std::vector<Jet> rhs;
  rhs.reserve(n_);
  for (int l = 0; l < n; ++l) {
    Jet a = -f2.derivative(l).truncated(order);
    for (int k = 0; k < n; ++k) {
      a += yvar[static_cast<std::size_t>(k)] * fy[static_cast<std::size_t>(l)].derivative(k);
    }
    rhs.push_back(std::move(a));
  }

  auto spray = solve(std::move(g), std::move(rhs));
  for (auto& gi : spray) gi *= 0.25;
  return spray;
}

std::vector<Jet> riemann_expansion(std::span<const Jet> spray, std::span<const double> y) {
  const auto n_ = spray.size();
  const int n = static_cast<int>(n_);
  if (y.size() != n_) throw std::invalid_argument("spray and y dimensions differ");
  const int q = spray[0].order() - 2;
  if (q < 0) throw OrderExceeded("Riemann curvature needs spray jets of order >= 2");

  // dG^i/dy^j at order q + 1.
  std::vector<Jet> gy;
  gy.reserve(n_ * n_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (int j = 0; j < n; ++j) gy.push_back(spray[i].derivative(n + j));
  }
  auto dy = [&](std::size_t i, std::size_t j) -> const Jet& { return gy[i * n_ + j]; };

  const auto space = JetSpace::get(2 * n, q);
  std::vector<Jet> yvar;
  for (int j = 0; j < n; ++j) yvar.push_back(Jet::variable(space, n + j, y[static_cast<std::size_t>(j)]));

  std::vector<Jet> r;
  r.reserve(n_ * n_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t k = 0; k < n_; ++k) {
      Jet rik = 2.0 * spray[i].derivative(static_cast<int>(k)).truncated(q);
      const Jet& gik = dy(i, k);
      for (std::size_t j = 0; j < n_; ++j) {
        rik -= yvar[j] * gik.derivative(static_cast<int>(j));
        rik += 2.0 * (spray[j].truncated(q) * gik.derivative(n + static_cast<int>(j)));
        rik -= dy(i, j).truncated(q) * dy(j, k).truncated(q);
      }
      r.push_back(std::move(rik));
    }
  }
  return r;
}

SprayCoefficients spray_coefficients(const Metric& m, std::span<const double> x,
                                     std::span<const double> y) {
  const auto jets = spray_expansion(m, x, y, 0);
  SprayCoefficients s{Vector(m.dim())};
  for (int i = 0; i < m.dim(); ++i) s.g(i) = jets[static_cast<std::size_t>(i)].value();
  return s;
}

RiemannCurvature riemann_curvature(const Metric& m, std::span<const double> x,
                                   std::span<const double> y) {
  const int n = m.dim();
  const auto r = riemann_expansion(spray_expansion(m, x, y, 2), y);
  RiemannCurvature out{Matrix(n, n)};
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) out.r(i, k) = r[static_cast<std::size_t>(i * n + k)].value();
  }
  return out;
}

double ricci_scalar(const Metric& m, std::span<const double> x, std::span<const double> y) {
  return riemann_curvature(m, x, y).r.trace();
}

namespace {

// Ric as an order-2 jet in the phase variables.
Jet ricci_expansion(const Metric& m, std::span<const double> x, std::span<const double> y) {
  const int n = m.dim();
  const auto r = riemann_expansion(spray_expansion(m, x, y, 4), y);
  Jet ric = r[0];
  for (int i = 1; i < n; ++i) ric += r[static_cast<std::size_t>(i * n + i)];
  return ric;
}

Matrix ricci_tensor_from(const Jet& ric, int n) {
  Matrix t(n, n);
  const auto zero = MultiIndex::zero(2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      t(i, j) = t(j, i) = 0.5 * partial(ric, zero.with_added(n + i).with_added(n + j));
    }
  }
  return t;
}

Matrix ricci_tensor_fd(const Metric& m, std::span<const double> x, std::span<const double> y,
                       double step) {
  const int n = m.dim();
  const std::vector<double> base(x.begin(), x.end());
  // Only ever evaluated through order-0 jets by fd_partial.
  const ScalarField ric(n, [&m, base](std::span<const Jet> args) {
    std::vector<double> yy;
    for (const auto& a : args) yy.push_back(a.value());
    return Jet(args[0].space_ptr(), ricci_scalar(m, base, yy));
  });
  Matrix t(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const auto idx = MultiIndex::zero(n).with_added(i).with_added(j);
      t(i, j) = t(j, i) = 0.5 * fd_partial(ric, y, idx, step);
    }
  }
  return t;
}

}  // namespace

Matrix ricci_tensor(const Metric& m, std::span<const double> x, std::span<const double> y,
                    const CurvatureOptions& options) {
  if (options.mode == RicciTensorMode::FiniteDifference) {
    require_point(m, x, y);
    return ricci_tensor_fd(m, x, y, options.fd_step);
  }
  if (options.max_order < 6) {
    throw OrderExceeded("the jet Ricci tensor needs order 6; engine is limited to order " +
                        std::to_string(options.max_order));
  }
  return ricci_tensor_from(ricci_expansion(m, x, y), m.dim());
}

CurvatureReport curvature_report(const Metric& m, std::span<const double> x,
                                 std::span<const double> y, const CurvatureOptions& options) {
  const int n = m.dim();
  CurvatureReport rep;
  rep.x.assign(x.begin(), x.end());
  rep.y.assign(y.begin(), y.end());
  rep.f_squared = f_squared(m, x, y);
  const auto t = fundamental_tensor(m, x, y);
  rep.g = t.g;
  rep.g_inv = t.g_inv;

  const bool jet_tensor = options.mode == RicciTensorMode::Jet;
  if (jet_tensor && options.max_order < 6) {
    throw OrderExceeded("the jet Ricci tensor needs order 6; engine is limited to order " +
                        std::to_string(options.max_order));
  }
  const auto spray = spray_expansion(m, x, y, jet_tensor ? 4 : 2);
  rep.spray = Vector(n);
  for (int i = 0; i < n; ++i) rep.spray(i) = spray[static_cast<std::size_t>(i)].value();
  const auto r = riemann_expansion(spray, y);
  rep.riemann = Matrix(n, n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) rep.riemann(i, k) = r[static_cast<std::size_t>(i * n + k)].value();
  }
  rep.ric = rep.riemann.trace();
  if (jet_tensor) {
    Jet ric = r[0];
    for (int i = 1; i < n; ++i) ric += r[static_cast<std::size_t>(i * n + i)];
    rep.ric_tensor = ricci_tensor_from(ric, n);
  } else {
    rep.ric_tensor = ricci_tensor_fd(m, x, y, options.fd_step);
  }
  return rep;
}

std::string to_string(EinsteinVerdict v) {
  switch (v) {
    case EinsteinVerdict::Einstein: return "einstein";
    case EinsteinVerdict::RicciFlat: return "ricci-flat";
    case EinsteinVerdict::NotEinstein: return "not-einstein";
  }
  return "?";
}

namespace {

bool parallel(std::span<const double> a, std::span<const double> b) {
  double ab = 0.0;
  double aa = 0.0;
  double bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return std::abs(ab) >= (1.0 - 1e-9) * std::sqrt(aa * bb);
}

}  // namespace

EinsteinDiagnostics einstein_diagnostics(const Metric& m, std::span<const double> x,
                                         std::span<const std::vector<double>> y_samples,
                                         const EinsteinTolerances& tolerances,
                                         const CurvatureOptions& options) {
  constexpr std::size_t kMinSamples = 8;
  if (y_samples.size() < kMinSamples) {
    throw std::invalid_argument("Einstein diagnostics need at least 8 sample directions");
  }
  const int n = m.dim();
  for (std::size_t i = 0; i < y_samples.size(); ++i) {
    if (static_cast<int>(y_samples[i].size()) != n) throw std::invalid_argument("direction has wrong dimension");
    for (std::size_t j = 0; j < i; ++j) {
      if (n > 1 && parallel(y_samples[i], y_samples[j])) {
        throw std::invalid_argument("sample directions must be pairwise non-parallel");
      }
    }
  }

  EinsteinDiagnostics d;
  d.dim = n;
  std::vector<Matrix> ric_tensors;
  std::vector<Matrix> metrics;
  double max_abs_ric = 0.0;
  double max_f2 = 0.0;
  double sum_lambda = 0.0;
  double sum_unnormalized = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& y : y_samples) {
    const auto rep = curvature_report(m, x, y, options);
    EinsteinSample s;
    s.y = y;
    s.f_squared = rep.f_squared;
    s.ric = rep.ric;
    const double unnormalized = rep.ric / rep.f_squared;
    s.lambda = n > 1 ? unnormalized / (n - 1) : 0.0;
    sum_unnormalized += n > 1 ? unnormalized : 0.0;
    sum_lambda += s.lambda;
    lo = std::min(lo, s.lambda);
    hi = std::max(hi, s.lambda);
    max_abs_ric = std::max(max_abs_ric, std::abs(rep.ric));
    max_f2 = std::max(max_f2, rep.f_squared);
    ric_tensors.push_back(rep.ric_tensor);
    metrics.push_back(rep.g);
    d.samples.push_back(std::move(s));
  }
  const double count = static_cast<double>(y_samples.size());
  d.ric = d.samples.front().ric;
  d.lambda_hat = sum_lambda / count;
  d.lambda_hat_unnormalized = sum_unnormalized / count;
  d.isotropy_spread = hi - lo;
  d.flatness = max_abs_ric / max_f2;
  for (std::size_t s = 0; s < ric_tensors.size(); ++s) {
    const Matrix diff = ric_tensors[s] - (n - 1) * d.lambda_hat * metrics[s];
    d.tensor_residual = std::max(d.tensor_residual, max_abs(diff) / max_abs(metrics[s]));
  }
  if (d.flatness < tolerances.flat) {
    d.verdict = EinsteinVerdict::RicciFlat;
  } else if (d.isotropy_spread < tolerances.spread && d.tensor_residual < tolerances.residual) {
    d.verdict = EinsteinVerdict::Einstein;
  } else {
    d.verdict = EinsteinVerdict::NotEinstein;
  }
  return d;
}

std::vector<std::vector<double>> sample_directions(const Metric& m, std::span<const double> x,
                                                   int count, std::uint64_t seed, double radius) {
  std::vector<std::vector<double>> out;
  std::uint64_t draw = 0;
  constexpr int kMaxDraws = 100000;
  while (static_cast<int>(out.size()) < count) {
    if (draw > kMaxDraws) throw DomainError("could not find enough valid sample directions");
    Sampler rng(derive_seed(seed, draw++));
    auto y = rng.on_sphere(m.dim(), radius);
    if (m.domain_violation(x, y)) continue;
    const bool dup = std::any_of(out.begin(), out.end(), [&](const auto& o) { return parallel(o, y); });
    if (dup && m.dim() > 1) continue;
    out.push_back(std::move(y));
  }
  return out;
}

}  // namespace finsler
