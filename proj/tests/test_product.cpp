#include <doctest.h>

#include <cmath>

#include "finsler/errors.hpp"
#include "finsler/product.hpp"
#include "zoo.hpp"

using namespace finsler;

namespace {

const std::vector<std::pair<double, double>> kUnit = {{1.0, 1.0}};

bool all_pass(const ValidationReport& r, const std::string& check) {
  for (const auto& e : r.entries) {
    if (e.check == check && !e.passed) return false;
  }
  return true;
}

std::vector<double> concat(const std::vector<double>& a, const std::vector<double>& b) {
  auto out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace

TEST_CASE("product function validation examples") {
  const auto lin = ProductFunction::linear(2, 3);
  const auto p = lin.partials(1, 1);
  CHECK(p.f == 5.0);
  CHECK(p.fs == 2.0);
  CHECK(p.ft == 3.0);
  CHECK(p.delta() == 6.0);
  CHECK(validate_product_function(lin, kUnit).passed());

  const auto st = ProductFunction::custom(expr::parse("s*t"));
  const auto bad = validate_product_function(st, default_product_grid());
  CHECK_FALSE(bad.passed());
  CHECK_FALSE(all_pass(bad, "homogeneity"));

  const auto rsq = ProductFunction::ratio_square();
  const auto q = rsq.partials(1, 1);
  CHECK(q.delta() == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(validate_product_function(rsq, kUnit).passed());
  CHECK(validate_product_function(rsq, default_product_grid()).passed());
}

TEST_CASE("ratio square partials match the symbolic oracle") {
  const auto rsq = ProductFunction::ratio_square();
  for (const auto& [s, t] : default_product_grid()) {
    const auto p = rsq.partials(s, t);
    CHECK(p.f == doctest::Approx(s * s / t).epsilon(1e-14));
    CHECK(p.fs == doctest::Approx(2 * s / t).epsilon(1e-14));
    CHECK(p.ft == doctest::Approx(-s * s / (t * t)).epsilon(1e-14));
    CHECK(p.fss == doctest::Approx(2 / t).epsilon(1e-14));
    CHECK(p.fst == doctest::Approx(-2 * s / (t * t)).epsilon(1e-14));
    CHECK(p.ftt == doctest::Approx(2 * s * s / (t * t * t)).epsilon(1e-14));
    CHECK(p.delta() == doctest::Approx(2 * s * s * s / (t * t * t)).epsilon(1e-13));
  }
}

TEST_CASE("validation reports signs") {
  const auto report = validate_product_function(ProductFunction::ratio_square(), kUnit);
  const auto* ft = report.worst("f_t-nonzero");
  REQUIRE(ft != nullptr);
  CHECK(ft->detail == "sign -");
  CHECK(report.worst("delta-nonzero")->detail == "sign +");
}

TEST_CASE("product function grid preconditions") {
  const std::vector<std::pair<double, double>> empty;
  CHECK_THROWS_AS(validate_product_function(ProductFunction::linear(1, 1), empty), std::invalid_argument);
  const std::vector<std::pair<double, double>> negative = {{-1.0, 1.0}};
  CHECK_THROWS_AS(validate_product_function(ProductFunction::linear(1, 1), negative), std::invalid_argument);
}

TEST_CASE("product F^2 examples") {
  const auto e4 = zoo::make(zoo::product(zoo::euclidean(2), zoo::euclidean(2), ProductFunction::linear(1, 1)));
  const std::vector<double> x4(4, 0.0);
  CHECK(f_squared(e4, x4, std::vector<double>{1, 2, 3, 4}) == 30.0);

  const auto r11 = zoo::make(zoo::product(zoo::euclidean(1), zoo::euclidean(1), ProductFunction::ratio_square()));
  CHECK(f_squared(r11, std::vector<double>{0, 0}, std::vector<double>{1, 1}) == 1.0);
}

TEST_CASE("Randers x Riemannian with s^2/t is the square metric on the diagonal") {
  const auto prod = zoo::make(zoo::product(zoo::randers_curved(), zoo::alpha(), ProductFunction::ratio_square()));
  const auto sq = zoo::make(zoo::square_curved());
  Sampler rng(21);
  for (int k = 0; k < 20; ++k) {
    const auto [x, y] = sample_point(sq, rng, {});
    const double expected = f_squared(sq, x, y);
    const double got = f_squared(prod, concat(x, x), concat(y, y));
    CHECK(std::abs(got - expected) / expected < 1e-13);
  }
}

TEST_CASE("product F^2 is 2-homogeneous") {
  for (const auto& entry : zoo::test_matrix()) {
    INFO(entry.name);
    const auto m = zoo::make(entry.spec);
    Sampler rng(3);
    for (int k = 0; k < 10; ++k) {
      const auto [x, y] = sample_point(m, rng, {});
      const double f2 = f_squared(m, x, y);
      for (double lambda : {0.5, 2.0, 7.0}) {
        std::vector<double> ly = y;
        for (auto& v : ly) v *= lambda;
        CHECK(std::abs(f_squared(m, x, ly) - lambda * lambda * f2) / (lambda * lambda * f2) < 1e-12);
      }
    }
  }
}

TEST_CASE("closed-form block examples") {
  const std::vector<double> x2{0, 0};
  const std::vector<double> y2{1, 1};

  const auto e4 = zoo::make(zoo::product(zoo::euclidean(2), zoo::euclidean(2), ProductFunction::linear(1, 1)));
  const std::vector<double> x4(4, 0.0);
  const std::vector<double> y4{0.3, -1, 2, 0.5};
  const auto b = closed_form_blocks(e4, x4, y4);
  CHECK(max_abs(b.a_beta) == 0.0);
  CHECK(max_abs(b.alpha_b) == 0.0);
  CHECK(max_abs(b.ab - 2.0 * Matrix::Identity(2, 2)) < 1e-15);
  CHECK(max_abs(b.alpha_beta - 2.0 * Matrix::Identity(2, 2)) < 1e-15);

  const auto r11 = zoo::make(zoo::product(zoo::euclidean(1), zoo::euclidean(1), ProductFunction::ratio_square()));
  Matrix h(2, 2);
  h << 12, -8, -8, 6;
  CHECK(max_abs(closed_form_blocks(r11, x2, y2).assembled() - h) < 1e-12);
  Matrix hinv(2, 2);
  hinv << 0.75, 1, 1, 1.5;
  const auto inv = closed_form_inverse(r11, x2, y2);
  CHECK(max_abs(inv.assembled() - hinv) < 1e-12);
  CHECK(inv.a_beta(0, 0) == doctest::Approx(1.0).epsilon(1e-14));

  const auto l21 = zoo::make(zoo::product(zoo::euclidean(1), zoo::euclidean(1), ProductFunction::linear(2, 1)));
  Matrix d(2, 2);
  d << 4, 0, 0, 2;
  CHECK(max_abs(closed_form_blocks(l21, x2, y2).assembled() - d) < 1e-14);
  Matrix dinv(2, 2);
  dinv << 0.25, 0, 0, 0.5;
  CHECK(max_abs(closed_form_inverse(l21, x2, y2).assembled() - dinv) < 1e-14);
}

TEST_CASE("closed forms need slit factor fibers") {
  const auto e4 = zoo::make(zoo::product(zoo::euclidean(2), zoo::euclidean(2), ProductFunction::linear(1, 1)));
  const std::vector<double> x4(4, 0.0);
  CHECK_THROWS_AS(closed_form_blocks(e4, x4, std::vector<double>{0, 0, 1, 1}), DomainError);
  CHECK_THROWS_AS(closed_form_inverse(e4, x4, std::vector<double>{1, 1, 0, 0}), DomainError);
  CHECK_THROWS_AS(closed_form_blocks(zoo::make(zoo::euclidean(2)), std::vector<double>{0, 0},
                                     std::vector<double>{1, 1}),
                  std::invalid_argument);
}

TEST_CASE("closed forms are singular when Delta vanishes") {
  // f = (sqrt(s) + sqrt(t))^2 has Delta identically zero.
  const auto deg = ProductFunction::custom(expr::parse("(sqrt(s) + sqrt(t))^2"));
  const auto q = deg.partials(1, 1);
  CHECK(std::abs(q.delta()) < 1e-14);
  const auto degenerate = zoo::make(zoo::product(zoo::euclidean(1), zoo::euclidean(1), deg));
  CHECK_THROWS_AS(closed_form_inverse(degenerate, std::vector<double>{0, 0}, std::vector<double>{1, 1}),
                  SingularMatrix);
}

TEST_CASE("block formulas over the test matrix") {
  for (const auto& entry : zoo::test_matrix()) {
    INFO(entry.name);
    const auto m = zoo::make(entry.spec);
    const int left = m.product()->left->dim();
    const bool linear = m.product()->f.kind() == ProductFunction::Kind::Linear;
    Sampler rng(derive_seed(99, entry.name.size()));
    double worst_blocks = 0.0;
    double worst_inverse = 0.0;
    double worst_fd = 0.0;
    for (int k = 0; k < 100; ++k) {
      const auto [x, y] = sample_point(m, rng, {});
      const Matrix h = y_hessian(m, x, y);
      const auto blocks = closed_form_blocks(m, x, y);
      const Matrix assembled = blocks.assembled();
      CHECK(max_abs(assembled - assembled.transpose()) == 0.0);
      worst_blocks = std::max(worst_blocks, max_abs(assembled - h) / max_abs(h));
      const Matrix inv = closed_form_inverse(m, x, y).assembled();
      worst_inverse = std::max(worst_inverse, max_abs(inv * assembled - Matrix::Identity(m.dim(), m.dim())));
      if (linear) {
        CHECK(max_abs(blocks.a_beta) == 0.0);
        CHECK(max_abs(blocks.alpha_b) == 0.0);
        CHECK(max_abs(closed_form_inverse(m, x, y).a_beta) == 0.0);
      }
      const auto split = BlockTensor::split(h, left);
      CHECK(max_abs(split.assembled() - h) == 0.0);
      if (k < 10) {
        const auto p = phase_point(x, y);
        Matrix fd(m.dim(), m.dim());
        for (int i = 0; i < m.dim(); ++i) {
          for (int j = 0; j < m.dim(); ++j) {
            fd(i, j) = fd_partial(m.f_squared_field(), p,
                                  MultiIndex::zero(2 * m.dim()).with_added(m.dim() + i).with_added(m.dim() + j));
          }
        }
        worst_fd = std::max(worst_fd, max_abs(assembled - fd) / max_abs(fd));
      }
    }
    CHECK(worst_blocks < 1e-8);
    CHECK(worst_inverse < 1e-8);
    CHECK(worst_fd < 1e-5);
  }
}
