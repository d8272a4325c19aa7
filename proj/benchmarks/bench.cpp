#include <benchmark/benchmark.h>

#include "finsler/curvature.hpp"
#include "finsler/geodesic.hpp"
#include "finsler/product.hpp"
#include "zoo.hpp"

using namespace finsler;

namespace {

Jet filled(const JetSpacePtr& space, double seed) {
  std::vector<double> c(space->size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = std::sin(seed + 0.37 * static_cast<double>(i));
  return Jet(space, c);
}

void BM_JetMultiply(benchmark::State& state) {
  const auto space = JetSpace::get(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const Jet a = filled(space, 0.1);
  const Jet b = filled(space, 0.7);
  for (auto _ : state) benchmark::DoNotOptimize(a * b);
  state.counters["coeffs"] = static_cast<double>(space->size());
}
BENCHMARK(BM_JetMultiply)->Args({4, 2})->Args({4, 6})->Args({8, 4})->Args({8, 6});

void BM_FundamentalTensor(benchmark::State& state) {
  const auto m = zoo::make(zoo::square_curved());
  const std::vector<double> x{0.1, -0.2};
  const std::vector<double> y{0.6, 0.8};
  for (auto _ : state) benchmark::DoNotOptimize(fundamental_tensor(m, x, y));
}
BENCHMARK(BM_FundamentalTensor);

void BM_ClosedFormInverse(benchmark::State& state) {
  const auto m = zoo::make(zoo::product(zoo::randers_curved(), zoo::alpha(), ProductFunction::ratio_square()));
  const std::vector<double> x{0.1, -0.2, 0.3, 0.0};
  const std::vector<double> y{0.6, 0.8, -0.5, 0.2};
  for (auto _ : state) benchmark::DoNotOptimize(closed_form_inverse(m, x, y));
}
BENCHMARK(BM_ClosedFormInverse);

void BM_RicciTensor(benchmark::State& state) {
  const bool product = state.range(0) != 0;
  const auto m = product ? zoo::make(zoo::product(zoo::sphere(), zoo::sphere(), ProductFunction::ratio_square()))
                         : zoo::make(zoo::funk());
  const std::vector<double> x = product ? std::vector<double>{1.0, 0.2, 1.3, -0.5} : std::vector<double>{0.1, -0.2};
  const std::vector<double> y = product ? std::vector<double>{0.6, 0.8, -0.5, 0.2} : std::vector<double>{0.6, 0.8};
  CurvatureOptions options;
  options.mode = state.range(1) != 0 ? RicciTensorMode::FiniteDifference : RicciTensorMode::Jet;
  for (auto _ : state) benchmark::DoNotOptimize(ricci_tensor(m, x, y, options));
}
BENCHMARK(BM_RicciTensor)->ArgNames({"product", "fd"})->Args({0, 0})->Args({0, 1})->Args({1, 0})->Args({1, 1})
    ->Unit(benchmark::kMillisecond);

void BM_Geodesic(benchmark::State& state) {
  const auto m = zoo::make(zoo::product(zoo::sphere(), zoo::euclidean(2), ProductFunction::ratio_square()));
  const std::vector<double> x{1.0, 0.0, 0.1, 0.2};
  const std::vector<double> y{0.3, 0.4, 0.5, -0.2};
  for (auto _ : state) benchmark::DoNotOptimize(integrate_geodesic(m, x, y, 1.0, 1e-3));
}
BENCHMARK(BM_Geodesic)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
