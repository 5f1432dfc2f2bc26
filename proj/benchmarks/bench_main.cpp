#include <benchmark/benchmark.h>

#include "wendy/changepoint.hpp"
#include "wendy/experiment.hpp"
#include "wendy/integration_error.hpp"
#include "wendy/regression.hpp"
#include "wendy/selection.hpp"

namespace {

wendy::Trajectory logistic_data(int steps) {
  const auto system = wendy::builtin_system(wendy::BuiltinSystem::LogisticGrowth);
  const auto grid = wendy::make_grid(system.default_span, steps);
  return wendy::simulate(system, system.initial_state, grid);
}

void BM_PolyFourierCoefficients(benchmark::State& state) {
  const auto grid = wendy::make_grid(10.0, 1000);
  for (auto _ : state) {
    double acc = 0.0;
    for (long n = 0; n <= 500; ++n) {
      acc += wendy::poly_fourier_coefficient(16, 0.5, grid.span, n);
    }
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_PolyFourierCoefficients);

void BM_EstimatedErrorCurve(benchmark::State& state) {
  const auto data = logistic_data(static_cast<int>(state.range(0)));
  const auto cfg = wendy::EulerMaclaurinConfig::with_order(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(wendy::estimated_error_curve(data, 16, cfg));
  }
}
BENCHMARK(BM_EstimatedErrorCurve)->Arg(500)->Arg(1000);

void BM_Changepoint(benchmark::State& state) {
  const int n = 500;
  Eigen::VectorXd x(n), y(n);
  for (int i = 0; i < n; ++i) {
    x[i] = i + 1.0;
    y[i] = i < 100 ? -0.2 * i : -20.0;
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(wendy::detect_changepoint(x, y));
  }
}
BENCHMARK(BM_Changepoint);

void BM_SlSelect(benchmark::State& state) {
  const auto data = logistic_data(500);
  const auto cfg = wendy::EulerMaclaurinConfig::with_order(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(wendy::sl_select(data, 16, cfg));
  }
}
BENCHMARK(BM_SlSelect);

void BM_MgSelect(benchmark::State& state) {
  const auto data = logistic_data(500);
  for (auto _ : state) {
    benchmark::DoNotOptimize(wendy::mg_select(data));
  }
}
BENCHMARK(BM_MgSelect);

void BM_WendyOls(benchmark::State& state) {
  const auto system = wendy::builtin_system(wendy::BuiltinSystem::Duffing);
  const auto grid = wendy::make_grid(system.default_span, 500);
  const auto clean = wendy::simulate(system, system.initial_state, grid);
  const auto noisy = wendy::add_noise(clean, {0.2, 7});
  const auto cfg = wendy::EulerMaclaurinConfig::with_order(1);
  const auto basis = wendy::sl_select(noisy, 16, cfg).basis;
  const auto ws = wendy::assemble_weak_system(system, noisy, basis);
  for (auto _ : state) {
    benchmark::DoNotOptimize(wendy::wendy_ols(ws));
  }
}
BENCHMARK(BM_WendyOls);

void BM_WendyIrls(benchmark::State& state) {
  const auto system = wendy::builtin_system(wendy::BuiltinSystem::Duffing);
  const auto grid = wendy::make_grid(system.default_span, 500);
  const auto clean = wendy::simulate(system, system.initial_state, grid);
  const auto noisy = wendy::add_noise(clean, {0.2, 7});
  const auto cfg = wendy::EulerMaclaurinConfig::with_order(1);
  const auto basis = wendy::sl_select(noisy, 16, cfg).basis;
  const auto ws = wendy::assemble_weak_system(system, noisy, basis);
  for (auto _ : state) {
    benchmark::DoNotOptimize(wendy::wendy_irls(ws, system, noisy, basis));
  }
}
BENCHMARK(BM_WendyIrls);

}  // namespace

BENCHMARK_MAIN();
