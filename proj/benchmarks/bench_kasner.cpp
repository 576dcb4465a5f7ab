#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "kasner/closedform.hpp"
#include "kasner/geodesics.hpp"
#include "kasner/modes.hpp"
#include "kasner/specfun.hpp"

namespace {

using namespace kasner;

KasnerExponents axisymmetric() {
  return KasnerExponents::make(-1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0);
}

ModeSpec mode(Momentum w) {
  ModeSpec s;
  s.w = w;
  return s;
}

void BM_LogGamma(benchmark::State& state) {
  const cplx z(0.3, 12.5);
  for (auto _ : state) benchmark::DoNotOptimize(log_gamma(z));
}
BENCHMARK(BM_LogGamma);

void BM_BesselJ(benchmark::State& state) {
  const cplx nu(0.0, 0.6);
  const double x = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(bessel_j(nu, x));
}
BENCHMARK(BM_BesselJ)->Arg(1)->Arg(10)->Arg(100)->Arg(3000);

void BM_HeunBSeries(benchmark::State& state) {
  const cplx delta(1.0, 1.0);
  const cplx x(0.5 * static_cast<double>(state.range(0)), 0.2);
  for (auto _ : state) benchmark::DoNotOptimize(heun_b(delta, x));
}
BENCHMARK(BM_HeunBSeries)->Arg(1)->Arg(4)->Arg(10);

void BM_SolveModeT(benchmark::State& state) {
  const KasnerExponents k = axisymmetric();
  const ModeSpec s = mode({{1, 1, 0}});
  const double t_end = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_mode_t(k, s, t_end).size());
}
BENCHMARK(BM_SolveModeT)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_SolveModeS(benchmark::State& state) {
  const KasnerExponents k = axisymmetric();
  const ModeSpec s = mode({{1, 1, 0}});
  for (auto _ : state) benchmark::DoNotOptimize(solve_mode_s(k, s, -25.0).size());
}
BENCHMARK(BM_SolveModeS)->Unit(benchmark::kMillisecond);

void BM_HeunPairEval(benchmark::State& state) {
  const KasnerExponents k = axisymmetric();
  const SolutionBasis b = closed_form_basis(k, Momentum{{1, 1, 0}});
  const double t = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(b.eval(t));
}
BENCHMARK(BM_HeunPairEval)->Arg(2)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_Geodesic(benchmark::State& state) {
  const KasnerExponents k = KasnerExponents::make(0.0, 0.0, 1.0);
  GeodesicInit init;
  init.v = {1.0, 0.5, 0.25};
  for (auto _ : state) {
    benchmark::DoNotOptimize(integrate_geodesic(k, init, 100.0).max_null_deviation);
  }
}
BENCHMARK(BM_Geodesic)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
