#include <benchmark/benchmark.h>

#include "mbump/energy.hpp"
#include "mbump/system.hpp"

using namespace mbump;

namespace {

const GroundState& cubic() {
  static const GroundState gs = compute_ground_state(make_nonlinearity(3.0, 2.0, 0.0, 1), 1);
  return gs;
}

void BM_GroundState1D(benchmark::State& state) {
  const Nonlinearity nl = make_nonlinearity(3.0, 2.0, 0.0, 1);
  for (auto _ : state) benchmark::DoNotOptimize(compute_ground_state(nl, 1).center_value());
}
BENCHMARK(BM_GroundState1D)->Unit(benchmark::kMillisecond);

void BM_ProjectedSolve(benchmark::State& state) {
  const Grid g(1, static_cast<double>(state.range(0)), 0.1);
  const ScalarModel m(g, algebraic_potential(), 1e-9, cubic().nonlinearity(),
                      make_grid_consistent_bump(cubic(), g.spacing(), default_bump_reach(g)));
  const Configuration c{1, {Point3{-6.0, 0, 0}, Point3{6.0, 0, 0}}, 10.0};
  for (auto _ : state) benchmark::DoNotOptimize(solve_projected(m, c).star_norm);
}
BENCHMARK(BM_ProjectedSolve)->Arg(30)->Arg(60)->Unit(benchmark::kMillisecond);

void BM_ProjectedSolve2D(benchmark::State& state) {
  static const GroundState gs = compute_ground_state(make_nonlinearity(3.0, 2.0, 0.0, 2), 2);
  const Grid g(2, 18.0, 0.25);
  const ScalarModel m(g, zero_potential(), 0.0, gs.nonlinearity(), BumpModel::continuum(gs));
  const Configuration c{2, {Point3{-4.0, 0, 0}, Point3{4.0, 0, 0}}, 8.0};
  for (auto _ : state) benchmark::DoNotOptimize(solve_projected(m, c).star_norm);
}
BENCHMARK(BM_ProjectedSolve2D)->Unit(benchmark::kMillisecond);

void BM_CoupledSpectrum(benchmark::State& state) {
  const CouplingParams p = synchronized_amplitudes(1.0, 1.0, 3.0);
  for (auto _ : state) benchmark::DoNotOptimize(coupled_spectrum(p, cubic()).kernel_dim);
}
BENCHMARK(BM_CoupledSpectrum)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
