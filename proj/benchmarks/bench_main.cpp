#include <benchmark/benchmark.h>

#include "cw/pde.hpp"

using namespace cw;

namespace {

const ModelParams base = ModelParams::defaults();

void BM_SolveProfile(benchmark::State& state) {
  const Grid g(-10.0, 20.0, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_profile(base, g));
}
BENCHMARK(BM_SolveProfile)->Arg(1501)->Arg(6001)->Arg(24001)->Unit(benchmark::kMillisecond);

void BM_Thomas(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Field sub(n, -1.0), diag(n, 4.0), sup(n, -1.0), rhs(n, 1.0), x(n), scratch(n);
  for (auto _ : state) {
    thomas_solve(sub, diag, sup, rhs, x, scratch);
    benchmark::DoNotOptimize(x.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Thomas)->Arg(1001)->Arg(6001)->Arg(24001);

void BM_Step(benchmark::State& state) {
  const Profile prof = solve_profile(base, Grid(-10.0, 20.0, static_cast<std::size_t>(state.range(0))));
  PerturbationSpec spec;
  spec.amplitude = 0.005;
  const State st0 = initial_state(prof, spec);
  Stepper stepper(prof, st0);
  State st = st0;
  const double dt = default_dt(prof.grid(), base);
  for (auto _ : state) stepper.advance(st, dt);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Step)->Arg(1501)->Arg(6001)->Arg(24001);

void BM_Energies(benchmark::State& state) {
  const Profile prof = solve_profile(base, Grid(-10.0, 20.0, 6001));
  PerturbationSpec spec;
  spec.amplitude = 0.005;
  const State st = initial_state(prof, spec);
  EnergyEvaluator eval(prof, {});
  for (auto _ : state) benchmark::DoNotOptimize(eval(st));
}
BENCHMARK(BM_Energies);

}  // namespace

BENCHMARK_MAIN();
