#include <benchmark/benchmark.h>

#include "spinhydro/spinhydro.hpp"

namespace {

using namespace spinhydro;

ComplexField packet(const Grid& g) {
  const Vec3 w = g.dims() == 1 ? Vec3{1.5L, 1, 1} : Vec3{1.5L, 1.5L, 1};
  return init_state(StateSpec::single(GaussianPacket{{}, w, {1, 0.5L, 0}}), g);
}

Grid grid_for(const benchmark::State& state) {
  return make_grid(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 32);
}

void BM_Step(benchmark::State& state) {
  const Grid g = grid_for(state);
  const auto pot = Potential::harmonic(g, 1, {0.2L, 0.2L});
  const SplitStepPropagator prop(pot, 1, 1e-3L);
  const auto psi0 = packet(g);
  std::vector<Complex> psi(psi0.values().begin(), psi0.values().end());
  for (auto _ : state) {
    prop.advance(psi, 1);
    benchmark::DoNotOptimize(psi.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(g.size()));
}
BENCHMARK(BM_Step)->Args({1, 512})->Args({1, 1024})->Args({2, 64})->Args({2, 128});

void BM_ExtractHydro(benchmark::State& state) {
  const Grid g = grid_for(state);
  const auto psi = packet(g);
  const SpinVector s(Vec3{0, 0, 1});
  for (auto _ : state) benchmark::DoNotOptimize(extract_hydro(psi, 1, s));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(g.size()));
}
BENCHMARK(BM_ExtractHydro)->Args({1, 512})->Args({1, 1024})->Args({2, 64})->Unit(benchmark::kMillisecond);

void BM_Gradient(benchmark::State& state) {
  const Grid g = grid_for(state);
  const auto rho = density(packet(g));
  const auto backend = state.range(2) ? Backend::fd2 : Backend::spectral;
  for (auto _ : state) benchmark::DoNotOptimize(gradient(rho, backend));
}
BENCHMARK(BM_Gradient)->Args({1, 512, 0})->Args({1, 512, 1})->Args({2, 64, 0})->Args({2, 64, 1});

void BM_Advect(benchmark::State& state) {
  const Grid g = make_grid(1, 512, 64);
  const auto frames = evolve(packet(g), Potential::free(g), 1, {2, 1e-3L, 10, true});
  const FieldCache cache(frames, SpinVector(Vec3{0, 0, 1}));
  AdvectOptions opt;
  for (auto _ : state) benchmark::DoNotOptimize(advect(cache, SplitSpec::external_only({0.3L, 0, 0}), opt));
}
BENCHMARK(BM_Advect)->Unit(benchmark::kMillisecond);

void BM_Ensemble(benchmark::State& state) {
  const Grid g = make_grid(1, 512, 64);
  const auto frames = evolve(packet(g), Potential::free(g), 1, {1, 1e-3L, 10, true});
  const FieldCache cache(frames, SpinVector(Vec3{0, 0, 1}));
  EnsembleOptions opt;
  opt.n = 1000;
  opt.workers = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_ensemble(frames, cache, opt));
}
BENCHMARK(BM_Ensemble)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace
BENCHMARK_MAIN();
