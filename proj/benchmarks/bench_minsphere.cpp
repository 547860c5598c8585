#include "minsphere/covers.hpp"
#include "minsphere/curvature.hpp"
#include "minsphere/energy.hpp"
#include "minsphere/spectrum.hpp"
#include "minsphere/sphere_mesh.hpp"
#include "minsphere/topology.hpp"

#include <benchmark/benchmark.h>

using namespace minsphere;

static void BM_BuildIcosphere(benchmark::State& state) {
  const int level = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_icosphere(level));
  state.counters["vertices"] = build_icosphere(level).vertex_count();
}
BENCHMARK(BM_BuildIcosphere)->DenseRange(3, 6)->Unit(benchmark::kMillisecond);

static void BM_AssemblePencil(benchmark::State& state) {
  const MeshPtr mesh = make_icosphere(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_pencil(*mesh));
}
BENCHMARK(BM_AssemblePencil)->DenseRange(3, 6)->Unit(benchmark::kMillisecond);

static void BM_AlphaEnergyGradient(benchmark::State& state) {
  const MeshPtr mesh = make_icosphere(static_cast<int>(state.range(0)));
  const SphereMap f = random_smooth_map(mesh, 4, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(alpha_energy(f, 1.1));
    benchmark::DoNotOptimize(alpha_energy_gradient(f, 1.1));
  }
  state.SetItemsProcessed(state.iterations() * f.vertex_count());
}
BENCHMARK(BM_AlphaEnergyGradient)->DenseRange(3, 6)->Unit(benchmark::kMicrosecond);

static void BM_EquatorSecondVariation(benchmark::State& state) {
  const int level = static_cast<int>(state.range(0));
  const MeshPtr mesh = make_icosphere(level);
  const SphereMap f = equator_map(mesh, 4);
  const double tau = calibrate_tau(level).tau;
  for (auto _ : state) benchmark::DoNotOptimize(morse_index_nullity(assemble_second_variation(f, 1.0), 20, tau));
}
BENCHMARK(BM_EquatorSecondVariation)->DenseRange(2, 3)->Unit(benchmark::kMillisecond);

static void BM_InducedSpectrumDoubleCover(benchmark::State& state) {
  const MeshPtr mesh = make_icosphere(static_cast<int>(state.range(0)));
  const SphereMap f = compose_cover(mesh, equator_embedding(4), 4, RationalMap::power(2));
  for (auto _ : state) benchmark::DoNotOptimize(induced_metric_spectrum(f, 1e-3, 12));
}
BENCHMARK(BM_InducedSpectrumDoubleCover)->DenseRange(3, 4)->Unit(benchmark::kMillisecond);

static void BM_SchubertCensus(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(schubert_cell_counts(3, N));
}
BENCHMARK(BM_SchubertCensus)->DenseRange(5, 20, 5);

static void BM_PinchSamples(benchmark::State& state) {
  const CurvatureOperator r = random_pinched_operator(4, 0.5, 1);
  for (auto _ : state) benchmark::DoNotOptimize(verify_pinch_implication(r, 0.5, state.range(0), 1));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PinchSamples)->Arg(10000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
