#include <cmath>

#include <benchmark/benchmark.h>

#include "driftscope/diffusion.hpp"
#include "driftscope/elliptic.hpp"
#include "driftscope/smalltime.hpp"
#include "driftscope/xray.hpp"

using namespace driftscope;

namespace {

const Shape kDisc(Disc{{0, 0}, 1.0});

ScalarField bump(const Grid& g) {
  return sample_scalar([](Vec2 p) { return std::exp(-4.0 * norm2(p)); }, g);
}

void BM_ForwardSinogram(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Grid g = Grid::covering({-1, -1}, {1, 1}, n, n);
  const ScalarField v = bump(g);
  const BeamGeometry geo{180, 181};
  for (auto _ : state) benchmark::DoNotOptimize(forward_sinogram(v, kDisc, geo));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(geo.n_angles * geo.n_offsets));
}
BENCHMARK(BM_ForwardSinogram)->Arg(65)->Arg(129)->Unit(benchmark::kMillisecond);

void BM_FbpInvert(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Grid g = Grid::covering({-1, -1}, {1, 1}, n, n);
  const Sinogram s = forward_sinogram(bump(g), kDisc, BeamGeometry{180, 181});
  for (auto _ : state) benchmark::DoNotOptimize(fbp_invert(s, g, kDisc, FbpFilter::hann));
}
BENCHMARK(BM_FbpInvert)->Arg(65)->Arg(129)->Arg(257)->Unit(benchmark::kMillisecond);

void BM_BridgeFunctional(benchmark::State& state) {
  const auto paths = static_cast<std::size_t>(state.range(0));
  const ScalarFn v = [](Vec2 p) { return 0.5 * (norm2(p) - 2.0); };
  for (auto _ : state) benchmark::DoNotOptimize(bridge_functional(v, {1, 0}, {0, 1}, 0.1, McConfig{paths, 100, 1}));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(paths));
}
BENCHMARK(BM_BridgeFunctional)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_SolveBvp(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const DomainSpec dom(kDisc, Grid::covering({-1.1, -1.1}, {1.1, 1.1}, n, n));
  const Grid& g = dom.grid();
  const LinearSystem sys = assemble_dirichlet_system(
      DiffusionField::constant(g, SymMat2::identity()), VectorField(g, std::vector<Vec2>(g.size())),
      sample_scalar([](Vec2 p) { return 0.5 * (norm2(p) - 2.0) + 2.0; }, g), dom,
      [](Vec2 p) { return std::exp(-0.5 * norm2(p)); });
  for (auto _ : state) benchmark::DoNotOptimize(solve_bvp(sys, 1e-10));
}
BENCHMARK(BM_SolveBvp)->Arg(65)->Arg(129)->Unit(benchmark::kMillisecond);

void BM_FitDataset(benchmark::State& state) {
  const BoundaryDataset ds = build_boundary_dataset(KernelSpec(OuKernel{1.0}), KernelSpec(BrownianKernel{}), kDisc,
                                                    BeamGeometry{180, 181}, default_ladder(1.0), DatasetOptions{});
  for (auto _ : state) benchmark::DoNotOptimize(fit_dataset(ds));
}
BENCHMARK(BM_FitDataset)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
