// Benchmarks the OpenMP kernels against their serial reference
// implementations: the direction-integrated semigroup matrix assembly and a
// small classification sweep.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "hypheat/config.hpp"
#include "hypheat/geometry.hpp"
#include "hypheat/grid.hpp"
#include "hypheat/heat_kernel.hpp"
#include "hypheat/sweep.hpp"

using namespace hypheat;

namespace {

GridPtr bench_grid(int cells) {
    return discretize(ManifoldModel::hyperbolic(3), 12.0, cells).first;
}

// Rough closed-form stand-in for a kernel profile; the assembly cost is what
// matters here, not the physics.
double proxy_kernel(double rho) {
    const double t = 0.5;
    const double r = std::max(rho, 1e-6);
    return r / std::sinh(r) * std::exp(-t - r * r / (4.0 * t)) /
           std::pow(4.0 * M_PI * t, 1.5);
}

void run_matrix_build(benchmark::State& state, ExecPolicy pol) {
    const GridPtr grid = bench_grid(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        const SemigroupMatrix mat = build_semigroup_matrix(grid, 0.5, proxy_kernel, pol);
        benchmark::DoNotOptimize(mat.w.data());
    }
    state.SetComplexityN(state.range(0));
}

void BM_matrix_build_serial(benchmark::State& state) {
    run_matrix_build(state, ExecPolicy::serial);
}
void BM_matrix_build_parallel(benchmark::State& state) {
    run_matrix_build(state, ExecPolicy::parallel);
}
BENCHMARK(BM_matrix_build_serial)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_matrix_build_parallel)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

RunConfig sweep_config() {
    RunConfig cfg;
    cfg.manifold.kind = "hyperbolic";
    cfg.manifold.dim = 2;
    cfg.grid.radius = 8.0;
    cfg.grid.cells = 100;
    cfg.horizon = 1.0;
    cfg.reaction.family = ReactionFamily::type2;
    cfg.reaction.mu = 0.05;
    cfg.reaction.beta = 1.0;
    cfg.reaction.p = 1.0;
    cfg.initial.theta = 0.01;
    SweepSpec sw;
    sw.axes.push_back({"mu", {0.02, 0.05, 0.08, 0.11}});
    sw.band = 0.2;
    sw.threads = 0;
    cfg.sweep = sw;
    return cfg;
}

void run_sweep_bench(benchmark::State& state, ExecPolicy pol) {
    const RunConfig cfg = sweep_config();
    for (auto _ : state) {
        const std::vector<SweepRecord> recs = run_sweep(cfg, pol);
        benchmark::DoNotOptimize(recs.data());
    }
}

void BM_sweep_serial(benchmark::State& state) { run_sweep_bench(state, ExecPolicy::serial); }
void BM_sweep_parallel(benchmark::State& state) { run_sweep_bench(state, ExecPolicy::parallel); }
BENCHMARK(BM_sweep_serial)->Unit(benchmark::kMillisecond)->MinTime(2.0);
BENCHMARK(BM_sweep_parallel)->Unit(benchmark::kMillisecond)->MinTime(2.0);

}  // namespace

BENCHMARK_MAIN();
