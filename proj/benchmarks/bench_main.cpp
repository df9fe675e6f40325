#include <benchmark/benchmark.h>

#include <rvml/kernel.hpp>
#include <rvml/landau.hpp>
#include <rvml/maxwell.hpp>
#include <rvml/rng.hpp>

#include <cmath>
#include <numbers>

using namespace rvml;

static void BM_KernelPhi(benchmark::State& state)
{
    CounterRng rng(1, "bench");
    std::vector<Vec3> pts(1024);
    for (auto& p : pts) p = Vec3(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3));
    const KernelParams kp;
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(kernel_phi(pts[i & 1023], pts[(i * 7 + 3) & 1023], kp));
        ++i;
    }
}
BENCHMARK(BM_KernelPhi);

static void BM_AssembleL(benchmark::State& state)
{
    const VelocityGrid g = build_grid(static_cast<int>(state.range(0)), 6.0);
    const VelocityGrid q = staggered_companion(g);
    for (auto _ : state) benchmark::DoNotOptimize(assemble_L(g, q, PlasmaPair{}).unknowns());
}
BENCHMARK(BM_AssembleL)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_ApplyL(benchmark::State& state)
{
    const VelocityGrid g = build_grid(static_cast<int>(state.range(0)), 6.0);
    const LinearizedOperator L = assemble_L(g, staggered_companion(g), PlasmaPair{});
    DistributionVector f(g.size());
    f.values.setOnes();
    for (auto _ : state) benchmark::DoNotOptimize(L.apply(f).values.data());
}
BENCHMARK(BM_ApplyL)->Arg(8)->Arg(10)->Unit(benchmark::kMicrosecond);

static void BM_YeeStep(benchmark::State& state)
{
    const int n = static_cast<int>(state.range(0));
    const double L = std::numbers::pi;
    EMFieldState s = make_state({n, n, n}, {L, L, L}, 0.5 * (L / n) / std::sqrt(3.0));
    for (auto& c : s.E)
        for (std::size_t p = 0; p < c.size(); ++p) c[p] = std::sin(0.01 * p);
    apply_boundary(s);
    for (auto _ : state) step(s);
    state.SetItemsProcessed(state.iterations() * static_cast<long>(n) * n * n);
}
BENCHMARK(BM_YeeStep)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
