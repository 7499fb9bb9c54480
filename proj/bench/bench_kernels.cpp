// Serial vs OpenMP timings for the hot kernels: energy quadrature,
// sphere extraction sweeps and red-black relaxation building blocks.

#include <benchmark/benchmark.h>

#include "qig/grid.hpp"
#include "qig/growth.hpp"
#include "qig/parallel.hpp"
#include "qig/solver.hpp"

namespace {

qig::Model double_phase_model() {
    qig::ModelSpec spec;
    spec.family = "double_phase";
    spec.p = 2.0;
    spec.q = 3.0;
    spec.coefficient = qig::ScalarField::linear(0.0, 1.0);
    return qig::build_model(spec);
}

qig::GridFunction sample_field(int N) {
    qig::GridFunction u(N, 1.0, {0.0, 0.0});
    u.fill([](qig::Point p) {
        return 0.4 * (p.x * p.x - p.y * p.y) + 0.1 * p.x * p.y;
    });
    return u;
}

void BM_energy_serial(benchmark::State& state) {
    const auto model = double_phase_model();
    const auto u = sample_field(static_cast<int>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(qig::energy_serial(model.F, u));
}
BENCHMARK(BM_energy_serial)->Arg(64)->Arg(128)->Arg(256);

void BM_energy_parallel(benchmark::State& state) {
    const auto model = double_phase_model();
    const auto u = sample_field(static_cast<int>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(qig::energy(model.F, u));
}
BENCHMARK(BM_energy_parallel)->Arg(64)->Arg(128)->Arg(256);

void BM_block_sum_serial(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(qig::par::block_sum_serial(
            n, [](std::size_t i) { return std::sqrt(1.0 + i); }));
}
BENCHMARK(BM_block_sum_serial)->Arg(1 << 16)->Arg(1 << 20);

void BM_block_sum_parallel(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(qig::par::block_sum(
            n, [](std::size_t i) { return std::sqrt(1.0 + i); }));
}
BENCHMARK(BM_block_sum_parallel)->Arg(1 << 16)->Arg(1 << 20);

void BM_psi_prime_sweep(benchmark::State& state) {
    const auto model = double_phase_model();
    qig::GrowthGrid grid;
    grid.x_per_side = static_cast<int>(state.range(0));
    grid.t_count = 49;
    for (auto _ : state)
        benchmark::DoNotOptimize(
            qig::build_growth_function(model.A, grid));
}
BENCHMARK(BM_psi_prime_sweep)->Arg(5)->Arg(9);

void BM_solve_equation(benchmark::State& state) {
    const auto model = double_phase_model();
    qig::Patch patch;
    patch.N = static_cast<int>(state.range(0));
    for (auto _ : state) {
        auto [u, rep] = qig::solve_equation(
            model.A, [](qig::Point p) { return p.x - p.y; }, patch);
        benchmark::DoNotOptimize(rep.residual);
    }
}
BENCHMARK(BM_solve_equation)->Arg(16)->Arg(32);

}  // namespace

BENCHMARK_MAIN();
