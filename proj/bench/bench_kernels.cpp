// Parallel / vectorised kernels against their serial references.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "cvarbandit/harness.hpp"
#include "oracles.hpp"

using namespace cvarbandit;

namespace {

ExperimentConfig bench_config() {
    ExperimentConfig c;
    c.runs = 16;
    c.stages = 500;
    c.lambdas = {0.1, 0.5};
    return c;
}

void BM_ExperimentSerial(benchmark::State& state) {
    const auto c = bench_config();
    for (auto _ : state) benchmark::DoNotOptimize(run_experiment_serial(c));
}

void BM_ExperimentParallel(benchmark::State& state) {
    auto c = bench_config();
    c.workers = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(run_experiment(c));
}

std::vector<double> normal_draws(std::size_t n) {
    Rng rng(3);
    std::normal_distribution<double> normal(1.0, 1.5);
    std::vector<double> z(n);
    for (auto& x : z) x = normal(rng);
    return z;
}

void BM_DualUpdateSimd(benchmark::State& state) {
    auto grid = std::make_shared<const Grid>(Grid::uniform(-100.0, 350.0, state.range(0)));
    DualState s(grid, ConfidenceLevel(0.9));
    const auto z = normal_draws(1024);
    std::size_t i = 0;
    for (auto _ : state) {
        s.update(z[i++ & 1023], 0.5);
        benchmark::DoNotOptimize(s.estimates().data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_DualUpdateScalar(benchmark::State& state) {
    const Grid g = Grid::uniform(-100.0, 350.0, state.range(0));
    const std::vector<double> grid(g.points().begin(), g.points().end());
    std::vector<double> est(grid.size(), 0.0);
    const auto z = normal_draws(1024);
    std::size_t i = 0;
    for (auto _ : state) {
        oracle::dual_update_scalar(grid, est, z[i++ & 1023], 0.5, 0.9);
        benchmark::DoNotOptimize(est.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

RunTrajectory trajectory(std::size_t T, std::vector<double>& truth) {
    truth.assign(T * 2, 1.0);
    RunTrajectory t;
    t.arms = 2;
    t.actions.assign(T, 0);
    t.incurred_losses = normal_draws(T);
    t.true_cvar = truth;
    return t;
}

void BM_EmpiricalCvarIncremental(benchmark::State& state) {
    std::vector<double> truth;
    const auto traj = trajectory(state.range(0), truth);
    for (auto _ : state) benchmark::DoNotOptimize(empirical_cvar_series(traj, ConfidenceLevel(0.9)));
}

void BM_EmpiricalCvarPerPrefix(benchmark::State& state) {
    std::vector<double> truth;
    const auto traj = trajectory(state.range(0), truth);
    for (auto _ : state) {
        std::vector<double> out;
        out.reserve(traj.incurred_losses.size());
        for (std::size_t t = 1; t <= traj.incurred_losses.size(); ++t)
            out.push_back(oracle::cvar_sample_average_naive(
                {traj.incurred_losses.begin(), traj.incurred_losses.begin() + t}, 0.9));
        benchmark::DoNotOptimize(out);
    }
}

}  // namespace

BENCHMARK(BM_ExperimentSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExperimentParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_DualUpdateSimd)->Arg(256)->Arg(2000);
BENCHMARK(BM_DualUpdateScalar)->Arg(256)->Arg(2000);
BENCHMARK(BM_EmpiricalCvarIncremental)->Arg(500)->Arg(2000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_EmpiricalCvarPerPrefix)->Arg(500)->Arg(2000)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
