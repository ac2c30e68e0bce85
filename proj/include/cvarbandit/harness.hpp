#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "cvarbandit/bandit_env.hpp"
#include "cvarbandit/metrics.hpp"
#include "cvarbandit/policy.hpp"

namespace cvarbandit {

/// One (estimator, lambda) combination evaluated on every run.
struct Cell {
    Method method;
    double lambda;  ///< meaningless for sample averaging
};

bool operator==(const Cell& a, const Cell& b) noexcept;

struct ExperimentConfig {
    std::size_t runs = 1000;
    std::size_t stages = 2000;
    std::size_t arms = 8;
    double alpha = 0.90;
    double epsilon = 0.05;
    std::vector<double> lambdas = {0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5,
                                   0.6,  0.7,  0.8, 0.9, 0.95, 0.99};
    std::vector<Method> methods = {Method::sample_average, Method::weighted_empirical,
                                   Method::dual_recursive};
    GridSpec grid{};
    double initial_estimate = 0.0;
    ParamSpec params{};
    std::uint64_t master_seed = 1;
    std::size_t workers = 0;  ///< 0 lets OpenMP decide
    /// All cells of a run reuse one exploration / tie-break stream.
    bool share_exploration = true;

    void validate() const;
    TestbedConfig testbed() const;
    PolicyConfig policy(const Cell& cell) const;

    /// Distinct cells to evaluate. Sample averaging appears once since it does
    /// not depend on lambda; the other methods appear once per lambda.
    std::vector<Cell> cells() const;
};

struct PolicyRun {
    std::vector<std::size_t> actions;
    std::vector<double> incurred_losses;
};

/// Plays one policy through a pre-generated realization.
PolicyRun play(const RunRealization& realization, EpsilonGreedyPolicy& policy);

/// Stage loop plus metrics for one cell on one run. `cell_slot` picks the
/// exploration stream when exploration is not shared across cells.
MetricSeries run_single(std::uint64_t run, const Cell& cell, const RunRealization& realization,
                        const ExperimentConfig& config,
                        std::shared_ptr<const Grid> grid = nullptr, std::uint64_t cell_slot = 0);

struct CellResult {
    Cell cell;
    MetricSeries mean;
};

struct AggregateResult {
    ExperimentConfig config;
    std::size_t run_count = 0;
    std::vector<CellResult> cells;

    /// Looks up a cell; lambda is ignored for sample averaging.
    const CellResult& at(Method method, double lambda) const;
};

/// Invoked in run-index order with the per-run series of every cell.
using PerRunSink = std::function<void(std::size_t run, const Cell& cell, const MetricSeries& series)>;

/// Parallel over runs; per-run results are folded into the means in run order,
/// so the output does not depend on the worker count.
AggregateResult run_experiment(const ExperimentConfig& config, const PerRunSink& sink = {});

/// Single-threaded reference of run_experiment.
AggregateResult run_experiment_serial(const ExperimentConfig& config, const PerRunSink& sink = {});

struct SweepRow {
    Method method;
    double lambda;
    double hit_rate;
    double avg_regret;
    double empirical_cvar;
};

/// Time-T metrics per method x lambda; sample averaging is repeated for every lambda.
std::vector<SweepRow> sweep_table(const AggregateResult& result);
std::vector<SweepRow> sweep_lambda(const ExperimentConfig& config);

}  // namespace cvarbandit
