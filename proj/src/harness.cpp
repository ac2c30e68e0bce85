#include "cvarbandit/harness.hpp"

#include <exception>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cvarbandit {

bool operator==(const Cell& a, const Cell& b) noexcept {
    if (a.method != b.method) return false;
    return a.method == Method::sample_average || a.lambda == b.lambda;
}

void ExperimentConfig::validate() const {
    if (runs == 0) throw InvalidArgument("runs must be positive");
    if (stages == 0) throw InvalidArgument("stages must be positive");
    if (arms == 0) throw InvalidArgument("arms must be positive");
    (void)ConfidenceLevel(alpha);
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InvalidArgument("epsilon must lie in [0, 1]");
    if (methods.empty()) throw InvalidArgument("at least one method is required");
    if (lambdas.empty()) throw InvalidArgument("at least one lambda is required");
    params.validate(arms);
    for (const Cell& cell : cells()) policy(cell).validate();
    if (grid.count < 2 || !(grid.max > grid.min)) throw InvalidArgument("invalid grid");
}

TestbedConfig ExperimentConfig::testbed() const {
    return TestbedConfig{stages, arms, ConfidenceLevel(alpha), params};
}

PolicyConfig ExperimentConfig::policy(const Cell& cell) const {
    PolicyConfig pc;
    pc.epsilon = epsilon;
    pc.alpha = ConfidenceLevel(alpha);
    pc.method = cell.method;
    pc.lambda = cell.lambda;
    pc.grid = grid;
    pc.initial_estimate = initial_estimate;
    return pc;
}

std::vector<Cell> ExperimentConfig::cells() const {
    std::vector<Cell> out;
    auto add = [&](Cell c) {
        for (const Cell& have : out)
            if (have == c) return;
        out.push_back(c);
    };
    for (Method m : methods) {
        if (m == Method::sample_average) {
            add({m, lambdas.front()});
        } else {
            for (double l : lambdas) add({m, l});
        }
    }
    return out;
}

PolicyRun play(const RunRealization& realization, EpsilonGreedyPolicy& policy) {
    if (policy.arms() != realization.arms)
        throw InvalidArgument("policy and realization disagree on the number of arms");
    PolicyRun out;
    out.actions.reserve(realization.stages);
    out.incurred_losses.reserve(realization.stages);
    for (std::size_t t = 0; t < realization.stages; ++t) {
        const std::size_t arm = policy.select_action();
        const double loss = realization.loss(t, arm);
        policy.observe(arm, loss);
        out.actions.push_back(arm);
        out.incurred_losses.push_back(loss);
    }
    return out;
}

MetricSeries run_single(std::uint64_t run, const Cell& cell, const RunRealization& realization,
                        const ExperimentConfig& config, std::shared_ptr<const Grid> grid,
                        std::uint64_t cell_slot) {
    if (realization.stages != config.stages || realization.arms != config.arms)
        throw InvalidArgument("realization shape does not match the experiment config");
    const std::uint64_t slot = config.share_exploration ? 0 : cell_slot + 1;
    EpsilonGreedyPolicy policy(config.policy(cell), config.arms,
                               make_stream(config.master_seed, run, Stream::exploration, slot),
                               make_stream(config.master_seed, run, Stream::tie_break, slot),
                               std::move(grid));
    PolicyRun played = play(realization, policy);
    RunTrajectory traj{std::move(played.actions), std::move(played.incurred_losses),
                       realization.true_cvar, realization.arms};
    return compute_metrics(traj, ConfidenceLevel(config.alpha));
}

const CellResult& AggregateResult::at(Method method, double lambda) const {
    const Cell key{method, lambda};
    for (const CellResult& c : cells)
        if (c.cell == key) return c;
    throw InvalidArgument("no result for " + std::string(method_name(method)) + " at lambda " +
                          std::to_string(lambda));
}

namespace {

struct Accumulator {
    explicit Accumulator(const ExperimentConfig& config)
        : cells(config.cells()), sums(cells.size()) {
        for (auto& s : sums) {
            s.hit_rate.assign(config.stages, 0.0);
            s.avg_regret.assign(config.stages, 0.0);
            s.empirical_cvar.assign(config.stages, 0.0);
        }
    }

    void add(std::size_t run, const std::vector<MetricSeries>& per_cell, const PerRunSink& sink) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const MetricSeries& s = per_cell[c];
            MetricSeries& acc = sums[c];
            for (std::size_t t = 0; t < s.stages(); ++t) {
                acc.hit_rate[t] += s.hit_rate[t];
                acc.avg_regret[t] += s.avg_regret[t];
                acc.empirical_cvar[t] += s.empirical_cvar[t];
            }
            if (sink) sink(run, cells[c], s);
        }
    }

    AggregateResult finish(const ExperimentConfig& config) {
        AggregateResult out{config, config.runs, {}};
        const double n_runs = static_cast<double>(config.runs);
        for (std::size_t c = 0; c < cells.size(); ++c) {
            MetricSeries& s = sums[c];
            for (std::size_t t = 0; t < s.stages(); ++t) {
                s.hit_rate[t] /= n_runs;
                s.avg_regret[t] /= n_runs;
                s.empirical_cvar[t] /= n_runs;
            }
            out.cells.push_back({cells[c], std::move(s)});
        }
        return out;
    }

    std::vector<Cell> cells;
    std::vector<MetricSeries> sums;
};

std::vector<MetricSeries> evaluate_run(std::size_t run, const ExperimentConfig& config,
                                       const std::vector<Cell>& cells,
                                       const std::shared_ptr<const Grid>& grid) {
    const RunRealization realization = generate_run(config.master_seed, run, config.testbed());
    std::vector<MetricSeries> out;
    out.reserve(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c)
        out.push_back(run_single(run, cells[c], realization, config, grid, c));
    return out;
}

std::shared_ptr<const Grid> make_grid(const ExperimentConfig& config) {
    return std::make_shared<const Grid>(
        Grid::uniform(config.grid.min, config.grid.max, config.grid.count));
}

}  // namespace

AggregateResult run_experiment_serial(const ExperimentConfig& config, const PerRunSink& sink) {
    config.validate();
    Accumulator acc(config);
    const auto grid = make_grid(config);
    for (std::size_t r = 0; r < config.runs; ++r) acc.add(r, evaluate_run(r, config, acc.cells, grid), sink);
    return acc.finish(config);
}

AggregateResult run_experiment(const ExperimentConfig& config, const PerRunSink& sink) {
    config.validate();
    Accumulator acc(config);
    const auto grid = make_grid(config);
    const auto runs = static_cast<long long>(config.runs);

#ifdef _OPENMP
    const int threads = config.workers > 0 ? static_cast<int>(config.workers) : omp_get_max_threads();
#else
    const int threads = 1;
#endif
    // Exceptions must not escape the parallel region; keep the first one.
    std::exception_ptr failure;
#pragma omp parallel for ordered schedule(dynamic, 1) num_threads(threads)
    for (long long r = 0; r < runs; ++r) {
        std::vector<MetricSeries> per_cell;
        bool ok = true;
        try {
            per_cell = evaluate_run(static_cast<std::size_t>(r), config, acc.cells, grid);
        } catch (...) {
            ok = false;
#pragma omp critical(cvarbandit_failure)
            if (!failure) failure = std::current_exception();
        }
#pragma omp ordered
        {
            if (ok && !failure) {
                try {
                    acc.add(static_cast<std::size_t>(r), per_cell, sink);
                } catch (...) {
#pragma omp critical(cvarbandit_failure)
                    if (!failure) failure = std::current_exception();
                }
            }
        }
    }
    if (failure) std::rethrow_exception(failure);
    return acc.finish(config);
}

std::vector<SweepRow> sweep_table(const AggregateResult& result) {
    std::vector<SweepRow> rows;
    for (Method m : result.config.methods) {
        for (double l : result.config.lambdas) {
            const MetricSeries& s = result.at(m, l).mean;
            rows.push_back({m, l, s.hit_rate.back(), s.avg_regret.back(), s.empirical_cvar.back()});
        }
    }
    return rows;
}

std::vector<SweepRow> sweep_lambda(const ExperimentConfig& config) {
    return sweep_table(run_experiment(config));
}

}  // namespace cvarbandit
