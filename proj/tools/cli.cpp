#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <map>
#include <ostream>

#include <CLI11.hpp>

#include "cvarbandit/harness.hpp"
#include "cvarbandit/io.hpp"

namespace cvarbandit::cli {
namespace {

constexpr const char* kEnvPrefix = "CVAR_BANDIT_";

std::string env_name(const std::string& flag) {
    std::string name = kEnvPrefix;
    for (char ch : flag) name += ch == '-' ? '_' : static_cast<char>(std::toupper(ch));
    return name;
}

/// Flags shared by `simulate` and `sweep`; empty optionals mean "not given".
struct ExperimentFlags {
    std::string config;
    std::size_t runs = 0, stages = 0, workers = 0, trace_run = 0;
    double alpha = 0.0, epsilon = 0.0;
    std::vector<double> lambdas;
    std::vector<std::string> methods;
    std::uint64_t seed = 0;
    std::string out;
    bool per_run = false;
    bool independent_exploration = false;

    std::map<std::string, CLI::Option*> opts;

    void attach(CLI::App& cmd) {
        auto add = [&](const std::string& flag, auto& target, const std::string& help) {
            CLI::Option* o = cmd.add_option("--" + flag, target, help)->envname(env_name(flag));
            opts[flag] = o;
            return o;
        };
        add("config", config, "JSON experiment config");
        add("runs", runs, "Monte Carlo runs");
        add("stages", stages, "stages per run");
        add("alpha", alpha, "CVaR confidence level");
        add("epsilon", epsilon, "exploration probability");
        add("lambda", lambdas, "decay rates / learning rates, comma separated")->delimiter(',');
        add("method", methods,
            "estimators: sample_average, weighted_empirical, dual_recursive (comma separated)")
            ->delimiter(',');
        add("seed", seed, "master seed");
        add("workers", workers, "worker threads (0 = all cores)");
        add("out", out, "output directory");
        add("trace-run", trace_run, "also write the true-CVaR trace of this run index");
        opts["per-run"] = cmd.add_flag("--per-run", per_run, "persist per-run metric series")
                              ->envname(env_name("per-run"));
        opts["independent-exploration"] =
            cmd.add_flag("--independent-exploration", independent_exploration,
                         "give every cell its own exploration stream")
                ->envname(env_name("independent-exploration"));
    }

    bool given(const std::string& flag) const { return opts.at(flag)->count() > 0; }

    io::RunOptions resolve() const {
        io::RunOptions o;
        if (given("config")) o = io::load_options(config);
        ExperimentConfig& e = o.experiment;
        if (given("runs")) e.runs = runs;
        if (given("stages")) e.stages = stages;
        if (given("alpha")) e.alpha = alpha;
        if (given("epsilon")) e.epsilon = epsilon;
        if (given("lambda")) e.lambdas = lambdas;
        if (given("method")) {
            e.methods.clear();
            for (const auto& name : methods) {
                const auto m = parse_method(name);
                if (!m) throw io::ConfigError("unknown method '" + name + "'");
                e.methods.push_back(*m);
            }
        }
        if (given("seed")) e.master_seed = seed;
        if (given("workers")) e.workers = workers;
        if (given("out")) o.out_dir = out;
        if (given("trace-run")) o.trace_run = trace_run;
        if (given("per-run")) o.per_run = per_run;
        if (given("independent-exploration")) e.share_exploration = !independent_exploration;
        try {
            e.validate();
        } catch (const InvalidArgument& ex) {
            throw io::ConfigError(ex.what());
        }
        if (o.trace_run && *o.trace_run >= e.runs)
            throw io::ConfigError("trace run index must be below the number of runs");
        return o;
    }
};

void print_summary(std::ostream& out, std::span<const SweepRow> rows) {
    out << std::left << std::setw(20) << "method" << std::setw(10) << "lambda" << std::right
        << std::setw(12) << "hit_rate_T" << std::setw(14) << "avg_regret_T" << std::setw(18)
        << "empirical_cvar_T" << '\n';
    out << std::fixed << std::setprecision(6);
    for (const SweepRow& r : rows) {
        out << std::left << std::setw(20) << method_name(r.method) << std::setw(10)
            << io::format_number(r.lambda) << std::right << std::setw(12) << r.hit_rate
            << std::setw(14) << r.avg_regret << std::setw(18) << r.empirical_cvar << '\n';
    }
    out << std::defaultfloat;
}

int execute_experiment(const io::RunOptions& options, bool write_aggregates, std::ostream& out) {
    const ExperimentConfig& config = options.experiment;
    std::filesystem::create_directories(options.out_dir);

    io::PerRunWriter per_run(options.out_dir);
    PerRunSink sink;
    if (options.per_run) sink = [&](std::size_t r, const Cell& c, const MetricSeries& s) { per_run(r, c, s); };

    const AggregateResult result = run_experiment(config, sink);
    const std::vector<SweepRow> rows = sweep_table(result);

    if (write_aggregates) {
        for (Method m : config.methods)
            for (double l : config.lambdas)
                io::write_metric_csv(options.out_dir / io::aggregate_file_name(m, l), result.at(m, l).mean);
    }
    io::write_sweep_csv(options.out_dir / "sweep.csv", rows);
    io::write_json(options.out_dir / "config_echo.json", io::options_to_json(options));
    if (options.trace_run) {
        const RunRealization trace = generate_run(config.master_seed, *options.trace_run, config.testbed());
        io::write_cvar_trace_csv(
            options.out_dir / ("cvar_trace_run" + std::to_string(*options.trace_run) + ".csv"), trace);
    }
    print_summary(out, rows);
    return kExitOk;
}

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

struct EstimateFlags {
    std::string file;
    std::string method = "sample_average";
    double alpha = 0.9;
    double lambda = 0.5;
    GridSpec grid{};
    double initial_estimate = 0.0;

    void attach(CLI::App& cmd) {
        cmd.add_option("--file", file, "loss file, one value per line, oldest first")
            ->required()
            ->envname(env_name("file"));
        cmd.add_option("--method", method, "sample_average | weighted_empirical | dual_recursive")
            ->envname(env_name("method"));
        cmd.add_option("--alpha", alpha, "CVaR confidence level")->envname(env_name("alpha"));
        cmd.add_option("--lambda", lambda, "decay rate or learning rate")->envname(env_name("lambda"));
        cmd.add_option("--grid-min", grid.min, "dual grid minimum")->envname(env_name("grid-min"));
        cmd.add_option("--grid-max", grid.max, "dual grid maximum")->envname(env_name("grid-max"));
        cmd.add_option("--grid-count", grid.count, "dual grid size")->envname(env_name("grid-count"));
        cmd.add_option("--initial-estimate", initial_estimate, "dual starting value")
            ->envname(env_name("initial-estimate"));
    }
};

int execute_estimate(const EstimateFlags& flags, std::ostream& out) {
    const auto method = parse_method(flags.method);
    if (!method) throw io::ConfigError("unknown method '" + flags.method + "'");
    const std::vector<double> losses = io::read_loss_file(flags.file);
    if (losses.empty()) throw io::ConfigError("loss file '" + flags.file + "' has no observations");

    try {
        const ConfidenceLevel alpha(flags.alpha);
        const LossHistory history(losses);
        switch (*method) {
            case Method::sample_average:
                out << fixed6(cvar_sample_average(history, alpha)) << '\n';
                break;
            case Method::weighted_empirical:
                out << fixed6(cvar_weighted(history, flags.lambda, alpha)) << '\n';
                break;
            case Method::dual_recursive: {
                auto grid = std::make_shared<const Grid>(
                    Grid::uniform(flags.grid.min, flags.grid.max, flags.grid.count));
                DualState state(grid, alpha, flags.initial_estimate);
                for (double z : losses) state.update(z, flags.lambda);
                const DualEstimate est = state.cvar();
                out << fixed6(est.cvar) << ' ' << fixed6(est.argmin_c) << '\n';
                break;
            }
        }
    } catch (const InvalidArgument& ex) {
        throw io::ConfigError(ex.what());
    }
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Risk-averse bandit simulations with CVaR estimators", "cvar_bandit"};
    app.require_subcommand(1);

    ExperimentFlags simulate_flags;
    CLI::App* simulate = app.add_subcommand("simulate", "run the Monte Carlo experiment, write all outputs");
    simulate_flags.attach(*simulate);

    ExperimentFlags sweep_flags;
    CLI::App* sweep = app.add_subcommand("sweep", "run the lambda sweep, write sweep.csv");
    sweep_flags.attach(*sweep);

    EstimateFlags estimate_flags;
    CLI::App* estimate = app.add_subcommand("estimate", "estimate the CVaR of a loss file");
    estimate_flags.attach(*estimate);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*simulate) return execute_experiment(simulate_flags.resolve(), true, out);
        if (*sweep) return execute_experiment(sweep_flags.resolve(), false, out);
        if (*estimate) return execute_estimate(estimate_flags, out);
    } catch (const io::ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const io::IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}

}  // namespace cvarbandit::cli
