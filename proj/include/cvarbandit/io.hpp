#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cvarbandit/harness.hpp"

namespace cvarbandit::io {

/// Malformed configuration or input data (CLI exit status 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Filesystem failure (CLI exit status 3).
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

/// Experiment settings plus the output options of the command line tool.
struct RunOptions {
    ExperimentConfig experiment{};
    std::filesystem::path out_dir = "results";
    bool per_run = false;
    std::optional<std::size_t> trace_run;
};

/// Applies the keys of `doc` on top of `base`. Unknown keys are rejected.
RunOptions options_from_json(const nlohmann::json& doc, RunOptions base = {});
RunOptions load_options(const std::filesystem::path& path, RunOptions base = {});
nlohmann::json options_to_json(const RunOptions& options);

/// One finite real per line, oldest first. Blank lines are skipped.
std::vector<double> read_loss_file(const std::filesystem::path& path);

std::string aggregate_file_name(Method method, double lambda);
/// Sample averaging has a single per-run file since it does not depend on lambda.
std::string per_run_file_name(const Cell& cell);

// Writers. Stages and arms are written 1-based.
void write_metric_csv(const std::filesystem::path& path, const MetricSeries& series);
void write_sweep_csv(const std::filesystem::path& path, std::span<const SweepRow> rows);
void write_realization_csv(const std::filesystem::path& path, const RunRealization& realization);
void write_cvar_trace_csv(const std::filesystem::path& path, const RunRealization& realization);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

/// CSV rows `run, stage, hit_rate, avg_regret, empirical_cvar` appended per run.
class PerRunWriter {
public:
    explicit PerRunWriter(std::filesystem::path out_dir) : out_dir_(std::move(out_dir)) {}
    void operator()(std::size_t run, const Cell& cell, const MetricSeries& series);

private:
    std::filesystem::path out_dir_;
    std::vector<std::string> started_;
};

}  // namespace cvarbandit::io
