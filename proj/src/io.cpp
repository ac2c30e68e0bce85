#include "cvarbandit/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

namespace cvarbandit::io {

using nlohmann::json;

std::string format_number(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key)) throw ConfigError("unknown config key '" + where + key + "'");
}

template <class T>
T get_as(const json& obj, const std::string& key, const std::string& where) {
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config key '" + where + key + "' has the wrong type: " + e.what());
    }
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

void close_checked(std::ofstream& out, const std::filesystem::path& path) {
    out.close();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace

RunOptions options_from_json(const json& doc, RunOptions base) {
    reject_unknown(doc,
                   {"runs", "stages", "arms", "alpha", "epsilon", "lambdas", "methods", "grid",
                    "initial_estimate", "params", "seed", "workers", "share_exploration", "out",
                    "per_run", "trace_run"},
                   "");
    ExperimentConfig& e = base.experiment;
    if (doc.contains("runs")) e.runs = get_as<std::size_t>(doc, "runs", "");
    if (doc.contains("stages")) e.stages = get_as<std::size_t>(doc, "stages", "");
    if (doc.contains("arms")) e.arms = get_as<std::size_t>(doc, "arms", "");
    if (doc.contains("alpha")) e.alpha = get_as<double>(doc, "alpha", "");
    if (doc.contains("epsilon")) e.epsilon = get_as<double>(doc, "epsilon", "");
    if (doc.contains("lambdas")) e.lambdas = get_as<std::vector<double>>(doc, "lambdas", "");
    if (doc.contains("methods")) {
        e.methods.clear();
        for (const auto& name : get_as<std::vector<std::string>>(doc, "methods", "")) {
            const auto m = parse_method(name);
            if (!m) throw ConfigError("unknown method '" + name + "'");
            e.methods.push_back(*m);
        }
    }
    if (doc.contains("grid")) {
        const json& g = doc.at("grid");
        reject_unknown(g, {"min", "max", "count"}, "grid.");
        if (g.contains("min")) e.grid.min = get_as<double>(g, "min", "grid.");
        if (g.contains("max")) e.grid.max = get_as<double>(g, "max", "grid.");
        if (g.contains("count")) e.grid.count = get_as<std::size_t>(g, "count", "grid.");
    }
    if (doc.contains("initial_estimate"))
        e.initial_estimate = get_as<double>(doc, "initial_estimate", "");
    if (doc.contains("params")) {
        const json& p = doc.at("params");
        reject_unknown(p, {"mu_min", "mu_max", "sigma0_min", "sigma0_max", "shock_std"}, "params.");
        if (p.contains("mu_min")) e.params.mu_min = get_as<double>(p, "mu_min", "params.");
        if (p.contains("mu_max")) e.params.mu_max = get_as<double>(p, "mu_max", "params.");
        if (p.contains("sigma0_min")) e.params.sigma0_min = get_as<double>(p, "sigma0_min", "params.");
        if (p.contains("sigma0_max")) e.params.sigma0_max = get_as<double>(p, "sigma0_max", "params.");
        if (p.contains("shock_std"))
            e.params.shock_std = get_as<std::vector<double>>(p, "shock_std", "params.");
    }
    if (doc.contains("seed")) e.master_seed = get_as<std::uint64_t>(doc, "seed", "");
    if (doc.contains("workers")) e.workers = get_as<std::size_t>(doc, "workers", "");
    if (doc.contains("share_exploration"))
        e.share_exploration = get_as<bool>(doc, "share_exploration", "");
    if (doc.contains("out")) base.out_dir = get_as<std::string>(doc, "out", "");
    if (doc.contains("per_run")) base.per_run = get_as<bool>(doc, "per_run", "");
    if (doc.contains("trace_run")) {
        if (doc.at("trace_run").is_null())
            base.trace_run.reset();
        else
            base.trace_run = get_as<std::size_t>(doc, "trace_run", "");
    }
    return base;
}

RunOptions load_options(const std::filesystem::path& path, RunOptions base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return options_from_json(doc, std::move(base));
}

json options_to_json(const RunOptions& options) {
    const ExperimentConfig& e = options.experiment;
    json methods = json::array();
    for (Method m : e.methods) methods.push_back(std::string(method_name(m)));
    json doc = {
        {"runs", e.runs},
        {"stages", e.stages},
        {"arms", e.arms},
        {"alpha", e.alpha},
        {"epsilon", e.epsilon},
        {"lambdas", e.lambdas},
        {"methods", methods},
        {"grid", {{"min", e.grid.min}, {"max", e.grid.max}, {"count", e.grid.count}}},
        {"initial_estimate", e.initial_estimate},
        {"params",
         {{"mu_min", e.params.mu_min},
          {"mu_max", e.params.mu_max},
          {"sigma0_min", e.params.sigma0_min},
          {"sigma0_max", e.params.sigma0_max},
          {"shock_std", e.params.shock_std}}},
        {"seed", e.master_seed},
        {"workers", e.workers},
        {"share_exploration", e.share_exploration},
        {"out", options.out_dir.string()},
        {"per_run", options.per_run},
    };
    doc["trace_run"] = options.trace_run ? json(*options.trace_run) : json(nullptr);
    return doc;
}

std::vector<double> read_loss_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read loss file '" + path.string() + "'");
    std::vector<double> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        const char* begin = line.data() + first;
        const char* end = line.data() + last + 1;
        double value = 0.0;
        const auto res = std::from_chars(begin, end, value);
        if (res.ec != std::errc{} || res.ptr != end || !std::isfinite(value))
            throw ConfigError("line " + std::to_string(line_no) + " of '" + path.string() +
                              "' is not a finite number: '" + std::string(begin, end) + "'");
        out.push_back(value);
    }
    return out;
}

std::string aggregate_file_name(Method method, double lambda) {
    return "aggregate_" + std::string(method_name(method)) + "_" + format_number(lambda) + ".csv";
}

void write_metric_csv(const std::filesystem::path& path, const MetricSeries& series) {
    auto out = open_out(path);
    out << "stage,hit_rate,avg_regret,empirical_cvar\n";
    for (std::size_t t = 0; t < series.stages(); ++t)
        out << t + 1 << ',' << format_number(series.hit_rate[t]) << ','
            << format_number(series.avg_regret[t]) << ',' << format_number(series.empirical_cvar[t])
            << '\n';
    close_checked(out, path);
}

void write_sweep_csv(const std::filesystem::path& path, std::span<const SweepRow> rows) {
    auto out = open_out(path);
    out << "method,lambda,hit_rate_T,avg_regret_T,empirical_cvar_T\n";
    for (const SweepRow& r : rows)
        out << method_name(r.method) << ',' << format_number(r.lambda) << ','
            << format_number(r.hit_rate) << ',' << format_number(r.avg_regret) << ','
            << format_number(r.empirical_cvar) << '\n';
    close_checked(out, path);
}

void write_realization_csv(const std::filesystem::path& path, const RunRealization& realization) {
    auto out = open_out(path);
    out << "stage,arm,loss,true_cvar\n";
    for (std::size_t t = 0; t < realization.stages; ++t)
        for (std::size_t i = 0; i < realization.arms; ++i)
            out << t + 1 << ',' << i + 1 << ',' << format_number(realization.loss(t, i)) << ','
                << format_number(realization.cvar(t, i)) << '\n';
    close_checked(out, path);
}

void write_cvar_trace_csv(const std::filesystem::path& path, const RunRealization& realization) {
    auto out = open_out(path);
    out << "stage,arm,true_cvar,is_optimal\n";
    for (std::size_t t = 0; t < realization.stages; ++t) {
        const double* row = realization.cvar_row(t);
        const double best = *std::min_element(row, row + realization.arms);
        for (std::size_t i = 0; i < realization.arms; ++i)
            out << t + 1 << ',' << i + 1 << ',' << format_number(row[i]) << ','
                << (row[i] - best <= kOptimalTieTolerance ? 1 : 0) << '\n';
    }
    close_checked(out, path);
}

void write_json(const std::filesystem::path& path, const json& doc) {
    auto out = open_out(path);
    out << doc.dump(2) << '\n';
    close_checked(out, path);
}

std::string per_run_file_name(const Cell& cell) {
    std::string name = "per_run_" + std::string(method_name(cell.method));
    if (cell.method != Method::sample_average) name += "_" + format_number(cell.lambda);
    return name + ".csv";
}

void PerRunWriter::operator()(std::size_t run, const Cell& cell, const MetricSeries& series) {
    const std::string name = per_run_file_name(cell);
    const auto path = out_dir_ / name;
    const bool fresh = std::find(started_.begin(), started_.end(), name) == started_.end();
    auto out = open_out(path, fresh ? std::ios::out : std::ios::app);
    if (fresh) {
        started_.push_back(name);
        out << "run,stage,hit_rate,avg_regret,empirical_cvar\n";
    }
    for (std::size_t t = 0; t < series.stages(); ++t)
        out << run << ',' << t + 1 << ',' << format_number(series.hit_rate[t]) << ','
            << format_number(series.avg_regret[t]) << ',' << format_number(series.empirical_cvar[t])
            << '\n';
    close_checked(out, path);
}

}  // namespace cvarbandit::io
