#include "cvarbandit/metrics.hpp"

#include <algorithm>

namespace cvarbandit {

void RunTrajectory::validate() const {
    if (arms == 0) throw InvalidArgument("trajectory has no arms");
    if (incurred_losses.size() != actions.size())
        throw InvalidArgument("actions and incurred losses differ in length");
    if (true_cvar.size() != actions.size() * arms)
        throw InvalidArgument("true CVaR matrix does not match stages x arms");
    for (std::size_t a : actions)
        if (a >= arms) throw InvalidArgument("action index out of range");
}

bool operator==(const MetricSeries& a, const MetricSeries& b) noexcept {
    return a.hit_rate == b.hit_rate && a.avg_regret == b.avg_regret &&
           a.empirical_cvar == b.empirical_cvar;
}

namespace {

double stage_min(std::span<const double> row) { return *std::min_element(row.begin(), row.end()); }

std::span<const double> row_of(const RunTrajectory& traj, std::size_t t) {
    return traj.true_cvar.subspan(t * traj.arms, traj.arms);
}

}  // namespace

std::vector<double> hit_rate_series(const RunTrajectory& traj) {
    traj.validate();
    std::vector<double> out(traj.stages());
    std::size_t hits = 0;
    for (std::size_t t = 0; t < traj.stages(); ++t) {
        const auto row = row_of(traj, t);
        if (row[traj.actions[t]] - stage_min(row) <= kOptimalTieTolerance) ++hits;
        out[t] = static_cast<double>(hits) / static_cast<double>(t + 1);
    }
    return out;
}

std::vector<double> average_regret_series(const RunTrajectory& traj) {
    traj.validate();
    std::vector<double> out(traj.stages());
    double regret = 0.0;
    for (std::size_t t = 0; t < traj.stages(); ++t) {
        const auto row = row_of(traj, t);
        regret += row[traj.actions[t]] - stage_min(row);
        out[t] = regret / static_cast<double>(t + 1);
    }
    return out;
}

std::vector<double> empirical_cvar_series(const RunTrajectory& traj, ConfidenceLevel alpha) {
    traj.validate();
    std::vector<double> out(traj.stages());
    OrderedLosses prefix;
    prefix.reserve(traj.stages());
    for (std::size_t t = 0; t < traj.stages(); ++t) {
        prefix.insert(traj.incurred_losses[t]);
        out[t] = prefix.sample_average(alpha).cvar;
    }
    return out;
}

MetricSeries compute_metrics(const RunTrajectory& traj, ConfidenceLevel alpha) {
    return {hit_rate_series(traj), average_regret_series(traj), empirical_cvar_series(traj, alpha)};
}

}  // namespace cvarbandit
