#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cvarbandit/risk_core.hpp"

namespace cvarbandit {

/// Arms whose true CVaR is within this of the stage minimum count as optimal.
inline constexpr double kOptimalTieTolerance = 1e-12;

/// One run of one policy: chosen arms (0-based), incurred losses, and the
/// stages x arms ground-truth CVaR matrix (row-major).
struct RunTrajectory {
    std::vector<std::size_t> actions;
    std::vector<double> incurred_losses;
    std::span<const double> true_cvar;
    std::size_t arms = 0;

    std::size_t stages() const noexcept { return actions.size(); }
    void validate() const;
};

struct MetricSeries {
    std::vector<double> hit_rate;
    std::vector<double> avg_regret;
    std::vector<double> empirical_cvar;

    std::size_t stages() const noexcept { return hit_rate.size(); }
};

bool operator==(const MetricSeries& a, const MetricSeries& b) noexcept;

std::vector<double> hit_rate_series(const RunTrajectory& traj);
std::vector<double> average_regret_series(const RunTrajectory& traj);
std::vector<double> empirical_cvar_series(const RunTrajectory& traj, ConfidenceLevel alpha);

MetricSeries compute_metrics(const RunTrajectory& traj, ConfidenceLevel alpha);

}  // namespace cvarbandit
