#include "cvarbandit/policy.hpp"

#include <string>

namespace cvarbandit {

std::string_view method_name(Method m) noexcept {
    switch (m) {
        case Method::sample_average: return "sample_average";
        case Method::weighted_empirical: return "weighted_empirical";
        case Method::dual_recursive: return "dual_recursive";
    }
    return "unknown";
}

std::optional<Method> parse_method(std::string_view name) noexcept {
    if (name == "sample_average" || name == "sample" || name == "average")
        return Method::sample_average;
    if (name == "weighted_empirical" || name == "weighted") return Method::weighted_empirical;
    if (name == "dual_recursive" || name == "dual") return Method::dual_recursive;
    return std::nullopt;
}

void PolicyConfig::validate() const {
    if (!(epsilon >= 0.0 && epsilon <= 1.0))
        throw InvalidArgument("epsilon must lie in [0, 1], got " + std::to_string(epsilon));
    require_finite(initial_estimate, "initial estimate");
    switch (method) {
        case Method::sample_average: break;
        case Method::weighted_empirical:
            if (!(lambda >= 0.0 && lambda <= 1.0))
                throw InvalidArgument("weighted decay rate must lie in [0, 1], got " +
                                      std::to_string(lambda));
            break;
        case Method::dual_recursive:
            if (!(lambda > 0.0 && lambda <= 1.0))
                throw InvalidArgument("dual learning rate must lie in (0, 1], got " +
                                      std::to_string(lambda));
            if (grid.count < 2) throw InvalidArgument("grid count must be at least 2");
            break;
    }
}

EpsilonGreedyPolicy::EpsilonGreedyPolicy(PolicyConfig config, std::size_t arms, Rng exploration,
                                         Rng tie_break, std::shared_ptr<const Grid> grid)
    : config_(config),
      exploration_(std::move(exploration)),
      tie_break_(std::move(tie_break)),
      estimates_(arms, config.initial_estimate),
      counts_(arms, 0) {
    if (arms == 0) throw InvalidArgument("policy needs at least one arm");
    config_.validate();
    if (config_.method == Method::dual_recursive) {
        if (!grid)
            grid = std::make_shared<const Grid>(
                Grid::uniform(config_.grid.min, config_.grid.max, config_.grid.count));
        duals_.reserve(arms);
        for (std::size_t i = 0; i < arms; ++i)
            duals_.emplace_back(grid, config_.alpha, config_.initial_estimate);
    } else {
        histories_.resize(arms);
        if (config_.method == Method::weighted_empirical) powers_.emplace(config_.lambda);
    }
    ties_.reserve(arms);
}

std::size_t EpsilonGreedyPolicy::observation_count(std::size_t arm) const {
    return counts_.at(arm);
}

const OrderedLosses& EpsilonGreedyPolicy::history(std::size_t arm) const {
    if (histories_.empty()) throw InvalidArgument("dual policies keep no loss history");
    return histories_.at(arm);
}

const DualState& EpsilonGreedyPolicy::dual_state(std::size_t arm) const {
    if (duals_.empty()) throw InvalidArgument("only dual policies keep a dual state");
    return duals_.at(arm);
}

std::size_t EpsilonGreedyPolicy::greedy_action() {
    double best = estimates_[0];
    ties_.assign(1, 0);
    for (std::size_t i = 1; i < estimates_.size(); ++i) {
        if (estimates_[i] < best) {
            best = estimates_[i];
            ties_.assign(1, i);
        } else if (estimates_[i] == best) {
            ties_.push_back(i);
        }
    }
    if (ties_.size() == 1) return ties_.front();
    std::uniform_int_distribution<std::size_t> pick(0, ties_.size() - 1);
    return ties_[pick(tie_break_)];
}

std::size_t EpsilonGreedyPolicy::select_action() {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> any_arm(0, arms() - 1);
    const bool explore = unit(exploration_) < config_.epsilon;
    const std::size_t random_arm = any_arm(exploration_);
    return explore ? random_arm : greedy_action();
}

void EpsilonGreedyPolicy::observe(std::size_t arm, double loss) {
    require_finite(loss, "loss");
    if (arm >= arms()) throw InvalidArgument("arm index out of range");
    ++counts_[arm];
    switch (config_.method) {
        case Method::sample_average:
            histories_[arm].insert(loss);
            estimates_[arm] = histories_[arm].sample_average(config_.alpha).cvar;
            break;
        case Method::weighted_empirical:
            histories_[arm].insert(loss);
            estimates_[arm] = histories_[arm].weighted(config_.alpha, *powers_).cvar;
            break;
        case Method::dual_recursive:
            duals_[arm].update(loss, config_.lambda);
            estimates_[arm] = duals_[arm].cvar().cvar;
            break;
    }
}

}  // namespace cvarbandit
