#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cvarbandit/risk_core.hpp"
#include "cvarbandit/rng.hpp"

namespace cvarbandit {

enum class Method { sample_average, weighted_empirical, dual_recursive };

std::string_view method_name(Method m) noexcept;
/// Accepts the canonical names plus the short aliases "sample", "weighted", "dual".
std::optional<Method> parse_method(std::string_view name) noexcept;

struct GridSpec {
    double min = -100.0;
    double max = 350.0;
    std::size_t count = 2000;
};

struct PolicyConfig {
    double epsilon = 0.05;
    ConfidenceLevel alpha{0.90};
    Method method = Method::sample_average;
    double lambda = 0.5;  ///< ignored by sample averaging
    GridSpec grid{};
    double initial_estimate = 0.0;

    void validate() const;
};

/// Epsilon-greedy arm selection on top of one CVaR estimator.
///
/// Two policy-owned streams drive the randomness: `exploration` yields the
/// Bernoulli(epsilon) flag and the uniform exploratory arm, both drawn at
/// every stage so that exploration timing does not depend on the estimator;
/// `tie_break` resolves ties among greedy candidates uniformly.
class EpsilonGreedyPolicy {
public:
    EpsilonGreedyPolicy(PolicyConfig config, std::size_t arms, Rng exploration, Rng tie_break,
                        std::shared_ptr<const Grid> grid = nullptr);

    std::size_t arms() const noexcept { return estimates_.size(); }
    const PolicyConfig& config() const noexcept { return config_; }

    /// Cached CVaR estimate of every arm.
    std::span<const double> estimates() const noexcept { return estimates_; }
    std::size_t observation_count(std::size_t arm) const;

    std::size_t greedy_action();
    std::size_t select_action();

    /// Absorbs the loss of the arm sampled this stage; other arms are untouched.
    void observe(std::size_t arm, double loss);

    const OrderedLosses& history(std::size_t arm) const;
    const DualState& dual_state(std::size_t arm) const;

private:
    PolicyConfig config_;
    Rng exploration_;
    Rng tie_break_;
    std::vector<double> estimates_;
    std::vector<OrderedLosses> histories_;  // empirical methods
    std::vector<DualState> duals_;          // dual method
    std::vector<std::size_t> counts_;
    std::optional<DecayPowers> powers_;
    std::vector<std::size_t> ties_;
};

}  // namespace cvarbandit
