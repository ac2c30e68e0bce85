#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cvarbandit/risk_core.hpp"
#include "cvarbandit/rng.hpp"

namespace cvarbandit {

struct ArmParams {
    double mu;
    double sigma0;     ///< stage-1 standard deviation
    double shock_std;  ///< std dev of the log-variance shocks
};

/// Uniform ranges for mu and sigma0 plus the per-arm shock std devs.
struct ParamSpec {
    double mu_min = 0.0;
    double mu_max = 2.0;
    double sigma0_min = 1.0;
    double sigma0_max = 2.0;
    /// One entry per arm, or a single entry shared by all arms.
    std::vector<double> shock_std = {0.08870, 0.08871, 0.08872, 0.08873,
                                     0.08874, 0.08874, 0.08872, 0.08873};

    void validate_bounds() const;
    void validate(std::size_t arms) const;
    double shock_for(std::size_t arm) const;
};

ArmParams sample_arm_params(Rng& rng, const ParamSpec& spec, std::size_t arm);

/// Gaussian arm whose variance follows sigma2_t = sigma2_{t-1} * exp(eps_t).
class ArmProcess {
public:
    explicit ArmProcess(ArmParams params);

    const ArmParams& params() const noexcept { return params_; }
    double sigma2() const noexcept { return sigma2_; }
    double sigma() const noexcept;

    void apply_shock(double log_shock) noexcept;
    void step_variance(Rng& rng);

private:
    ArmParams params_;
    double sigma2_;
};

/// mu + sigma * phi(Phi^-1(alpha)) / (1 - alpha).
double normal_cvar(double mu, double sigma, ConfidenceLevel alpha);

struct TestbedConfig {
    std::size_t stages = 2000;
    std::size_t arms = 8;
    ConfidenceLevel alpha{0.90};
    ParamSpec params{};
};

/// Every loss of every arm at every stage for one run, plus ground truth.
/// Immutable once generated; shared read-only by all policies of the run.
struct RunRealization {
    std::size_t stages = 0;
    std::size_t arms = 0;
    std::vector<double> losses;     ///< row-major stages x arms
    std::vector<double> true_cvar;  ///< row-major stages x arms
    std::vector<ArmParams> params;

    double loss(std::size_t t, std::size_t arm) const noexcept { return losses[t * arms + arm]; }
    double cvar(std::size_t t, std::size_t arm) const noexcept { return true_cvar[t * arms + arm]; }
    const double* cvar_row(std::size_t t) const noexcept { return true_cvar.data() + t * arms; }
};

/// Draws a run from the (master_seed, run) substreams. Within each stage the
/// true CVaR is recorded, the loss drawn, and only then the variance shocked.
RunRealization generate_run(std::uint64_t master_seed, std::uint64_t run,
                            const TestbedConfig& config);

bool operator==(const ArmParams& a, const ArmParams& b) noexcept;
bool operator==(const RunRealization& a, const RunRealization& b) noexcept;

}  // namespace cvarbandit
