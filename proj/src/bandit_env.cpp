#include "cvarbandit/bandit_env.hpp"

#include <cmath>
#include <string>

#include "cvarbandit/normal.hpp"

namespace cvarbandit {

void ParamSpec::validate_bounds() const {
    for (double v : {mu_min, mu_max, sigma0_min, sigma0_max}) require_finite(v, "parameter bound");
    if (mu_min > mu_max) throw InvalidArgument("mu_min exceeds mu_max");
    if (sigma0_min > sigma0_max) throw InvalidArgument("sigma0_min exceeds sigma0_max");
    if (!(sigma0_min > 0.0)) throw InvalidArgument("sigma0 bounds must be positive");
}

void ParamSpec::validate(std::size_t arms) const {
    validate_bounds();
    if (shock_std.size() != 1 && shock_std.size() != arms)
        throw InvalidArgument("shock_std has " + std::to_string(shock_std.size()) +
                              " entries but the testbed has " + std::to_string(arms) + " arms");
    for (double s : shock_std)
        if (!(s >= 0.0) || !std::isfinite(s)) throw InvalidArgument("shock_std must be finite and >= 0");
}

double ParamSpec::shock_for(std::size_t arm) const {
    return shock_std.size() == 1 ? shock_std.front() : shock_std.at(arm);
}

ArmParams sample_arm_params(Rng& rng, const ParamSpec& spec, std::size_t arm) {
    spec.validate_bounds();
    if (spec.shock_std.size() != 1 && arm >= spec.shock_std.size())
        throw InvalidArgument("no shock_std entry for arm " + std::to_string(arm));
    std::uniform_real_distribution<double> mu(spec.mu_min, spec.mu_max);
    std::uniform_real_distribution<double> sigma(spec.sigma0_min, spec.sigma0_max);
    ArmParams p{};
    p.mu = mu(rng);
    p.sigma0 = sigma(rng);
    p.shock_std = spec.shock_for(arm);
    return p;
}

ArmProcess::ArmProcess(ArmParams params) : params_(params), sigma2_(params.sigma0 * params.sigma0) {
    if (!(params.sigma0 > 0.0)) throw InvalidArgument("sigma0 must be positive");
    if (!(params.shock_std >= 0.0)) throw InvalidArgument("shock_std must be nonnegative");
}

double ArmProcess::sigma() const noexcept { return std::sqrt(sigma2_); }

void ArmProcess::apply_shock(double log_shock) noexcept { sigma2_ *= std::exp(log_shock); }

void ArmProcess::step_variance(Rng& rng) {
    std::normal_distribution<double> standard(0.0, 1.0);
    apply_shock(params_.shock_std * standard(rng));
}

double normal_cvar(double mu, double sigma, ConfidenceLevel alpha) {
    if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
    const double a = alpha.value();
    return mu + sigma * (normal_pdf(normal_quantile(a)) / (1.0 - a));
}

RunRealization generate_run(std::uint64_t master_seed, std::uint64_t run,
                            const TestbedConfig& config) {
    if (config.stages == 0) throw InvalidArgument("stages must be positive");
    if (config.arms == 0) throw InvalidArgument("arms must be positive");
    config.params.validate(config.arms);

    const std::size_t T = config.stages;
    const std::size_t K = config.arms;
    RunRealization out;
    out.stages = T;
    out.arms = K;
    out.losses.resize(T * K);
    out.true_cvar.resize(T * K);
    out.params.reserve(K);

    Rng param_rng = make_stream(master_seed, run, Stream::arm_params);
    Rng loss_rng = make_stream(master_seed, run, Stream::loss_draws);
    Rng shock_rng = make_stream(master_seed, run, Stream::variance_shocks);

    std::vector<ArmProcess> arms;
    arms.reserve(K);
    for (std::size_t i = 0; i < K; ++i) {
        out.params.push_back(sample_arm_params(param_rng, config.params, i));
        arms.emplace_back(out.params.back());
    }

    // The CVaR factor phi(Phi^-1(alpha)) / (1 - alpha) is the same for every arm and stage.
    const double unit_cvar = normal_cvar(0.0, 1.0, config.alpha);
    std::normal_distribution<double> standard(0.0, 1.0);
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t i = 0; i < K; ++i) {
            const double sigma = arms[i].sigma();
            const double mu = arms[i].params().mu;
            out.true_cvar[t * K + i] = mu + sigma * unit_cvar;
            out.losses[t * K + i] = mu + sigma * standard(loss_rng);
        }
        for (auto& arm : arms) arm.step_variance(shock_rng);
    }
    return out;
}

bool operator==(const ArmParams& a, const ArmParams& b) noexcept {
    return a.mu == b.mu && a.sigma0 == b.sigma0 && a.shock_std == b.shock_std;
}

bool operator==(const RunRealization& a, const RunRealization& b) noexcept {
    return a.stages == b.stages && a.arms == b.arms && a.losses == b.losses &&
           a.true_cvar == b.true_cvar && a.params == b.params;
}

}  // namespace cvarbandit
