#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace cvarbandit {

/// Thrown for invalid arguments to any estimator or environment routine.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Probability level of the CVaR, strictly inside (0, 1).
class ConfidenceLevel {
public:
    explicit ConfidenceLevel(double alpha);

    double value() const noexcept { return alpha_; }

private:
    double alpha_;
};

/// Relative slack applied to the alpha threshold in quantile searches, so that
/// cumulative weights that should land exactly on alpha are not lost to rounding.
inline constexpr double kCdfTolerance = 1e-12;

/// Append-only sequence of losses in observation order (index 0 = oldest).
class LossHistory {
public:
    LossHistory() = default;
    explicit LossHistory(std::vector<double> losses);

    /// Rejects non-finite losses.
    void append(double loss);

    std::span<const double> losses() const noexcept { return losses_; }
    std::size_t size() const noexcept { return losses_.size(); }
    bool empty() const noexcept { return losses_.empty(); }

private:
    std::vector<double> losses_;
};

/// Normalised exponential-decay weights; weights()[j] belongs to observation j.
struct DecayWeights {
    std::vector<double> weights;
    double lambda = 0.0;
};

struct QuantileAndCvar {
    double quantile;
    double cvar;
};

// Empirical estimators.

double empirical_cdf(const LossHistory& history, double z);
double empirical_quantile(const LossHistory& history, ConfidenceLevel alpha);
double cvar_sample_average(const LossHistory& history, ConfidenceLevel alpha);

/// w_j proportional to (1 - lambda)^(n - j). lambda = 0 gives uniform weights,
/// lambda = 1 puts all mass on the newest observation.
DecayWeights decay_weights(std::size_t n, double lambda);

double weighted_cdf(const LossHistory& history, const DecayWeights& weights, double z);
double weighted_quantile(const LossHistory& history, const DecayWeights& weights,
                         ConfidenceLevel alpha);
double cvar_weighted(const LossHistory& history, double lambda, ConfidenceLevel alpha);

/// Losses kept sorted ascending by (loss, observation index), which is the
/// order a stable sort of the history would produce. Insertion is O(n).
///
/// Both empirical estimators are evaluated on this structure, so the one-shot
/// functions above and the incremental callers (policies, metrics) share one
/// arithmetic path and agree to the bit.
class OrderedLosses {
public:
    struct Entry {
        double loss;
        std::size_t index;
    };

    OrderedLosses() = default;
    explicit OrderedLosses(std::span<const double> losses);

    void insert(double loss);
    void reserve(std::size_t n) { entries_.reserve(n); }

    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    std::span<const Entry> entries() const noexcept { return entries_; }

    /// Sample averaging: quantile Z_(ceil(alpha n)) and the mean of Z_i >= it.
    QuantileAndCvar sample_average(ConfidenceLevel alpha) const;

    /// Weighted empirical estimate. unnormalised_weight(k) must return the weight
    /// of an observation k steps older than the newest one; only ratios matter.
    template <class WeightOfAge>
    QuantileAndCvar weighted(ConfidenceLevel alpha, WeightOfAge&& unnormalised_weight) const;

private:
    QuantileAndCvar tail_from(std::size_t quantile_pos, std::span<const double> weights) const;

    std::vector<Entry> entries_;
    mutable std::vector<double> scratch_;
};

/// Powers (1 - lambda)^k for k = 0, 1, ... grown on demand by repeated
/// multiplication, so every caller sees the same rounded values.
class DecayPowers {
public:
    explicit DecayPowers(double lambda);

    double lambda() const noexcept { return lambda_; }
    double operator()(std::size_t age);

private:
    double lambda_;
    std::vector<double> powers_;
};

// Dual (Rockafellar-Uryasev) recursive estimator.

/// Strictly increasing candidate values for the auxiliary constant c.
class Grid {
public:
    explicit Grid(std::vector<double> points);
    static Grid uniform(double min, double max, std::size_t count);

    std::span<const double> points() const noexcept { return points_; }
    std::size_t size() const noexcept { return points_.size(); }
    double operator[](std::size_t m) const noexcept { return points_[m]; }

private:
    std::vector<double> points_;
};

/// c + (z - c) / (1 - alpha) when z > c, otherwise c.
double dual_auxiliary(double c, ConfidenceLevel alpha, double z) noexcept;

struct DualEstimate {
    double cvar;
    double argmin_c;
};

/// Per-arm estimates of E[f_{c,alpha}(Z)] on a shared immutable grid.
class DualState {
public:
    DualState(std::shared_ptr<const Grid> grid, ConfidenceLevel alpha,
              double initial_estimate = 0.0);
    DualState(std::shared_ptr<const Grid> grid, ConfidenceLevel alpha,
              std::vector<double> initial_estimates);

    const Grid& grid() const noexcept { return *grid_; }
    const std::shared_ptr<const Grid>& shared_grid() const noexcept { return grid_; }
    std::span<const double> estimates() const noexcept { return estimates_; }
    ConfidenceLevel alpha() const noexcept { return alpha_; }
    std::size_t update_count() const noexcept { return update_count_; }

    /// estimates[m] += lambda * (f_{c_m,alpha}(z) - estimates[m]) for every m.
    void update(double z, double lambda);

    /// Grid minimum of the estimates; ties go to the smallest c.
    DualEstimate cvar() const noexcept;

private:
    std::shared_ptr<const Grid> grid_;
    std::vector<double> estimates_;
    ConfidenceLevel alpha_;
    std::size_t update_count_ = 0;
};

DualState dual_update(DualState state, double z, double lambda);
DualEstimate dual_cvar(const DualState& state) noexcept;

void require_finite(double value, const char* what);

// ---------------------------------------------------------------------------

template <class WeightOfAge>
QuantileAndCvar OrderedLosses::weighted(ConfidenceLevel alpha,
                                        WeightOfAge&& unnormalised_weight) const {
    if (entries_.empty()) throw InvalidArgument("no observations");
    const std::size_t newest = entries_.size() - 1;
    scratch_.resize(entries_.size());
    double total = 0.0;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const double w = unnormalised_weight(newest - entries_[i].index);
        scratch_[i] = w;
        total += w;
    }
    if (!(total > 0.0)) throw InvalidArgument("all weights are zero");

    const double threshold = alpha.value() * total * (1.0 - kCdfTolerance);
    double cumulative = 0.0;
    std::size_t pos = 0;
    for (; pos < entries_.size(); ++pos) {
        cumulative += scratch_[pos];
        if (cumulative >= threshold) break;
    }
    if (pos == entries_.size()) pos = entries_.size() - 1;
    return tail_from(pos, scratch_);
}

}  // namespace cvarbandit
