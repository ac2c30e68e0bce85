#include "cvarbandit/risk_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cvarbandit {

void require_finite(double value, const char* what) {
    if (!std::isfinite(value)) throw InvalidArgument(std::string(what) + " must be finite");
}

ConfidenceLevel::ConfidenceLevel(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw InvalidArgument("confidence level must lie in (0, 1), got " + std::to_string(alpha));
}

LossHistory::LossHistory(std::vector<double> losses) : losses_(std::move(losses)) {
    for (double z : losses_) require_finite(z, "loss");
}

void LossHistory::append(double loss) {
    require_finite(loss, "loss");
    losses_.push_back(loss);
}

namespace {

void require_nonempty(const LossHistory& history) {
    if (history.empty()) throw InvalidArgument("no observations");
}

void require_matching(const LossHistory& history, const DecayWeights& weights) {
    require_nonempty(history);
    if (weights.weights.size() != history.size())
        throw InvalidArgument("weights length " + std::to_string(weights.weights.size()) +
                              " does not match history length " + std::to_string(history.size()));
}

void require_rate(double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw InvalidArgument("decay rate must lie in [0, 1], got " + std::to_string(lambda));
}

}  // namespace

double empirical_cdf(const LossHistory& history, double z) {
    require_nonempty(history);
    const auto losses = history.losses();
    const auto count = std::count_if(losses.begin(), losses.end(), [z](double x) { return x <= z; });
    return static_cast<double>(count) / static_cast<double>(losses.size());
}

double empirical_quantile(const LossHistory& history, ConfidenceLevel alpha) {
    require_nonempty(history);
    return OrderedLosses(history.losses()).sample_average(alpha).quantile;
}

double cvar_sample_average(const LossHistory& history, ConfidenceLevel alpha) {
    require_nonempty(history);
    return OrderedLosses(history.losses()).sample_average(alpha).cvar;
}

DecayWeights decay_weights(std::size_t n, double lambda) {
    if (n == 0) throw InvalidArgument("decay weights need at least one observation");
    require_rate(lambda);
    DecayWeights out{std::vector<double>(n, 0.0), lambda};
    auto& w = out.weights;
    if (lambda == 0.0) {
        std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(n));
    } else if (lambda == 1.0) {
        w.back() = 1.0;
    } else {
        // lambda / (1 - (1 - lambda)^n), evaluated without cancellation for small lambda.
        const double mass = -std::expm1(static_cast<double>(n) * std::log1p(-lambda));
        w.back() = lambda / mass;
        for (std::size_t j = n - 1; j-- > 0;) w[j] = (1.0 - lambda) * w[j + 1];
    }
    return out;
}

double weighted_cdf(const LossHistory& history, const DecayWeights& weights, double z) {
    require_matching(history, weights);
    const auto losses = history.losses();
    double acc = 0.0;
    for (std::size_t s = 0; s < losses.size(); ++s)
        if (losses[s] <= z) acc += weights.weights[s];
    return acc;
}

double weighted_quantile(const LossHistory& history, const DecayWeights& weights,
                         ConfidenceLevel alpha) {
    require_matching(history, weights);
    for (double w : weights.weights)
        if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("weights must be finite and nonnegative");
    const std::size_t newest = history.size() - 1;
    return OrderedLosses(history.losses())
        .weighted(alpha, [&](std::size_t age) { return weights.weights[newest - age]; })
        .quantile;
}

double cvar_weighted(const LossHistory& history, double lambda, ConfidenceLevel alpha) {
    require_nonempty(history);
    require_rate(lambda);
    DecayPowers powers(lambda);
    return OrderedLosses(history.losses()).weighted(alpha, powers).cvar;
}

// OrderedLosses

OrderedLosses::OrderedLosses(std::span<const double> losses) {
    entries_.reserve(losses.size());
    for (std::size_t i = 0; i < losses.size(); ++i) entries_.push_back({losses[i], i});
    std::stable_sort(entries_.begin(), entries_.end(),
                     [](const Entry& a, const Entry& b) { return a.loss < b.loss; });
}

void OrderedLosses::insert(double loss) {
    require_finite(loss, "loss");
    // upper_bound keeps the newest observation after any equal losses.
    auto at = std::upper_bound(entries_.begin(), entries_.end(), loss,
                               [](double z, const Entry& e) { return z < e.loss; });
    entries_.insert(at, Entry{loss, entries_.size()});
}

QuantileAndCvar OrderedLosses::sample_average(ConfidenceLevel alpha) const {
    if (entries_.empty()) throw InvalidArgument("no observations");
    const double n = static_cast<double>(entries_.size());
    const double rank = std::ceil(alpha.value() * n * (1.0 - kCdfTolerance));
    const std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(rank), 1, entries_.size());
    return tail_from(k - 1, {});
}

QuantileAndCvar OrderedLosses::tail_from(std::size_t quantile_pos,
                                         std::span<const double> weights) const {
    const double q = entries_[quantile_pos].loss;
    std::size_t start = quantile_pos;
    while (start > 0 && entries_[start - 1].loss == q) --start;

    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = start; i < entries_.size(); ++i) {
        const double w = weights.empty() ? 1.0 : weights[i];
        num += w * entries_[i].loss;
        den += w;
    }
    return {q, num / den};
}

// DecayPowers

DecayPowers::DecayPowers(double lambda) : lambda_(lambda), powers_{1.0} {
    require_rate(lambda);
}

double DecayPowers::operator()(std::size_t age) {
    const double ratio = 1.0 - lambda_;
    while (powers_.size() <= age) powers_.push_back(powers_.back() * ratio);
    return powers_[age];
}

// Grid

Grid::Grid(std::vector<double> points) : points_(std::move(points)) {
    if (points_.size() < 2) throw InvalidArgument("grid needs at least two points");
    for (std::size_t m = 0; m < points_.size(); ++m) {
        require_finite(points_[m], "grid point");
        if (m > 0 && !(points_[m] > points_[m - 1]))
            throw InvalidArgument("grid must be strictly increasing");
    }
}

Grid Grid::uniform(double min, double max, std::size_t count) {
    if (count < 2) throw InvalidArgument("grid needs at least two points");
    if (!(max > min)) throw InvalidArgument("grid max must exceed grid min");
    std::vector<double> points(count);
    const double step = (max - min) / static_cast<double>(count - 1);
    for (std::size_t m = 0; m < count; ++m) points[m] = min + step * static_cast<double>(m);
    points.back() = max;
    return Grid(std::move(points));
}

// Dual recursive estimator

double dual_auxiliary(double c, ConfidenceLevel alpha, double z) noexcept {
    return z > c ? c + (z - c) / (1.0 - alpha.value()) : c;
}

DualState::DualState(std::shared_ptr<const Grid> grid, ConfidenceLevel alpha,
                     double initial_estimate)
    : grid_(std::move(grid)), alpha_(alpha) {
    if (!grid_) throw InvalidArgument("dual state needs a grid");
    require_finite(initial_estimate, "initial estimate");
    estimates_.assign(grid_->size(), initial_estimate);
}

DualState::DualState(std::shared_ptr<const Grid> grid, ConfidenceLevel alpha,
                     std::vector<double> initial_estimates)
    : grid_(std::move(grid)), estimates_(std::move(initial_estimates)), alpha_(alpha) {
    if (!grid_) throw InvalidArgument("dual state needs a grid");
    if (estimates_.size() != grid_->size())
        throw InvalidArgument("initial estimates must have one entry per grid point");
    for (double e : estimates_) require_finite(e, "initial estimate");
}

void DualState::update(double z, double lambda) {
    if (!(lambda > 0.0 && lambda <= 1.0))
        throw InvalidArgument("learning rate must lie in (0, 1], got " + std::to_string(lambda));
    require_finite(z, "loss");

    const double* c = grid_->points().data();
    double* e = estimates_.data();
    const std::size_t m_count = estimates_.size();
    const double tail_scale = 1.0 - alpha_.value();
#pragma omp simd
    for (std::size_t m = 0; m < m_count; ++m) {
        const double target = z > c[m] ? c[m] + (z - c[m]) / tail_scale : c[m];
        e[m] += lambda * (target - e[m]);
    }
    ++update_count_;
}

DualEstimate DualState::cvar() const noexcept {
    std::size_t best = 0;
    for (std::size_t m = 1; m < estimates_.size(); ++m)
        if (estimates_[m] < estimates_[best]) best = m;
    return {estimates_[best], (*grid_)[best]};
}

DualState dual_update(DualState state, double z, double lambda) {
    state.update(z, lambda);
    return state;
}

DualEstimate dual_cvar(const DualState& state) noexcept { return state.cvar(); }

}  // namespace cvarbandit
