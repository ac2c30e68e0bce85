#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "cvarbandit/risk_core.hpp"
#include "oracles.hpp"

using namespace cvarbandit;

namespace {

LossHistory hist(std::vector<double> z) { return LossHistory(std::move(z)); }
const ConfidenceLevel a90{0.9};

std::vector<double> random_losses(std::mt19937_64& rng, std::size_t n, bool with_ties) {
    std::normal_distribution<double> normal(1.0, 2.0);
    std::uniform_int_distribution<int> small(0, 5);
    std::vector<double> z(n);
    for (auto& x : z) x = with_ties ? static_cast<double>(small(rng)) : normal(rng);
    return z;
}

}  // namespace

TEST(ConfidenceLevel, RejectsOutsideOpenInterval) {
    EXPECT_THROW(ConfidenceLevel(0.0), InvalidArgument);
    EXPECT_THROW(ConfidenceLevel(1.0), InvalidArgument);
    EXPECT_THROW(ConfidenceLevel(-0.1), InvalidArgument);
    EXPECT_THROW(ConfidenceLevel(std::nan("")), InvalidArgument);
    EXPECT_DOUBLE_EQ(ConfidenceLevel(0.95).value(), 0.95);
}

TEST(LossHistory, RejectsNonFinite) {
    LossHistory h;
    EXPECT_THROW(h.append(std::nan("")), InvalidArgument);
    EXPECT_THROW(h.append(INFINITY), InvalidArgument);
    EXPECT_THROW(LossHistory({1.0, -INFINITY}), InvalidArgument);
    h.append(1.5);
    EXPECT_EQ(h.size(), 1u);
}

// Empirical cdf / quantile / sample averaging

TEST(EmpiricalCdf, Examples) {
    EXPECT_DOUBLE_EQ(empirical_cdf(hist({1, 2, 3}), 2.0), 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(empirical_cdf(hist({5}), 4.9), 0.0);
    EXPECT_DOUBLE_EQ(empirical_cdf(hist({1, 1, 2}), 1.0), 2.0 / 3.0);
    EXPECT_THROW(empirical_cdf(LossHistory{}, 0.0), InvalidArgument);
}

TEST(EmpiricalQuantile, Examples) {
    EXPECT_DOUBLE_EQ(empirical_quantile(hist({10, 1, 2, 3, 4, 5, 6, 7, 8, 9}), a90), 9.0);
    EXPECT_DOUBLE_EQ(empirical_quantile(hist({7}), ConfidenceLevel(0.01)), 7.0);
    EXPECT_DOUBLE_EQ(empirical_quantile(hist({7}), ConfidenceLevel(0.99)), 7.0);
    EXPECT_DOUBLE_EQ(empirical_quantile(hist({1, 2, 3, 4}), ConfidenceLevel(0.5)), 2.0);
    EXPECT_THROW(empirical_quantile(LossHistory{}, a90), InvalidArgument);
}

TEST(EmpiricalQuantile, MatchesInfOfCdf) {
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 200; ++rep) {
        const auto z = random_losses(rng, 1 + rep % 37, rep % 2 == 0);
        const LossHistory h(z);
        for (double alpha : {0.1, 0.5, 0.9, 0.95}) {
            const double q = empirical_quantile(h, ConfidenceLevel(alpha));
            EXPECT_GE(empirical_cdf(h, q), alpha - 1e-12);
            for (double x : z)
                if (x < q) EXPECT_LT(empirical_cdf(h, x), alpha);
        }
    }
}

TEST(CvarSampleAverage, Examples) {
    EXPECT_DOUBLE_EQ(cvar_sample_average(hist({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}), a90), 9.5);
    EXPECT_DOUBLE_EQ(cvar_sample_average(hist({3.25, 3.25, 3.25}), ConfidenceLevel(0.3)), 3.25);
    EXPECT_DOUBLE_EQ(cvar_sample_average(hist({1, 2, 3, 4}), ConfidenceLevel(0.5)), 3.0);
    EXPECT_THROW(cvar_sample_average(LossHistory{}, a90), InvalidArgument);
}

TEST(CvarSampleAverage, IncludesAllTiesAtQuantile) {
    // q = 2 (3rd order statistic of 4); every 2 joins the tail.
    EXPECT_DOUBLE_EQ(cvar_sample_average(hist({2, 2, 2, 5}), ConfidenceLevel(0.75)), 11.0 / 4.0);
}

TEST(CvarSampleAverage, AgreesWithNaiveOracle) {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 300; ++rep) {
        const auto z = random_losses(rng, 1 + rep % 61, rep % 3 == 0);
        for (double alpha : {0.5, 0.9, 0.95})
            EXPECT_NEAR(cvar_sample_average(LossHistory(z), ConfidenceLevel(alpha)),
                        oracle::cvar_sample_average_naive(z, alpha), 1e-12);
    }
}

// Decay weights

TEST(DecayWeights, Examples) {
    const auto w = decay_weights(3, 0.5).weights;
    ASSERT_EQ(w.size(), 3u);
    EXPECT_NEAR(w[0], 1.0 / 7.0, 1e-15);
    EXPECT_NEAR(w[1], 2.0 / 7.0, 1e-15);
    EXPECT_NEAR(w[2], 4.0 / 7.0, 1e-15);
    EXPECT_EQ(decay_weights(4, 0.0).weights, std::vector<double>(4, 0.25));
    EXPECT_EQ(decay_weights(2, 1.0).weights, (std::vector<double>{0.0, 1.0}));
}

TEST(DecayWeights, Errors) {
    EXPECT_THROW(decay_weights(0, 0.5), InvalidArgument);
    EXPECT_THROW(decay_weights(3, -0.01), InvalidArgument);
    EXPECT_THROW(decay_weights(3, 1.01), InvalidArgument);
}

TEST(DecayWeights, NormalisedAndGeometric) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::size_t> len(1, 10000);
    std::uniform_real_distribution<double> rate(0.0, 1.0);
    std::vector<std::pair<std::size_t, double>> cases = {{1, 0.3}, {10000, 1e-6}, {10000, 0.0},
                                                         {10000, 1.0}, {10000, 0.999}, {2, 0.5}};
    for (int i = 0; i < 200; ++i) cases.emplace_back(len(rng), rate(rng));
    for (auto [n, lambda] : cases) {
        const auto w = decay_weights(n, lambda).weights;
        ASSERT_EQ(w.size(), n);
        double sum = 0.0;
        for (double x : w) {
            EXPECT_GE(x, 0.0);
            sum += x;
        }
        EXPECT_NEAR(sum, 1.0, 1e-12) << "n=" << n << " lambda=" << lambda;
        if (lambda > 0.0 && lambda < 1.0)
            for (std::size_t j = 0; j + 1 < n; ++j) ASSERT_EQ(w[j], (1.0 - lambda) * w[j + 1]);
    }
}

// Weighted estimator

TEST(WeightedCdf, Examples) {
    const auto h = hist({1, 2, 3});
    EXPECT_NEAR(weighted_cdf(h, decay_weights(3, 0.5), 2.0), 3.0 / 7.0, 1e-15);
    EXPECT_DOUBLE_EQ(weighted_cdf(hist({5}), decay_weights(1, 0.3), 5.0), 1.0);
    const auto h2 = hist({4, -1, 2, 2, 9});
    for (double z : {-2.0, -1.0, 2.0, 3.0, 9.0})
        EXPECT_NEAR(weighted_cdf(h2, decay_weights(5, 0.0), z), empirical_cdf(h2, z), 1e-15);
    EXPECT_THROW(weighted_cdf(h, decay_weights(2, 0.5), 0.0), InvalidArgument);
}

TEST(WeightedQuantile, Examples) {
    const auto h = hist({1, 2, 3});
    const auto w = decay_weights(3, 0.5);
    EXPECT_DOUBLE_EQ(weighted_quantile(h, w, a90), 3.0);
    EXPECT_DOUBLE_EQ(weighted_quantile(h, w, ConfidenceLevel(0.4)), 2.0);
    EXPECT_DOUBLE_EQ(weighted_quantile(hist({-4.5}), decay_weights(1, 0.9), ConfidenceLevel(0.2)), -4.5);
    EXPECT_THROW(weighted_quantile(h, DecayWeights{{0, 0, 0}, 0.5}, a90), InvalidArgument);
    EXPECT_THROW(weighted_quantile(h, decay_weights(4, 0.5), a90), InvalidArgument);
}

TEST(WeightedQuantile, IsAnObservationSatisfyingInf) {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 200; ++rep) {
        const auto z = random_losses(rng, 1 + rep % 50, rep % 2 == 1);
        const LossHistory h(z);
        const auto w = decay_weights(z.size(), (rep % 10) / 10.0);
        for (double alpha : {0.3, 0.9}) {
            const double q = weighted_quantile(h, w, ConfidenceLevel(alpha));
            EXPECT_NE(std::find(z.begin(), z.end(), q), z.end());
            EXPECT_GE(weighted_cdf(h, w, q), alpha * (1 - 1e-9));
            for (double x : z)
                if (x < q) EXPECT_LT(weighted_cdf(h, w, x), alpha);
        }
    }
}

TEST(CvarWeighted, Examples) {
    EXPECT_NEAR(cvar_weighted(hist({1, 2, 3}), 0.5, ConfidenceLevel(0.4)), 8.0 / 3.0, 1e-15);
    EXPECT_DOUBLE_EQ(cvar_weighted(hist({1, 2, 3}), 1.0, a90), 3.0);
    EXPECT_DOUBLE_EQ(cvar_weighted(hist({1, 2, 3}), 1.0, ConfidenceLevel(0.05)), 3.0);
    EXPECT_DOUBLE_EQ(cvar_weighted(hist({5, 9, -2}), 1.0, ConfidenceLevel(0.05)), -2.0);
    EXPECT_THROW(cvar_weighted(LossHistory{}, 0.5, a90), InvalidArgument);
    EXPECT_THROW(cvar_weighted(hist({1}), 1.5, a90), InvalidArgument);
}

TEST(CvarWeighted, AgreesWithNaiveOracle) {
    std::mt19937_64 rng(13);
    for (int rep = 0; rep < 300; ++rep) {
        const auto z = random_losses(rng, 1 + rep % 80, false);
        for (double lambda : {0.01, 0.3, 0.5, 0.9})
            for (double alpha : {0.5, 0.9, 0.95})
                EXPECT_NEAR(cvar_weighted(LossHistory(z), lambda, ConfidenceLevel(alpha)),
                            oracle::cvar_weighted_naive(z, lambda, alpha), 1e-9);
    }
}

// Properties shared by both empirical estimators.

TEST(EmpiricalEstimators, ZeroDecayEqualsSampleAverageExactly) {
    std::mt19937_64 rng(17);
    for (int rep = 0; rep < 500; ++rep) {
        const auto z = random_losses(rng, 1 + rep % 200, rep % 4 == 0);
        const LossHistory h(z);
        for (double alpha : {0.5, 0.9, 0.95}) {
            const ConfidenceLevel a(alpha);
            ASSERT_EQ(cvar_weighted(h, 0.0, a), cvar_sample_average(h, a));
        }
    }
}

TEST(EmpiricalEstimators, MonotoneInAlphaAndDominateQuantile) {
    std::mt19937_64 rng(19);
    const std::vector<double> alphas = {0.05, 0.2, 0.5, 0.7, 0.9, 0.95, 0.99};
    for (int rep = 0; rep < 200; ++rep) {
        const auto z = random_losses(rng, 1 + rep % 100, rep % 3 == 0);
        const LossHistory h(z);
        const double lambda = (rep % 7) / 7.0;
        const auto w = decay_weights(z.size(), lambda);
        double prev_avg = -INFINITY, prev_w = -INFINITY;
        for (double alpha : alphas) {
            const ConfidenceLevel a(alpha);
            const double avg = cvar_sample_average(h, a);
            const double wtd = cvar_weighted(h, lambda, a);
            EXPECT_GE(avg, prev_avg);
            EXPECT_GE(wtd, prev_w - 1e-12);
            EXPECT_GE(avg, empirical_quantile(h, a));
            EXPECT_GE(wtd, weighted_quantile(h, w, a) - 1e-12);
            prev_avg = avg;
            prev_w = wtd;
        }
    }
}

TEST(EmpiricalEstimators, TranslationAndScaling) {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> shift(-50.0, 50.0), scale(0.1, 10.0);
    for (int rep = 0; rep < 200; ++rep) {
        const auto z = random_losses(rng, 1 + rep % 90, rep % 2 == 0);
        const double m = shift(rng), k = scale(rng);
        std::vector<double> shifted(z), scaled(z);
        for (auto& x : shifted) x += m;
        for (auto& x : scaled) x *= k;
        for (double alpha : {0.5, 0.9}) {
            const ConfidenceLevel a(alpha);
            const double lambda = 0.25;
            const double base_avg = cvar_sample_average(LossHistory(z), a);
            const double base_w = cvar_weighted(LossHistory(z), lambda, a);
            const double tol = 1e-10 * (1 + std::abs(m) + k);
            EXPECT_NEAR(cvar_sample_average(LossHistory(shifted), a), base_avg + m, tol);
            EXPECT_NEAR(cvar_weighted(LossHistory(shifted), lambda, a), base_w + m, tol);
            EXPECT_NEAR(cvar_sample_average(LossHistory(scaled), a), base_avg * k, tol * 10);
            EXPECT_NEAR(cvar_weighted(LossHistory(scaled), lambda, a), base_w * k, tol * 10);
        }
    }
}

TEST(OrderedLosses, IncrementalMatchesBatchBitwise) {
    std::mt19937_64 rng(29);
    const auto z = random_losses(rng, 300, true);
    OrderedLosses inc;
    DecayPowers powers(0.3);
    for (std::size_t n = 1; n <= z.size(); ++n) {
        inc.insert(z[n - 1]);
        const LossHistory prefix(std::vector<double>(z.begin(), z.begin() + n));
        ASSERT_EQ(inc.sample_average(a90).cvar, cvar_sample_average(prefix, a90));
        ASSERT_EQ(inc.weighted(a90, powers).cvar, cvar_weighted(prefix, 0.3, a90));
    }
    for (std::size_t i = 1; i < inc.size(); ++i) {
        const auto& e = inc.entries();
        ASSERT_TRUE(e[i - 1].loss < e[i].loss || (e[i - 1].loss == e[i].loss && e[i - 1].index < e[i].index));
    }
}

// Dual recursive estimator

TEST(DualAuxiliary, Examples) {
    EXPECT_DOUBLE_EQ(dual_auxiliary(0.0, a90, 10.0), 100.0);
    EXPECT_DOUBLE_EQ(dual_auxiliary(5.0, a90, 3.0), 5.0);
    EXPECT_DOUBLE_EQ(dual_auxiliary(2.5, a90, 2.5), 2.5);
    for (double c : {-3.0, 0.0, 1.0, 7.0}) EXPECT_GE(dual_auxiliary(c, a90, 1.0), c);
}

TEST(Grid, Validation) {
    EXPECT_THROW(Grid({1.0}), InvalidArgument);
    EXPECT_THROW(Grid({1.0, 1.0}), InvalidArgument);
    EXPECT_THROW(Grid({2.0, 1.0}), InvalidArgument);
    EXPECT_THROW(Grid::uniform(0.0, 1.0, 1), InvalidArgument);
    const Grid g = Grid::uniform(-100.0, 350.0, 2000);
    EXPECT_EQ(g.size(), 2000u);
    EXPECT_DOUBLE_EQ(g[0], -100.0);
    EXPECT_DOUBLE_EQ(g[1999], 350.0);
}

TEST(DualUpdate, Examples) {
    auto grid = std::make_shared<const Grid>(std::vector<double>{-1.0, 0.0, 1.0});
    DualState fresh(grid, a90);
    const auto s = dual_update(fresh, 10.0, 0.5);
    EXPECT_DOUBLE_EQ(s.estimates()[1], 50.0);
    EXPECT_EQ(s.update_count(), 1u);
    EXPECT_EQ(fresh.update_count(), 0u);

    DualState prior(grid, a90, std::vector<double>{3.0, -7.0, 12.0});
    const auto full = dual_update(prior, 0.4, 1.0);
    for (std::size_t m = 0; m < 3; ++m)
        EXPECT_DOUBLE_EQ(full.estimates()[m], dual_auxiliary((*grid)[m], a90, 0.4));

    // Below every grid point the target is c itself.
    const auto low = dual_update(prior, -5.0, 0.25);
    for (std::size_t m = 0; m < 3; ++m) {
        const double c = (*grid)[m], before = prior.estimates()[m];
        EXPECT_DOUBLE_EQ(low.estimates()[m], before + 0.25 * (c - before));
    }

    EXPECT_THROW(dual_update(fresh, 1.0, 0.0), InvalidArgument);
    EXPECT_THROW(dual_update(fresh, 1.0, 1.5), InvalidArgument);
    EXPECT_THROW(dual_update(fresh, NAN, 0.5), InvalidArgument);
}

TEST(DualUpdate, SimdKernelMatchesScalarReference) {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> normal(0.0, 3.0);
    auto grid = std::make_shared<const Grid>(Grid::uniform(-20.0, 20.0, 1001));
    const std::vector<double> points(grid->points().begin(), grid->points().end());
    DualState state(grid, ConfidenceLevel(0.95));
    std::vector<double> reference(points.size(), 0.0);
    for (int i = 0; i < 500; ++i) {
        const double z = normal(rng);
        state.update(z, 0.07);
        oracle::dual_update_scalar(points, reference, z, 0.07, 0.95);
    }
    for (std::size_t m = 0; m < points.size(); ++m)
        ASSERT_NEAR(state.estimates()[m], reference[m], 1e-12 * (1 + std::abs(reference[m])));
}

TEST(DualCvar, Examples) {
    auto grid = std::make_shared<const Grid>(std::vector<double>{-1.0, 0.0, 1.0});
    const auto fresh = dual_cvar(DualState(grid, a90));
    EXPECT_DOUBLE_EQ(fresh.cvar, 0.0);
    EXPECT_DOUBLE_EQ(fresh.argmin_c, -1.0);

    const auto one = dual_cvar(dual_update(DualState(grid, a90), 0.0, 1.0));
    EXPECT_DOUBLE_EQ(one.cvar, 0.0);
    EXPECT_DOUBLE_EQ(one.argmin_c, 0.0);
}

TEST(DualCvar, SingleFullStepOnGridReturnsLoss) {
    auto grid = std::make_shared<const Grid>(Grid::uniform(-5.0, 5.0, 101));
    for (std::size_t m = 0; m < grid->size(); m += 7) {
        const double z = (*grid)[m];
        const auto est = dual_cvar(dual_update(DualState(grid, a90, 3.0), z, 1.0));
        EXPECT_DOUBLE_EQ(est.cvar, z);
        EXPECT_DOUBLE_EQ(est.argmin_c, z);
    }
}

TEST(DualCvar, ConvergesOnStationaryNormal) {
    auto grid = std::make_shared<const Grid>(Grid::uniform(-6.0, 6.0, 1201));
    DualState state(grid, a90);
    std::mt19937_64 rng(101);
    std::normal_distribution<double> normal;
    // Small rate, long stream; the stationary std is about sqrt(lambda/2 * Var f) ~ 0.04.
    for (int i = 0; i < 400000; ++i) state.update(normal(rng), 0.001);
    const double expected = oracle::normal_cvar_quadrature(0.0, 1.0, 0.9);
    EXPECT_NEAR(state.cvar().cvar, expected, 0.15);
}

TEST(DualState, ConvexityPreservedOver10kUpdateSequences) {
    std::mt19937_64 rng(37);
    std::normal_distribution<double> normal(0.0, 4.0);
    std::uniform_real_distribution<double> rate(1e-3, 1.0);
    std::uniform_real_distribution<double> level(0.5, 0.99);
    auto grid = std::make_shared<const Grid>(Grid::uniform(-10.0, 10.0, 41));
    for (int seq = 0; seq < 10000; ++seq) {
        DualState state(grid, ConfidenceLevel(level(rng)));
        const int len = 1 + seq % 20;
        for (int i = 0; i < len; ++i) state.update(normal(rng), rate(rng));
        const auto e = state.estimates();
        for (std::size_t m = 1; m + 1 < e.size(); ++m)
            ASSERT_GE(e[m - 1] - 2.0 * e[m] + e[m + 1], -1e-9) << "sequence " << seq;
    }
}

TEST(DualState, TranslationEquivariance) {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> normal(1.0, 2.0);
    const double shift = 17.25;
    auto grid = std::make_shared<const Grid>(Grid::uniform(-10.0, 10.0, 201));
    auto moved = std::make_shared<const Grid>(Grid::uniform(-10.0 + shift, 10.0 + shift, 201));
    DualState a(grid, a90, 0.0), b(moved, a90, shift);
    for (int i = 0; i < 300; ++i) {
        const double z = normal(rng);
        a.update(z, 0.2);
        b.update(z + shift, 0.2);
    }
    EXPECT_NEAR(b.cvar().cvar, a.cvar().cvar + shift, 1e-9);
    EXPECT_NEAR(b.cvar().argmin_c, a.cvar().argmin_c + shift, 1e-9);
}
