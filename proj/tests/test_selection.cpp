#include "coclust/selection.hpp"
#include "coclust/simulate.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace coclust;

namespace {

BicEntry entry(double value) {
    BicEntry e;
    e.bic = value;
    return e;
}

ModelParams one_block(double intercept) {
    ModelParams th;
    th.pi = Vector::Ones(1);
    th.rho = Vector::Ones(1);
    th.beta = BetaBlocks(1, 1, 2);
    th.beta(0, 0) << intercept, 0.0;
    th.gaussians.emplace_back(Vector::Zero(1), Matrix::Identity(1, 1));
    return th;
}

} // namespace

TEST(Bic, HandInstance) {
    EXPECT_EQ(covariate_param_count(2, 1), 4);
    const double want = 200.0 + std::log(100.0) + 4 * std::log(100.0) + std::log(50.0) +
                        8 * std::log(5000.0);
    EXPECT_NEAR(bic(-100.0, 100, 50, 1, 2, 2, 4), want, 1e-12);
    EXPECT_NEAR(std::log(100.0), 4.6052, 5e-5);
    EXPECT_NEAR(4 * std::log(100.0), 18.4207, 5e-5);
    EXPECT_NEAR(std::log(50.0), 3.9120, 5e-5);
    EXPECT_NEAR(8 * std::log(5000.0), 68.1375, 5e-5);
    EXPECT_NEAR(bic(-100.0, 100, 50, 1, 2, 2, 4), 295.0754, 5e-5);
}

TEST(Bic, InterceptOnlySingleCell) {
    EXPECT_EQ(covariate_param_count(1, 0), 0);
    EXPECT_NEAR(bic(-10.0, 30, 7, 0, 1, 1, 0), 20.0 + std::log(210.0), 1e-12);
    EXPECT_EQ(covariate_param_count(3, 2), 3 * (2 + 3));
}

TEST(Bic, PenaltiesAreStrictlyIncreasing) {
    const double base = bic(-50.0, 40, 20, 1, 2, 2, 4);
    EXPECT_GT(bic(-50.0, 80, 20, 1, 2, 2, 4), base);
    EXPECT_GT(bic(-50.0, 40, 40, 1, 2, 2, 4), base);
    EXPECT_GT(bic(-50.0, 40, 20, 2, 2, 2, 4), base);
    EXPECT_GT(bic(-50.0, 40, 20, 1, 3, 2, 4), base);
    EXPECT_GT(bic(-50.0, 40, 20, 1, 2, 3, 4), base);
    EXPECT_GT(bic(-50.0, 40, 20, 1, 2, 2, 5), base);
    EXPECT_GT(bic(-51.0, 40, 20, 1, 2, 2, 4), base);
}

TEST(PickBest, MinimumWhenNothingIsNearTied) {
    std::map<std::pair<int, int>, BicEntry> e;
    e.emplace(std::pair{1, 1}, entry(120.0));
    e.emplace(std::pair{2, 3}, entry(100.0));
    e.emplace(std::pair{3, 3}, entry(110.0));
    EXPECT_EQ(pick_best(e), (std::pair{2, 3}));
}

TEST(PickBest, NearTiesGoToTheSmallerModel) {
    std::map<std::pair<int, int>, BicEntry> e;
    e.emplace(std::pair{1, 2}, entry(101.5));
    e.emplace(std::pair{2, 2}, entry(100.0));
    e.emplace(std::pair{2, 1}, entry(101.0));
    // (1,2) and (2,1) have the same size; the smaller BIC wins.
    EXPECT_EQ(pick_best(e), (std::pair{2, 1}));
    e.emplace(std::pair{1, 1}, entry(102.5));
    EXPECT_EQ(pick_best(e), (std::pair{2, 1}));
    e.at({1, 1}).bic = 101.9;
    EXPECT_EQ(pick_best(e), (std::pair{1, 1}));
}

TEST(PickBest, EmptyGridThrows) {
    EXPECT_THROW(pick_best({}), AllRestartsFailed);
}

TEST(Select, SingleCellIsBest) {
    const auto sim = generate({40, 12, separated_design(2, 2, 1, 1), 2});
    BemConfig cfg;
    cfg.n_restarts = 2;
    const BicGrid grid = select(sim.x, sim.y, {2, 2}, {2, 2}, cfg);
    ASSERT_EQ(grid.entries.size(), 1u);
    EXPECT_EQ(grid.best, (std::pair{2, 2}));
}

TEST(Select, OneBlockDataPrefersTheSmallestModel) {
    const auto sim = generate({80, 20, one_block(0.3), 3});
    BemConfig cfg;
    cfg.n_restarts = 3;
    const BicGrid grid = select(sim.x, sim.y, {1, 2}, {1, 2}, cfg);
    EXPECT_EQ(grid.entries.size() + grid.failures.size(), 4u);
    EXPECT_EQ(grid.best, (std::pair{1, 1}));
}

TEST(Select, BestMatchesRescanAndIsDeterministic) {
    const auto sim = generate({90, 24, separated_design(2, 3, 1, 4, {.scheme = InterceptScheme::DistinctSigns}), 5});
    BemConfig cfg;
    cfg.n_restarts = 3;
    cfg.seed = 11;
    const BicGrid a = select(sim.x, sim.y, {1, 3}, {1, 3}, cfg);
    const BicGrid b = select(sim.x, sim.y, {1, 3}, {1, 3}, cfg);
    EXPECT_EQ(a.best, b.best);
    ASSERT_EQ(a.entries.size(), b.entries.size());
    for (const auto& [gd, e] : a.entries) {
        EXPECT_EQ(e.bic, b.entries.at(gd).bic);
        EXPECT_DOUBLE_EQ(e.bic, bic(e.fit, 90, 24, 1, gd.first, gd.second));
    }
    double min_bic = std::numeric_limits<double>::infinity();
    for (const auto& [gd, e] : a.entries)
        min_bic = std::min(min_bic, e.bic);
    const auto& best = a.entries.at(a.best);
    EXPECT_LE(best.bic, min_bic + bic_tie_window);
    for (const auto& [gd, e] : a.entries)
        if (e.bic <= min_bic + bic_tie_window)
            EXPECT_LE(a.best.first * a.best.second, gd.first * gd.second);
}

TEST(Select, InvalidRanges) {
    const auto sim = generate({10, 5, one_block(0.0), 6});
    BemConfig cfg;
    EXPECT_THROW(select(sim.x, sim.y, {2, 1}, {1, 1}, cfg), InvalidArgument);
    EXPECT_THROW(select(sim.x, sim.y, {0, 1}, {1, 1}, cfg), InvalidArgument);
    EXPECT_THROW(select(sim.x, sim.y, {1, 1}, {1, 6}, cfg), InvalidArgument);
}
