#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "pensionlab/studies.hpp"

using namespace pensionlab;

namespace {

struct Paper {
    TimeGrid grid = make_time_grid(65, 1, 121);
    MortalityTable mortality = gompertz_makeham(5e-4, 1e-5, 0.1, make_time_grid(65, 1, 121));
    Preferences prefs = make_preferences(-1, -1, 0, 1);
    MarketParams market{0.062, 0.027, 0.15};
};

}  // namespace

TEST(AnnuityUtility, CertainSurvival) {
    for (std::size_t k : {1u, 2u, 5u, 12u}) {
        std::vector<double> p(k, 0.0);
        p.back() = 1.0;
        const auto grid = make_time_grid(0, 1, static_cast<double>(k));
        const auto mort = MortalityTable::from_pmf(grid, p);
        EXPECT_NEAR(annuity_utility(1.0, mort, make_preferences(-1, -1, 0, 1)), 1.0 / k, 1e-15);
    }
}

TEST(AnnuityUtility, SinglePeriod) {
    const auto grid = make_time_grid(0, 1, 1);
    const auto mort = MortalityTable::from_pmf(grid, {1});
    EXPECT_EQ(annuity_utility(2.5, mort, make_preferences(-2, 0.5, 0.1, 1)), 2.5);
}

TEST(AnnuityUtility, Homogeneous) {
    const Paper p;
    const auto prefs = make_preferences(-3, 0.4, 0.02, 1);
    const double u = annuity_utility(1.3, p.mortality, prefs);
    EXPECT_NEAR(annuity_utility(2.6, p.mortality, prefs), 2 * u, 1e-12 * u);
    EXPECT_THROW(annuity_utility(0, p.mortality, prefs), ConfigError);
}

TEST(Outperformance, FlatVonNeumannIsZero) {
    const Paper p;
    const MarketParams flat{0, 0, 0.15};
    for (double a : {-1.0, -4.0, 0.5}) {
        const auto prefs = make_preferences(a, a, 0, 1);
        const auto t = solve(CollectiveMode::infinite(), p.grid, flat, prefs, p.mortality);
        EXPECT_NEAR(annuity_outperformance(t, 1.0, p.mortality, flat, prefs), 0.0, 1e-10);
    }
    const auto other = gompertz_makeham(1e-3, 5e-5, 0.09, p.grid);
    const auto t = solve(CollectiveMode::infinite(), p.grid, flat, p.prefs, other);
    EXPECT_NEAR(annuity_outperformance(t, 1.0, other, flat, p.prefs), 0.0, 1e-10);
}

TEST(Outperformance, CollectiveBeatsIndividual) {
    const Paper p;
    const auto inf = solve(CollectiveMode::infinite(), p.grid, p.market, p.prefs, p.mortality);
    const auto ind = solve(CollectiveMode::individual(), p.grid, p.market, p.prefs, p.mortality);
    EXPECT_GT(annuity_outperformance(inf, 1.0, p.mortality, p.market, p.prefs),
              annuity_outperformance(ind, 1.0, p.mortality, p.market, p.prefs));
}

TEST(Outperformance, RiskPremiumHelps) {
    const Paper p;
    const MarketParams bonds{0.027, 0.027, 0.15};
    const auto with = solve(CollectiveMode::infinite(), p.grid, p.market, p.prefs, p.mortality);
    const auto without = solve(CollectiveMode::infinite(), p.grid, bonds, p.prefs, p.mortality);
    EXPECT_GT(annuity_outperformance(with, 1.0, p.mortality, p.market, p.prefs),
              annuity_outperformance(without, 1.0, p.mortality, bonds, p.prefs));
}

TEST(Outperformance, BudgetInvariant) {
    const Paper p;
    const auto t = solve(CollectiveMode::infinite(), p.grid, p.market, p.prefs, p.mortality);
    const double a = annuity_outperformance(t, 1.0, p.mortality, p.market, p.prefs);
    EXPECT_NEAR(annuity_outperformance(t, 2.0, p.mortality, p.market, p.prefs), a, 1e-12);
    EXPECT_THROW(annuity_outperformance(t, 0.0, p.mortality, p.market, p.prefs), ConfigError);
}

TEST(Improvement, Examples) {
    EXPECT_NEAR(improvement(0.591, 0.205), 0.320, 0.0005);
    EXPECT_NEAR(improvement(0.591, 0.013), 0.571, 0.0005);
    EXPECT_EQ(improvement(0.3, 0.3), 0.0);
    EXPECT_THROW(improvement(0.1, -1.0), DomainError);
}

TEST(Improvement, SwapIsReciprocal) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-0.9, 2.0);
    for (int i = 0; i < 100; ++i) {
        const double a = u(rng), b = u(rng);
        EXPECT_NEAR((1 + improvement(a, b)) * (1 + improvement(b, a)), 1.0, 1e-12);
    }
}

TEST(Scenario, ReportFields) {
    const Paper p;
    const auto rep = run_scenario("S1", CollectiveMode::infinite(), p.market, p.prefs, p.mortality, 2.0);
    EXPECT_EQ(rep.id, "S1");
    EXPECT_EQ(rep.mu, 0.062);
    EXPECT_EQ(rep.outperformance, rep.annuity_equivalent / 2.0 - 1.0);
}

TEST(FundSize, ConsistencyAndMonotonicity) {
    const Paper p;
    const std::vector<std::size_t> sizes{1, 2, 5, 10, 20, 40, 100, 200};
    const auto study = fund_size_study(sizes, p.grid, p.market, p.prefs, p.mortality, 1.0);
    const auto ind = solve(CollectiveMode::individual(), p.grid, p.market, p.prefs, p.mortality);
    EXPECT_NEAR(study.outperformance[0], annuity_outperformance(ind, 1.0, p.mortality, p.market, p.prefs),
                1e-12);
    EXPECT_TRUE(study.monotone);
    for (std::size_t i = 1; i < sizes.size(); ++i)
        EXPECT_GE(study.outperformance[i], study.outperformance[i - 1]);
    ASSERT_TRUE(study.n_at_90_percent.has_value());
    EXPECT_GE(*study.n_at_90_percent, 5u);
    EXPECT_LE(*study.n_at_90_percent, 100u);
    EXPECT_LT(study.outperformance.back(), study.asymptote);
}

TEST(FundSize, Validation) {
    const Paper p;
    EXPECT_THROW(fund_size_study(std::vector<std::size_t>{}, p.grid, p.market, p.prefs, p.mortality, 1),
                 ConfigError);
    EXPECT_THROW(fund_size_study(std::vector<std::size_t>{4, 2}, p.grid, p.market, p.prefs, p.mortality, 1),
                 ConfigError);
    EXPECT_THROW(fund_size_study(std::vector<std::size_t>{0, 2}, p.grid, p.market, p.prefs, p.mortality, 1),
                 ConfigError);
}

TEST(Convergence, BoundAndRate) {
    const Paper p;
    const std::vector<std::size_t> sizes{1, 2, 4, 8, 16, 32, 64, 128, 256};
    const auto rep = convergence_study(sizes, p.grid, p.market, p.prefs, p.mortality);
    EXPECT_TRUE(rep.strictly_decreasing);
    EXPECT_TRUE(rep.bound_holds);
    EXPECT_EQ(rep.calibration_n, 4u);
    EXPECT_LE(rep.exponent, -0.4);
    EXPECT_TRUE(std::isnan(rep.bound[0]));
    EXPECT_NEAR(rep.bound[2], rep.abs_diff[2], 1e-18);
}

TEST(Convergence, OtherMortalityTable) {
    const Paper p;
    const auto other = gompertz_makeham(1e-4, 3e-5, 0.09, p.grid);
    const auto prefs = make_preferences(-2, -0.5, 0.01, 1);
    const std::vector<std::size_t> sizes{1, 2, 4, 8, 16, 32, 64, 128};
    const auto rep = convergence_study(sizes, p.grid, p.market, prefs, other);
    EXPECT_TRUE(rep.bound_holds);
    EXPECT_LE(rep.exponent, -0.4);
}

TEST(Convergence, NeedsCalibrationSize) {
    const Paper p;
    EXPECT_THROW(convergence_study(std::vector<std::size_t>{1, 2, 3}, p.grid, p.market, p.prefs, p.mortality),
                 ConfigError);
}
