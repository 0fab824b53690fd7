#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "pensionlab/core.hpp"

using namespace pensionlab;
using EPR = ExtendedPositiveReal;

TEST(TimeGrid, TwoPointGrid) {
    const auto g = make_time_grid(0, 1, 2);
    ASSERT_EQ(g.size(), 2u);
    EXPECT_EQ(g.time(0), 0.0);
    EXPECT_EQ(g.time(1), 1.0);
    EXPECT_TRUE(g.is_last(1));
}

TEST(TimeGrid, RetirementGrid) {
    const auto g = make_time_grid(65, 1, 121);
    EXPECT_EQ(g.size(), 56u);
    EXPECT_EQ(g.time(g.last()), 120.0);
    EXPECT_EQ(g.elapsed(4), 4.0);
}

TEST(TimeGrid, RejectsNonIntegralRatio) {
    EXPECT_THROW(make_time_grid(0, 0.5, 1.2), ConfigError);
    EXPECT_THROW(make_time_grid(0, 0, 1), ConfigError);
    EXPECT_THROW(make_time_grid(1, 1, 1), ConfigError);
}

TEST(TimeGrid, ToleratesRoundoff) {
    const auto g = make_time_grid(0, 0.1, 0.3);
    EXPECT_EQ(g.size(), 3u);
    EXPECT_DOUBLE_EQ(g.time(2), 0.2);
}

TEST(Preferences, BetaFromRate) {
    for (double b : {0.0, 0.01, 0.3, 5.0}) {
        const auto p = make_preferences(-1, -1, b, 0.5);
        EXPECT_GT(p.beta, 0.0);
        EXPECT_LE(p.beta, 1.0);
        EXPECT_DOUBLE_EQ(p.beta, std::exp(-b * 0.5));
    }
    EXPECT_EQ(make_preferences(-1, -1, 0, 1).beta, 1.0);
}

TEST(Preferences, Validation) {
    EXPECT_THROW(make_preferences(0, -1, 0, 1), ConfigError);
    EXPECT_THROW(make_preferences(-1, 1, 0, 1), ConfigError);
    EXPECT_THROW(make_preferences(1.5, -1, 0, 1), ConfigError);
    EXPECT_THROW(make_preferences(-1, -1, -0.1, 1), ConfigError);
}

TEST(MarketParams, SigmaMustBePositive) {
    EXPECT_THROW((MarketParams{0.05, 0.02, 0.0}.validate()), ConfigError);
    EXPECT_NO_THROW((MarketParams{0.05, 0.02, 0.1}.validate()));
}

TEST(ExtendedReal, DefinitionExamples) {
    EXPECT_EQ(EPR::finite(3) + EPR::eps(2), EPR::finite(3));
    EXPECT_EQ(EPR::eps(2) + EPR::eps(-1), EPR::eps(-1));
    EXPECT_EQ(pow(EPR::eps(3), -2), EPR::eps(-6));
}

TEST(ExtendedReal, AddingInfiniteWins) {
    EXPECT_EQ(EPR::finite(3) + EPR::eps(-2), EPR::eps(-2));
    EXPECT_EQ(EPR::eps(1) + EPR::eps(4), EPR::eps(1));
}

TEST(ExtendedReal, Multiplication) {
    EXPECT_EQ(EPR::finite(2) * EPR::finite(4), EPR::finite(8));
    EXPECT_EQ(EPR::finite(5) * EPR::eps(2), EPR::eps(2));
    EXPECT_EQ(EPR::eps(2) * EPR::eps(-0.5), EPR::eps(1.5));
    EXPECT_THROW(EPR::eps(2) * EPR::eps(-2), DomainError);
    EXPECT_THROW(EPR::finite(0) * EPR::eps(1), DomainError);
}

TEST(ExtendedReal, InvalidConstruction) {
    EXPECT_THROW(EPR::eps(0), DomainError);
    EXPECT_THROW(EPR::finite(-1), DomainError);
    EXPECT_THROW(pow(EPR::eps(2), 0), DomainError);
    EXPECT_THROW(pow(EPR::finite(0), -1), DomainError);
    EXPECT_EQ(pow(EPR::finite(4), 0.5), EPR::finite(2));
}

namespace {

EPR random_epr(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> kind(0, 2);
    std::uniform_int_distribution<int> small(-4, 4);
    switch (kind(rng)) {
        case 0: return EPR::finite(small(rng) + 4);
        case 1: return EPR::eps(small(rng) == 0 ? 1 : small(rng) * 0.5 + 0.25);
        default: return EPR::eps(-(small(rng) + 5) * 0.5);
    }
}

}  // namespace

TEST(ExtendedReal, AdditionCommutativeAndAssociative) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto a = random_epr(rng);
        const auto b = random_epr(rng);
        const auto c = random_epr(rng);
        EXPECT_EQ(a + b, b + a);
        EXPECT_EQ((a + b) + c, a + (b + c));
    }
}

TEST(ExtendedReal, EpsExponentsAdd) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int trial = 0; trial < 500; ++trial) {
        const double a = u(rng);
        const double b = u(rng);
        if (a == 0 || b == 0 || a + b == 0) continue;
        const auto prod = EPR::eps(a) * EPR::eps(b);
        EXPECT_DOUBLE_EQ(prod.exponent(), a + b);
    }
}
