// The scalar multiplier-asymptotics inequalities and their randomized suite.
#include <gtest/gtest.h>

#include "fracgs/inequalities.hpp"

using namespace fracgs;

TEST(MultiplierGap, UnitFrequencyAnnihilates) {
    MultiplierGapParams p{0.8, 0.6, 1.0};
    auto chk = check_multiplier_inequality(1.0, p);
    EXPECT_NEAR(chk.lhs, 0.0, 1e-15);
    EXPECT_GT(chk.rhs, 0.0);
    EXPECT_TRUE(chk.holds);
}

TEST(MultiplierGap, WorkedExample) {
    // sigma_bar = 1, s = 0.9, delta = 0.3 at |xi| = 2
    MultiplierGapParams p{1.0, 0.9, 0.3};
    const double e = std::exp(1.0);
    EXPECT_NEAR(gap_constant(p), 1.0 / (2.0 * e) + 1.0 / (0.3 * e), 1e-12);
    EXPECT_NEAR(gap_constant(p), 1.4102, 5e-5);
    auto chk = check_multiplier_inequality(2.0, p);
    EXPECT_NEAR(chk.lhs, std::abs(std::pow(2.0, 1.8) - 4.0), 1e-12);
    EXPECT_NEAR(chk.lhs, 0.5178, 5e-5);
    EXPECT_NEAR(chk.rhs, 4.0 * gap_constant(p) * 0.1 * (1.0 + std::pow(2.0, 2.6)), 1e-12);
    EXPECT_NEAR(chk.rhs, 3.98, 5e-3);
    EXPECT_TRUE(chk.holds);
}

TEST(MultiplierGap, DegenerateOrderGap) {
    MultiplierGapParams p{0.5, 0.5, 0.4};
    auto chk = check_multiplier_inequality(3.7, p);
    EXPECT_DOUBLE_EQ(chk.lhs, 0.0);
    EXPECT_DOUBLE_EQ(chk.rhs, 0.0); // the |sigma_bar - s| factor vanishes
    EXPECT_TRUE(chk.holds);
}

TEST(MultiplierGap, RejectsNarrowMargin) {
    MultiplierGapParams p{0.9, 0.5, 0.5}; // delta <= 2|sigma - s| = 0.8
    EXPECT_THROW(check_multiplier_inequality(1.0, p), std::invalid_argument);
    EXPECT_THROW(check_multiplier_inequality(-1.0, MultiplierGapParams{0.5, 0.5, 1.0}),
                 std::invalid_argument);
}

TEST(Suite, ExpBoundEqualityAtZero) {
    // |e^t - 1| = |t| e^{|t|} holds with equality at t = 0
    EXPECT_TRUE(holds_with_guard(std::abs(std::expm1(0.0)), 0.0));
}

TEST(Suite, LogBoundExtremum) {
    // tau = e^{-1/(2 sb)} attains |tau^{2sb} log tau| = (2 sb e)^{-1}
    for (double sb : {0.25, 0.5, 0.8, 1.0}) {
        const double tau = std::exp(-1.0 / (2.0 * sb));
        const double lhs = std::abs(std::pow(tau, 2.0 * sb) * std::log(tau));
        EXPECT_NEAR(lhs, 1.0 / (2.0 * sb * std::exp(1.0)), 1e-12);
    }
    // sb = 0.5: value is exactly 1/e
    const double tau = std::exp(-1.0);
    EXPECT_NEAR(std::abs(tau * std::log(tau)), 1.0 / std::exp(1.0), 1e-15);
}

TEST(Suite, ProductSplitAtTinyTau) {
    // tau -> 0 with s != sigma_bar: left side collapses to 0
    MultiplierGapParams p{0.7, 0.5, 1.0};
    const double tau = 0.0;
    const double lhs = (1.0 + std::pow(tau, 2.0 * p.sigma_bar + p.delta)) *
                       std::pow(tau, 2.0 * std::abs(p.sigma_bar - p.s));
    EXPECT_DOUBLE_EQ(lhs, 0.0);
}

TEST(Suite, RandomizedSweepHasZeroViolations) {
    InequalityReport rep = elementary_inequality_suite(200000, 42);
    EXPECT_TRUE(rep.zero_violations());
    EXPECT_LE(rep.extremal_equality_gap, 1e-12);
    for (const auto& [name, tally] : rep.tallies) {
        EXPECT_EQ(tally.violations, 0) << name;
        EXPECT_GT(tally.checked, 0) << name;
        EXPECT_TRUE(std::isfinite(tally.min_margin)) << name;
    }
    // worst-case slack is reported and the tight families sit near zero
    EXPECT_LT(rep.tallies.at("log_below_one").min_margin, 1e-3);
    EXPECT_GE(rep.tallies.at("log_below_one").min_margin, -1e-12);
}

TEST(Suite, DeterministicUnderSeed) {
    InequalityReport a = elementary_inequality_suite(5000, 9);
    InequalityReport b = elementary_inequality_suite(5000, 9);
    EXPECT_EQ(a.tallies.at("multiplier_gap").min_margin, b.tallies.at("multiplier_gap").min_margin);
}

TEST(Suite, RejectsNonPositiveSampleCount) {
    EXPECT_THROW(elementary_inequality_suite(0, 1), std::invalid_argument);
}
