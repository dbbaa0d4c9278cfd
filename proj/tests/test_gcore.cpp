#include "gfk/gfunction.hpp"
#include "gfk/random.hpp"

#include <gtest/gtest.h>

#include <set>

using gfk::GFunction;

TEST(GFunction, PositiveArgumentUsesUpperVariance) {
    EXPECT_DOUBLE_EQ(gfk::eval_G(GFunction(0.25, 1.0), 2.0), 1.0);
}

TEST(GFunction, NegativeArgumentUsesLowerVariance) {
    EXPECT_DOUBLE_EQ(gfk::eval_G(GFunction(0.25, 1.0), -2.0), -0.25);
}

TEST(GFunction, DegenerateBandIsLinear) {
    const GFunction gf(0.64, 0.64);
    EXPECT_TRUE(gf.is_linear());
    EXPECT_DOUBLE_EQ(gfk::eval_G(gf, 5.0), 1.6);
}

TEST(GFunction, ZeroMapsToZero) {
    EXPECT_EQ(gfk::eval_G(GFunction(0.3, 2.0), 0.0), 0.0);
    EXPECT_EQ(GFunction(0.3, 2.0).twice(0.0), 0.0);
}

TEST(GFunction, TwiceIsTwoG) {
    const GFunction gf(0.25, 1.0);
    for (double x : {-3.0, -0.5, 0.0, 0.7, 4.0}) EXPECT_DOUBLE_EQ(gf.twice(x), 2.0 * gf(x));
}

TEST(GFunction, EllipticityBeta) {
    EXPECT_DOUBLE_EQ(gfk::ellipticity_beta(GFunction(0.25, 1.0)), 0.125);
    EXPECT_DOUBLE_EQ(gfk::ellipticity_beta(GFunction(1.0, 1.0)), 0.5);
    EXPECT_THROW(gfk::ellipticity_beta(GFunction(0.0, 1.0)), std::domain_error);
}

TEST(GFunction, RejectsInvalidBands) {
    EXPECT_THROW(GFunction(-0.1, 1.0), std::invalid_argument);
    EXPECT_THROW(GFunction(1.0, 0.5), std::invalid_argument);
    EXPECT_THROW(GFunction(0.1, std::nan("")), std::invalid_argument);
    EXPECT_THROW(GFunction::from_volatilities(-1.0, 1.0), std::invalid_argument);
}

TEST(GFunction, FromVolatilitiesSquares) {
    const auto gf = GFunction::from_volatilities(0.5, 2.0);
    EXPECT_DOUBLE_EQ(gf.sigma_lo_sq(), 0.25);
    EXPECT_DOUBLE_EQ(gf.sigma_hi_sq(), 4.0);
    EXPECT_EQ(gf, GFunction(0.25, 4.0));
}

TEST(CounterUniform, OpenUnitInterval) {
    for (std::uint64_t c = 0; c < 100000; ++c) {
        const double u = gfk::counter_uniform(1, 2, c);
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(CounterUniform, DeterministicAndKeyed) {
    EXPECT_EQ(gfk::counter_uniform(42, 7, 3), gfk::counter_uniform(42, 7, 3));
    EXPECT_NE(gfk::counter_uniform(42, 7, 3), gfk::counter_uniform(42, 8, 3));
    EXPECT_NE(gfk::counter_uniform(42, 7, 3), gfk::counter_uniform(43, 7, 3));
    std::set<double> seen;
    for (std::uint64_t s = 0; s < 1000; ++s) seen.insert(gfk::counter_uniform(5, s, 0));
    EXPECT_EQ(seen.size(), 1000u);
}

TEST(CounterUniform, MomentsOfUniform) {
    const int n = 200000;
    double m1 = 0.0, m2 = 0.0, lag = 0.0, prev = 0.5;
    for (int i = 0; i < n; ++i) {
        const double u = gfk::counter_uniform(9, 0, static_cast<std::uint64_t>(i));
        m1 += u;
        m2 += u * u;
        lag += (u - 0.5) * (prev - 0.5);
        prev = u;
    }
    // 5 standard errors
    EXPECT_NEAR(m1 / n, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / n));
    EXPECT_NEAR(m2 / n, 1.0 / 3.0, 5.0 * std::sqrt(4.0 / 45.0 / n));
    EXPECT_NEAR(lag / n, 0.0, 5.0 / 12.0 / std::sqrt(n));
}

TEST(UniformStream, MatchesCounterSequenceAndExhausts) {
    gfk::UniformStream s(11, 4, 3);
    EXPECT_EQ(s.next(), gfk::counter_uniform(11, 4, 0));
    EXPECT_EQ(s.next(), gfk::counter_uniform(11, 4, 1));
    EXPECT_EQ(s.next(), gfk::counter_uniform(11, 4, 2));
    EXPECT_EQ(s.drawn(), 3u);
    EXPECT_THROW(s.next(), gfk::StreamExhausted);
}
