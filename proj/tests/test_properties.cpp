// Randomized invariants: G-function algebra, comparison, domain independence, QV band.
#include "gfk/cutoff.hpp"
#include "gfk/paths.hpp"
#include "gfk/pde_solver.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using gfk::GFunction;

namespace {

GFunction random_band(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 4.0);
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    return GFunction(a, b);
}

}  // namespace

TEST(GProperties, MonotoneHomogeneousSubadditiveElliptic) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> x(-50.0, 50.0), lam(1e-3, 1e3);
    for (int i = 0; i < 10000; ++i) {
        auto gf = random_band(rng);
        if (gf.sigma_lo_sq() == 0.0) gf = GFunction(1e-3, gf.sigma_hi_sq());
        const double a = x(rng), b = x(rng), l = lam(rng);
        const double hi = std::max(a, b), lo = std::min(a, b);
        ASSERT_GE(gf(hi), gf(lo));
        ASSERT_NEAR(gf(l * a), l * gf(a), 1e-15 * std::max(1.0, std::abs(l * gf(a))));
        ASSERT_LE(gf(a + b), gf(a) + gf(b) + 1e-12);
        ASSERT_GE(gf(hi) - gf(lo), gf.ellipticity_beta() * (hi - lo) - 1e-12);
        // β is sharp: a smaller-than-σ̲² slope shows up on the negative axis
        ASSERT_NEAR(gf(-1.0) - gf(-2.0), gf.ellipticity_beta(), 1e-15);
    }
}

TEST(GProperties, LinearReductionExact) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> x(-50.0, 50.0), s(0.0, 4.0);
    for (int i = 0; i < 10000; ++i) {
        const double v = s(rng), a = x(rng);
        ASSERT_EQ(GFunction(v, v)(a), v * a / 2.0);
    }
}

TEST(ComparisonPrinciple, OrderedTerminalsGiveOrderedSolutions) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> amp(-1.0, 1.0), freq(0.2, 3.0), pos(0.0, 1.0);
    const auto coeffs = oracle::constant_set(0.3, -0.4, 1.0);
    gfk::PdeGrid grid;
    grid.dx = 0.05;
    grid.horizon = 0.5;
    grid.snapshots = 25;
    gfk::SolverOptions o;
    o.discount = gfk::Discount::constant(0.2);
    o.boundary = gfk::Boundary::dirichlet([](double) { return 0.0; }, [](double) { return 0.0; });
    for (int trial = 0; trial < 10; ++trial) {
        const double a1 = amp(rng), a2 = amp(rng), w1 = freq(rng), w2 = freq(rng), bump = pos(rng);
        auto phi1 = [=](double x) { return a1 * std::sin(w1 * x) + a2 * std::cos(w2 * x) * std::exp(-x * x); };
        auto phi2 = [=](double x) { return phi1(x) + bump * std::max(0.0, 1.0 - std::abs(x - a1)); };
        const GFunction gf(0.25, 1.0);
        const auto u1 = gfk::solve_backward(coeffs, gf, phi1, {-4.0, 4.0}, grid, o);
        const auto u2 = gfk::solve_backward(coeffs, gf, phi2, {-4.0, 4.0}, grid, o);
        for (std::size_t k = 0; k < u1.time_grid().size(); ++k) {
            for (std::size_t i = 0; i < u1.n_nodes(); ++i) ASSERT_LE(u1.level(k)[i], u2.level(k)[i] + 1e-14);
        }
    }
}

TEST(ComparisonPrinciple, UpwindDothanCallsOrderedByStrike) {
    const auto reg = gfk::build_cutoff(gfk::dothan_coeffs(0.3, 0.8, -0.2), 1e-6);
    gfk::PdeGrid grid;
    grid.dx = 0.05;
    grid.snapshots = 20;
    gfk::SolverOptions o;
    o.upwind = true;
    const GFunction gf(0.25, 1.0);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> k(1.0, 6.0), d(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const double k2 = k(rng), k1 = k2 + d(rng);
        // the linear extrapolation boundary has a negative weight, so order is checked under fixed data
        o.boundary = gfk::Boundary::dirichlet([](double) { return 0.0; }, [k1](double) { return 20.0 - k1; });
        const auto u1 = gfk::solve_backward(reg, gf, [k1](double x) { return std::max(x - k1, 0.0); }, {0.0, 20.0}, grid, o);
        o.boundary = gfk::Boundary::dirichlet([](double) { return 0.0; }, [k2](double) { return 20.0 - k2; });
        const auto u2 = gfk::solve_backward(reg, gf, [k2](double x) { return std::max(x - k2, 0.0); }, {0.0, 20.0}, grid, o);
        for (std::size_t kk = 0; kk < u1.time_grid().size(); ++kk) {
            for (std::size_t i = 0; i < u1.n_nodes(); ++i) ASSERT_LE(u1.level(kk)[i], u2.level(kk)[i] + 1e-12);
        }
    }
}

TEST(ShrinkingMode, DomainEnlargementLeavesValuesUnchanged) {
    const GFunction gf(0.25, 1.0);
    auto run = [&](const gfk::CoefficientSet& c, gfk::Domain d, double dt, double T, const std::function<double(double)>& phi) {
        gfk::PdeGrid g;
        g.dx = 0.1;
        g.dt = dt;
        g.horizon = T;
        g.snapshots = 4;
        gfk::SolverOptions o;
        o.discount = gfk::Discount::constant(0.1);
        o.boundary = gfk::Boundary::shrinking();
        return gfk::solve_backward(c, gf, phi, d, g, o);
    };
    auto compare = [](const gfk::PdeSolution& a, const gfk::PdeSolution& b) {
        std::size_t checked = 0;
        for (std::size_t k = 0; k < a.time_grid().size(); ++k) {
            for (std::size_t i = a.valid_lo(k); i <= a.valid_hi(k); ++i) {
                const double x = a.x(i);
                const auto j = static_cast<std::size_t>(std::llround((x - b.x_lo()) / b.dx()));
                ASSERT_NEAR(b.x(j), x, 1e-9);
                ASSERT_NEAR(a.level(k)[i], b.level(k)[j], 1e-12);
                ++checked;
            }
        }
        EXPECT_GT(checked, 0u);
    };
    auto wave = [](double x) { return std::sin(x) + 0.3 * std::abs(x - 0.5); };
    const auto c = oracle::constant_set(0.2, -0.3, 1.0);
    compare(run(c, {-10.0, 10.0}, 0.004, 0.2, wave), run(c, {-20.0, 30.0}, 0.004, 0.2, wave));

    const auto reg = gfk::build_cutoff(gfk::dothan_coeffs(0.3, 0.8, -0.2), 1e-6).as_coefficients();
    auto call = [](double x) { return std::max(x - 3.0, 0.0); };
    compare(run(reg, {1.0, 9.0}, 5e-4, 0.01, call), run(reg, {0.5, 12.0}, 5e-4, 0.01, call));
}

TEST(QuadraticVariation, StaysInsideTheBand) {
    for (auto gf : {GFunction(0.25, 1.0), GFunction(0.64, 1.0)}) {
        const auto law = gfk::solve_gheat_cdf(gf);
        const auto times = gfk::uniform_times(1.0, 100);
        const int n = 10000;
        double mean = 0.0;
        for (int p = 0; p < n; ++p) {
            gfk::UniformStream u(31, static_cast<std::uint64_t>(p));
            const double qv = gfk::simulate_gbm(law, times, 10, u).qv.back();
            ASSERT_GE(qv, gf.sigma_lo_sq() - 0.3);
            ASSERT_LE(qv, gf.sigma_hi_sq() + 0.3);
            mean += qv / n;
        }
        EXPECT_GE(mean, gf.sigma_lo_sq() - 0.01);
        EXPECT_LE(mean, gf.sigma_hi_sq() + 0.01);
    }
}
