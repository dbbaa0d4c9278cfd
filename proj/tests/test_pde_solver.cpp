#include "gfk/cutoff.hpp"
#include "gfk/pde_solver.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using gfk::GFunction;

namespace {

auto call(double k) {
    return [k](double x) { return std::max(x - k, 0.0); };
}

gfk::PdeGrid grid(double dx, double horizon = 1.0, std::size_t snaps = 20) {
    gfk::PdeGrid g;
    g.dx = dx;
    g.horizon = horizon;
    g.snapshots = snaps;
    return g;
}

gfk::SolverOptions opts(gfk::Discount d, gfk::Boundary b = gfk::Boundary::extrapolate(),
                        gfk::SolveMode m = gfk::SolveMode::sup) {
    gfk::SolverOptions o;
    o.discount = d;
    o.boundary = b;
    o.mode = m;
    return o;
}

}  // namespace

TEST(SolveBackward, ZeroTerminalStaysZero) {
    const auto reg = gfk::build_cutoff(gfk::dothan_coeffs(0.3, 0.8, -0.2), 1e-6);
    const auto s = gfk::solve_backward(reg, GFunction(0.25, 1.0), [](double) { return 0.0; }, {0.0, 10.0}, grid(0.05));
    for (std::size_t k = 0; k < s.time_grid().size(); ++k) {
        for (double v : s.level(k)) ASSERT_EQ(v, 0.0);
    }
}

TEST(SolveBackward, ConstantDiscountOde) {
    const double r = 0.7;
    const auto s = gfk::solve_backward(oracle::constant_set(0.0, 0.0, 1.0), GFunction(0.5, 1.0),
                                       [](double) { return 1.0; }, {-1.0, 1.0}, grid(0.05),
                                       opts(gfk::Discount::constant(r)));
    for (std::size_t k = 0; k < s.time_grid().size(); ++k) {
        const double t = s.time_grid()[k];
        const double euler = std::pow(1.0 - r * s.dt(), std::llround((1.0 - t) / s.dt()));
        for (double v : s.level(k)) {
            ASSERT_NEAR(v, std::exp(-r * (1.0 - t)), r * r * s.dt());
            ASSERT_NEAR(v, euler, 1e-12);
        }
    }
}

TEST(SolveBackward, TerminalLevelIsPayoff) {
    const auto reg = gfk::build_cutoff(gfk::dothan_coeffs(0.3, 0.8, 0.0), 1e-6);
    const auto s = gfk::solve_backward(reg, GFunction(1.0, 1.0), call(3.0), {0.0, 20.0}, grid(0.05));
    EXPECT_EQ(s.time_grid().front(), 1.0);
    EXPECT_EQ(s.time_grid().back(), 0.0);
    for (std::size_t i = 0; i < s.n_nodes(); ++i) ASSERT_EQ(s.level(0)[i], std::max(s.x(i) - 3.0, 0.0));
    EXPECT_EQ(s.m0(), 17.0);
}

TEST(SolveBackward, VarianceBandReadingReproducesReferenceCell) {
    // upper/lower band entries taken as variances, discount 0.2 x
    const auto reg = gfk::build_cutoff(gfk::dothan_coeffs(0.3, 0.8, 0.0), 1e-6);
    gfk::SolverOptions o;
    o.discount = gfk::Discount::regularized(0.2);
    const auto s = gfk::solve_backward(reg, GFunction(1.0, 1.0), call(3.0), {0.0, 20.0}, grid(0.02), o);
    EXPECT_NEAR(s.evaluate(0.0, 3.0), 1.366, 0.05);
}

TEST(SolveBackward, RegularizedDiscountNeedsRegularizedSet) {
    EXPECT_THROW(gfk::solve_backward(gfk::dothan_coeffs(0.3, 0.8, 0.0), GFunction(1.0, 1.0), call(3.0), {0.0, 5.0},
                                     grid(0.05)),
                 std::invalid_argument);
}

TEST(SolveBackward, RejectsStepAboveCfl) {
    auto g = grid(0.05);
    g.dt = 1.0;
    EXPECT_THROW(gfk::solve_backward(oracle::constant_set(0.0, 0.0, 1.0), GFunction(1.0, 1.0), call(0.0), {-1.0, 1.0},
                                     g, opts(gfk::Discount::constant(0.0))),
                 gfk::CflViolation);
}

TEST(SolveBackward, ShrinkingDomainTooSmall) {
    EXPECT_THROW(gfk::solve_backward(oracle::constant_set(0.0, 0.0, 1.0), GFunction(1.0, 1.0), call(0.0), {-1.0, 1.0},
                                     grid(0.1), opts(gfk::Discount::constant(0.0), gfk::Boundary::shrinking())),
                 std::runtime_error);
}

TEST(SolveBackward, DirichletValuesImposed) {
    const auto s = gfk::solve_backward(
        oracle::constant_set(0.0, 0.0, 1.0), GFunction(0.5, 1.0), [](double x) { return x > 0 ? 1.0 : 0.0; },
        {-2.0, 2.0}, grid(0.1, 0.5),
        opts(gfk::Discount::constant(0.0), gfk::Boundary::dirichlet([](double) { return 0.0; }, [](double t) { return 1.0 - 0.1 * (0.5 - t); })));
    for (std::size_t k = 1; k < s.time_grid().size(); ++k) {
        EXPECT_EQ(s.level(k).front(), 0.0);
        EXPECT_NEAR(s.level(k).back(), 1.0 - 0.1 * (0.5 - s.time_grid()[k]), 1e-12);
    }
}

TEST(SolveBackward, ShrinkingRegionLosesOneNodePerStep) {
    const auto s = gfk::solve_backward(oracle::constant_set(0.1, 0.2, 1.0), GFunction(0.5, 1.0), call(0.0),
                                       {-40.0, 40.0}, grid(0.2, 0.1, 10),
                                       opts(gfk::Discount::constant(0.0), gfk::Boundary::shrinking()));
    const std::size_t per = s.n_steps() / 10;
    for (std::size_t k = 0; k < s.time_grid().size(); ++k) {
        EXPECT_EQ(s.valid_lo(k), k * per);
        EXPECT_EQ(s.valid_hi(k), s.n_nodes() - 1 - k * per);
    }
    EXPECT_FALSE(s.covers(0.0, -39.9));
    EXPECT_THROW(s.evaluate(0.0, -39.9), gfk::OutsideValidRegion);
}

TEST(CflMaxDt, PureDiffusion) {
    const auto c = oracle::constant_set(0.0, 0.0, 1.0);
    const double a = gfk::cfl_max_dt(c, GFunction(0.5, 1.0), {0.0, 1.0}, 0.01);
    EXPECT_NEAR(a, 1e-4, 1e-16);
    EXPECT_NEAR(gfk::cfl_max_dt(c, GFunction(0.5, 1.0), {0.0, 1.0}, 0.02), 4.0 * a, 1e-15);
}

TEST(CflMaxDt, DothanPositiveFinite) {
    const auto reg = gfk::build_cutoff(gfk::dothan_coeffs(0.3, 0.8, 0.0), 1e-6);
    const GFunction gf(0.25, 1.0);
    const double b = gfk::cfl_max_dt(reg, gf, {0.0, 20.0}, 0.01);
    EXPECT_GT(b, 0.0);
    EXPECT_TRUE(std::isfinite(b));
    EXPECT_LE(b, 0.01 * 0.01 / (gf.sigma_hi_sq() * 6.0 * 6.0));
}

TEST(Evaluate, ExactAtNodesAndLinearBetween) {
    const auto s = gfk::solve_backward(oracle::constant_set(0.0, 0.0, 1.0), GFunction(1.0, 1.0),
                                       [](double x) { return 2.0 * x + 1.0; }, {0.0, 1.0}, grid(0.1, 1.0, 4),
                                       opts(gfk::Discount::constant(0.3)));
    for (std::size_t k = 0; k < s.time_grid().size(); ++k) {
        for (std::size_t i = 0; i < s.n_nodes(); ++i) ASSERT_EQ(s.evaluate(s.time_grid()[k], s.x(i)), s.level(k)[i]);
    }
    const double mid = s.evaluate(0.0, 0.35);
    EXPECT_NEAR(mid, 0.5 * (s.level(4)[3] + s.level(4)[4]), 1e-15);
    EXPECT_THROW(s.evaluate(0.0, 1.5), gfk::OutsideValidRegion);
    EXPECT_THROW(s.evaluate(1.5, 0.5), gfk::OutsideValidRegion);
}

TEST(Evaluate, GridRefinementConverges) {
    const auto reg = gfk::build_cutoff(gfk::dothan_coeffs(0.3, 0.8, -0.2), 1e-6);
    const GFunction gf(0.64, 1.0);
    std::vector<double> v;
    for (double dx : {0.08, 0.04, 0.02}) v.push_back(gfk::solve_backward(reg, gf, call(3.0), {0.0, 20.0}, grid(dx)).evaluate(0.0, 3.0));
    EXPECT_LE(std::abs(v[2] - v[1]), std::abs(v[1] - v[0]));
}

TEST(Duality, MirrorsToRoundoff) {
    const auto reg = gfk::build_cutoff(gfk::dothan_coeffs(0.3, 0.8, -0.2), 1e-6);
    const GFunction gf(0.25, 1.0);
    EXPECT_LE(gfk::duality_check(reg, gf, call(3.0), {0.0, 20.0}, grid(0.05)), 1e-10);
    EXPECT_EQ(gfk::duality_check(reg, gf, [](double) { return 0.0; }, {0.0, 20.0}, grid(0.05)), 0.0);
    gfk::SolverOptions up;
    up.upwind = true;
    EXPECT_LE(gfk::duality_check(reg, gf, call(3.0), {0.0, 20.0}, grid(0.05), up), 1e-10);
    const auto dir = opts(gfk::Discount::constant(0.1), gfk::Boundary::dirichlet([](double) { return 0.0; }, [](double) { return 1.0; }));
    EXPECT_LE(gfk::duality_check(oracle::constant_set(0.2, -0.3, 0.8), gf, [](double x) { return x > 0 ? 1.0 : 0.0; },
                                 {-2.0, 2.0}, grid(0.05), dir),
              1e-10);
}

TEST(MaximumPrinciple, LevelsBoundedByTerminal) {
    const auto reg = gfk::build_cutoff(gfk::dothan_coeffs(0.3, 0.8, 0.2), 1e-6);
    for (double lo : {0.25, 0.64, 1.0}) {
        const auto s = gfk::solve_backward(reg, GFunction(lo, 1.0), call(3.0), {0.0, 20.0}, grid(0.05));
        for (double m : s.level_max_abs()) ASSERT_LE(m, s.m0() + 1e-9);
    }
}

TEST(LinearCase, SupInfAndPlainUpdateAgree) {
    const auto reg = gfk::build_cutoff(gfk::dothan_coeffs(0.3, 0.8, -0.2), 1e-6);
    const GFunction gf(0.64, 0.64);
    const auto g = grid(0.1, 0.2, 1);
    const gfk::Domain dom{0.0, 10.0};
    const auto up = gfk::solve_backward(reg, gf, call(3.0), dom, g);
    gfk::SolverOptions o;
    o.mode = gfk::SolveMode::inf;
    const auto down = gfk::solve_backward(reg, gf, call(3.0), dom, g, o);

    // plain explicit update of the linear equation on the same grid
    const auto c = reg.as_coefficients();
    const std::size_t n = up.n_nodes();
    const double dx = up.dx(), dt = up.dt();
    std::vector<double> u(n), next(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = std::max(up.x(i) - 3.0, 0.0);
    for (std::size_t step = 0; step < up.n_steps(); ++step) {
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double x = up.x(i), h = c.h(0.0, x);
            const double ux = (u[i + 1] - u[i - 1]) * (0.5 / dx);
            const double uxx = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * (1.0 / (dx * dx));
            next[i] = u[i] + dt * (0.64 * (ux * c.g(0.0, x) + 0.5 * h * h * uxx) + c.f(0.0, x) * ux - reg.discount_rate(x) * u[i]);
        }
        next[0] = 2.0 * next[1] - next[2];
        next[n - 1] = 2.0 * next[n - 2] - next[n - 3];
        std::swap(u, next);
    }
    for (std::size_t i = 0; i < n; ++i) {
        ASSERT_NEAR(up.level(1)[i], u[i], 1e-12);
        ASSERT_NEAR(down.level(1)[i], u[i], 1e-12);
    }
}

TEST(Degeneracy, NonnegativeArgumentsIgnoreLowerVariance) {
    // convex data with pure diffusion keeps u_xx >= 0
    const auto c = oracle::constant_set(0.0, 0.0, 1.0);
    const auto d = opts(gfk::Discount::constant(0.1), gfk::Boundary::shrinking());
    auto g = grid(0.1, 0.5, 5);
    g.dt = 0.004;
    const auto a = gfk::solve_backward(c, GFunction(0.25, 1.0), [](double x) { return x * x; }, {-20.0, 20.0}, g, d);
    const auto b = gfk::solve_backward(c, GFunction(0.81, 1.0), [](double x) { return x * x; }, {-20.0, 20.0}, g, d);
    ASSERT_EQ(a.negative_argument_count(), 0u);
    ASSERT_EQ(b.negative_argument_count(), 0u);
    for (std::size_t k = 0; k < a.time_grid().size(); ++k) {
        for (std::size_t i = a.valid_lo(k); i <= a.valid_hi(k); ++i) ASSERT_NEAR(a.level(k)[i], b.level(k)[i], 1e-12);
    }
}

TEST(SolutionCsv, EchoAndHeader) {
    const auto s = gfk::solve_backward(oracle::constant_set(0.0, 0.0, 1.0), GFunction(1.0, 1.0), call(0.0), {-1.0, 1.0},
                                       grid(0.5, 0.1, 1), opts(gfk::Discount::constant(0.0)));
    const auto csv = s.to_csv();
    EXPECT_EQ(csv.rfind("# {", 0), 0u);
    EXPECT_NE(csv.find("\"boundary\":\"extrapolate\""), std::string::npos);
    EXPECT_NE(csv.find("\nt,x,u,valid\n"), std::string::npos);
}
