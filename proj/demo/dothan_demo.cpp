// One Dothan call value under a volatility band, then a handful of G-paths through it.
#include "gfk/gfk.hpp"

#include <cstdio>

int main() {
    const double alpha = 0.3, beta = 0.8, gamma = -0.2, x0 = 3.0, strike = 3.0, eps = 1e-6;
    const auto gf = gfk::GFunction::from_volatilities(0.8, 1.0);

    const auto reg = gfk::build_cutoff(gfk::dothan_coeffs(alpha, beta, gamma), eps);
    gfk::PdeGrid grid;
    grid.dx = 0.02;
    const auto sol = gfk::solve_backward(reg, gf, [=](double x) { return std::max(x - strike, 0.0); },
                                         gfk::Domain{0.0, 20.0}, grid);
    std::printf("u(0, %g) = %.6f  (%zu steps, dt = %.3g)\n", x0, sol.evaluate(0.0, x0), sol.n_steps(), sol.dt());

    const auto law = gfk::solve_gheat_cdf(gf);
    const auto times = gfk::uniform_times(1.0, 20);
    for (std::size_t p = 0; p < 5; ++p) {
        gfk::UniformStream u(7, p);
        const auto path = gfk::simulate_gbm(law, times, 10, u);
        const auto x = gfk::dothan_exact_states(alpha, beta, gamma, path, x0);
        const auto m = gfk::m_eps_process(x, times, sol, eps);
        std::printf("path %zu: X_T = %.4f  <B>_T = %.4f  M_T = %.4f\n", p, x.back(), path.qv.back(), m.back());
    }
}
