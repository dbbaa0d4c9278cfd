/**
 * @file paths.hpp
 * @brief G-Brownian paths, G-SDE stepping, exit times and the stopped process M^ε
 */

#ifndef GFK_PATHS_HPP
#define GFK_PATHS_HPP

#include "gfk/coefficients.hpp"
#include "gfk/csv.hpp"
#include "gfk/gheat.hpp"
#include "gfk/pde_solver.hpp"
#include "gfk/random.hpp"

#include <cmath>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gfk {

/// One trajectory of B and ⟨B⟩ on a coarse time grid.
struct GPath {
    std::vector<double> times;
    std::vector<double> b;
    std::vector<double> qv;

    std::size_t steps() const noexcept { return times.empty() ? 0 : times.size() - 1; }
};

inline std::vector<double> uniform_times(double horizon, std::size_t n_steps) {
    if (n_steps == 0 || !(horizon > 0.0)) throw std::invalid_argument("uniform_times: need n_steps >= 1 and T > 0");
    std::vector<double> t(n_steps + 1);
    for (std::size_t k = 0; k <= n_steps; ++k) t[k] = horizon * static_cast<double>(k) / static_cast<double>(n_steps);
    return t;
}

class PathOverflow : public std::runtime_error {
public:
    PathOverflow(const std::string& what, std::size_t step) : std::runtime_error(what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/**
 * Draws refinement sub-increments per coarse step through `sampler(u, dt_sub)`;
 * B is their running sum and ⟨B⟩ the running sum of their squares.
 */
template <class Sampler>
GPath simulate_gbm(const Sampler& sampler, std::span<const double> times, std::size_t refinement,
                   UniformStream& uniforms) {
    if (refinement < 1) throw std::invalid_argument("simulate_gbm: refinement must be >= 1");
    if (times.size() < 2 || times.front() != 0.0) throw std::invalid_argument("simulate_gbm: time grid must start at 0");
    GPath path;
    path.times.assign(times.begin(), times.end());
    path.b.assign(times.size(), 0.0);
    path.qv.assign(times.size(), 0.0);
    double b = 0.0, qv = 0.0;
    for (std::size_t k = 1; k < times.size(); ++k) {
        const double dt = times[k] - times[k - 1];
        if (!(dt > 0.0)) throw std::invalid_argument("simulate_gbm: time grid must be increasing");
        const double sub = dt / static_cast<double>(refinement);
        for (std::size_t r = 0; r < refinement; ++r) {
            const double d = sampler(uniforms.next(), sub);
            b += d;
            qv += d * d;
        }
        path.b[k] = b;
        path.qv[k] = qv;
    }
    return path;
}

inline GPath simulate_gbm(const IncrementLaw& law, std::span<const double> times, std::size_t refinement,
                          UniformStream& uniforms) {
    return simulate_gbm([&law](double u, double dt) { return law.sample(u, dt); }, times, refinement, uniforms);
}

namespace detail {

inline void check_state(double x, std::size_t k) {
    if (!std::isfinite(x)) throw PathOverflow("non-finite state at step " + std::to_string(k), k);
}

}  // namespace detail

/// X_{k+1} = X_k + f Δt + g Δ⟨B⟩ + h ΔB with coefficients frozen at (t_k, X_k).
inline std::vector<double> euler_gsde(const CoefficientSet& c, const GPath& path, double x0) {
    std::vector<double> x(path.times.size());
    x[0] = x0;
    for (std::size_t k = 0; k + 1 < x.size(); ++k) {
        const double t = path.times[k];
        const double dt = path.times[k + 1] - t;
        x[k + 1] = x[k] + c.f(t, x[k]) * dt + c.g(t, x[k]) * (path.qv[k + 1] - path.qv[k]) +
                   c.h(t, x[k]) * (path.b[k + 1] - path.b[k]);
        detail::check_state(x[k + 1], k + 1);
    }
    return x;
}

/// Exact Dothan update X_{k+1} = X_k exp(βΔt + αΔB + (γ − ½α²)Δ⟨B⟩).
inline std::vector<double> dothan_exact_states(double alpha, double beta, double gamma, const GPath& path,
                                               double x0) {
    std::vector<double> x(path.times.size());
    x[0] = x0;
    const double qv_rate = gamma - 0.5 * alpha * alpha;
    for (std::size_t k = 0; k + 1 < x.size(); ++k) {
        const double dt = path.times[k + 1] - path.times[k];
        x[k + 1] = x[k] * std::exp(beta * dt + alpha * (path.b[k + 1] - path.b[k]) + qv_rate * (path.qv[k + 1] - path.qv[k]));
        detail::check_state(x[k + 1], k + 1);
    }
    return x;
}

/// Euler path of Y for dY = k(θ−Y)dt + k̃(θ̃−Y)d⟨B⟩ + α dB from y0, returned as Y.
inline std::vector<double> expvasicek_log_states(const ExpVasicekParams& p, const GPath& path, double y0) {
    std::vector<double> y(path.times.size());
    y[0] = y0;
    for (std::size_t k = 0; k + 1 < y.size(); ++k) {
        const double dt = path.times[k + 1] - path.times[k];
        y[k + 1] = y[k] + p.k * (p.theta - y[k]) * dt + p.k_tilde * (p.theta_tilde - y[k]) * (path.qv[k + 1] - path.qv[k]) +
                   p.alpha * (path.b[k + 1] - path.b[k]);
        detail::check_state(y[k + 1], k + 1);
    }
    return y;
}

/// X = exp(Y) node by node.
inline std::vector<double> expvasicek_states(const ExpVasicekParams& p, const GPath& path, double y0) {
    auto y = expvasicek_log_states(p, path, y0);
    for (std::size_t k = 0; k < y.size(); ++k) {
        y[k] = std::exp(y[k]);
        if (!std::isfinite(y[k])) throw PathOverflow("exp-Vasicek state overflow at step " + std::to_string(k), k);
    }
    return y;
}

inline std::vector<double> expvasicek_states(double k, double theta, double k_tilde, double theta_tilde, double alpha,
                                             const GPath& path, double y0) {
    return expvasicek_states(ExpVasicekParams{k, theta, k_tilde, theta_tilde, alpha}, path, y0);
}

/// Smallest k with X_k ∉ [ε, ε⁻¹]; n (= last index) when the path never leaves.
inline std::size_t first_exit(std::span<const double> states, double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("first_exit: eps must lie in (0,1)");
    const double upper = 1.0 / eps;
    for (std::size_t k = 0; k < states.size(); ++k) {
        if (states[k] < eps || states[k] > upper) return k;
    }
    return states.size() - 1;
}

/// exp(−∫₀^{t_upto} (scale·X_s + ε) ds) by the trapezoidal rule.
inline double discount_factor(std::span<const double> states, std::span<const double> times, std::size_t upto,
                              double eps, double scale = 1.0) {
    if (upto >= states.size() || states.size() != times.size()) {
        throw std::out_of_range("discount_factor: index outside the path");
    }
    double integral = 0.0;
    for (std::size_t k = 0; k < upto; ++k) {
        integral += 0.5 * (times[k + 1] - times[k]) * (scale * (states[k] + states[k + 1]) + 2.0 * eps);
    }
    return std::exp(-integral);
}

/**
 * M_k = u(t_{k∧e}, X_{k∧e}) · exp(−∫₀^{t_{k∧e}} (X+ε) ds) with e = first_exit(X, ε);
 * constant after e. Throws OutsideValidRegion when a stopped state is not covered.
 */
inline std::vector<double> m_eps_process(std::span<const double> states, std::span<const double> times,
                                         const PdeSolution& solution, double eps) {
    const std::size_t exit = first_exit(states, eps);
    const double scale = solution.discount().kind == Discount::Kind::constant ? 0.0 : solution.discount().scale;
    std::vector<double> m(states.size());
    double integral = 0.0;
    for (std::size_t k = 0; k < states.size(); ++k) {
        if (k > exit) {
            m[k] = m[exit];
            continue;
        }
        if (k > 0) {
            const double rate_sum = solution.discount().kind == Discount::Kind::constant
                                        ? 2.0 * solution.discount().rate
                                        : scale * (states[k - 1] + states[k]) + 2.0 * eps;
            integral += 0.5 * (times[k] - times[k - 1]) * rate_sum;
        }
        m[k] = solution.evaluate(times[k], states[k]) * std::exp(-integral);
    }
    return m;
}

/// Rows of the trajectory dump `path_id,t,B,QV,X,u,M`; u and M are left empty when absent.
inline void write_trajectory_rows(std::ostream& out, std::size_t path_id, const GPath& path,
                                  std::span<const double> states, std::span<const double> u = {},
                                  std::span<const double> m = {}) {
    for (std::size_t k = 0; k < path.times.size(); ++k) {
        out << path_id << ',' << csv::format_double(path.times[k]) << ',' << csv::format_double(path.b[k]) << ','
            << csv::format_double(path.qv[k]) << ',' << csv::format_double(states[k]) << ','
            << (u.empty() ? std::string() : csv::format_double(u[k])) << ','
            << (m.empty() ? std::string() : csv::format_double(m[k])) << '\n';
    }
}

inline constexpr const char* trajectory_header = "path_id,t,B,QV,X,u,M";

}  // namespace gfk

#endif  // GFK_PATHS_HPP
