/**
 * @file pde_solver.hpp
 * @brief Explicit backward scheme for the fully nonlinear discounted PDE
 *
 *   u_t + 2G(u_x g + ½ u_xx h²) + f u_x − d(x) u = 0,   u(T, ·) = φ,
 *
 * marched from T down to 0 on a uniform grid. The inf mode replaces 2G(y) by
 * −2G(−y), the lower envelope over the same volatility band. u_x is central,
 * u_xx the 3-point second difference.
 *
 * Boundary handling:
 *  - shrinking:   no boundary data; the trustworthy region loses one node per
 *                 side per step (domain of dependence of the stencil).
 *  - dirichlet:   supplied boundary values u(t, x_lo), u(t, x_hi).
 *  - extrapolate: boundary nodes are the linear extrapolation of the two
 *                 nearest interior nodes.
 */

#ifndef GFK_PDE_SOLVER_HPP
#define GFK_PDE_SOLVER_HPP

#include "gfk/coefficients.hpp"
#include "gfk/csv.hpp"
#include "gfk/cutoff.hpp"
#include "gfk/gfunction.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gfk {

enum class SolveMode { sup, inf };

struct Discount {
    enum class Kind { regularized, raw, constant };
    Kind kind = Kind::regularized;
    /// Constant rate for Kind::constant.
    double rate = 0.0;
    /// Multiplies the state-dependent part: scale·ϑ^ε(x) + ε, or scale·x.
    double scale = 1.0;

    static Discount regularized(double scale = 1.0) { return {Kind::regularized, 0.0, scale}; }
    static Discount raw(double scale = 1.0) { return {Kind::raw, 0.0, scale}; }
    static Discount constant(double r) { return {Kind::constant, r, 1.0}; }
};

struct Boundary {
    enum class Kind { shrinking, dirichlet, extrapolate };
    Kind kind = Kind::extrapolate;
    std::function<double(double t)> left;
    std::function<double(double t)> right;

    static Boundary shrinking() { return {Kind::shrinking, {}, {}}; }
    static Boundary extrapolate() { return {Kind::extrapolate, {}, {}}; }
    static Boundary dirichlet(std::function<double(double)> left, std::function<double(double)> right) {
        return {Kind::dirichlet, std::move(left), std::move(right)};
    }
};

struct Domain {
    double x_lo = 0.0;
    double x_hi = 1.0;
};

struct PdeGrid {
    double dx = 0.01;
    /// 0 selects cfl_fraction · cfl_max_dt.
    double dt = 0.0;
    double cfl_fraction = 0.8;
    double horizon = 1.0;
    /// Number of stored time intervals; levels are kept at multiples of T/snapshots.
    std::size_t snapshots = 100;
};

struct SolverOptions {
    SolveMode mode = SolveMode::sup;
    Discount discount = Discount::regularized();
    Boundary boundary = Boundary::extrapolate();
    /// Upwind the advection term instead of central differencing.
    bool upwind = false;
};

class CflViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NumericalFailure : public std::runtime_error {
public:
    NumericalFailure(const std::string& what, std::size_t step) : std::runtime_error(what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

class OutsideValidRegion : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Backward solve stored at snapshot levels; immutable after construction.
class PdeSolution {
public:
    double x_lo() const noexcept { return x_lo_; }
    double dx() const noexcept { return dx_; }
    std::size_t n_nodes() const noexcept { return n_nodes_; }
    double x(std::size_t i) const noexcept { return x_lo_ + dx_ * static_cast<double>(i); }
    double x_hi() const noexcept { return x(n_nodes_ - 1); }

    /// Snapshot times, decreasing from T to 0.
    const std::vector<double>& time_grid() const noexcept { return times_; }
    const std::vector<double>& level(std::size_t k) const { return u_.at(k); }
    std::size_t valid_lo(std::size_t k) const { return valid_lo_.at(k); }
    std::size_t valid_hi(std::size_t k) const { return valid_hi_.at(k); }

    double horizon() const noexcept { return times_.front(); }
    SolveMode mode() const noexcept { return mode_; }
    const Discount& discount() const noexcept { return discount_; }
    double m0() const noexcept { return m0_; }
    double dt() const noexcept { return dt_; }
    std::size_t n_steps() const noexcept { return n_steps_; }
    /// max |u| over the valid region after every step, including the terminal level.
    const std::vector<double>& level_max_abs() const noexcept { return level_max_abs_; }
    /// Interior updates at which the argument of G was negative.
    std::size_t negative_argument_count() const noexcept { return negative_args_; }
    /// Per-node count of interior updates with a negative G argument.
    const std::vector<std::size_t>& negative_argument_by_node() const noexcept { return negative_by_node_; }
    const std::string& config_echo() const noexcept { return config_echo_; }

    bool covers(double t, double x) const {
        if (!(t >= 0.0 && t <= horizon())) return false;
        const auto [k, w] = bracket(t);
        (void)w;
        for (std::size_t j : {k, std::min(k + 1, times_.size() - 1)}) {
            if (x < this->x(valid_lo_[j]) || x > this->x(valid_hi_[j])) return false;
        }
        return true;
    }

    /// Bilinear interpolation in (t, x) inside the valid region.
    double evaluate(double t, double x) const {
        if (!covers(t, x)) {
            throw OutsideValidRegion("PdeSolution::evaluate: (" + std::to_string(t) + ", " + std::to_string(x) +
                                     ") outside the valid region");
        }
        const auto [k, wt] = bracket(t);
        const std::size_t k1 = std::min(k + 1, times_.size() - 1);
        return (1.0 - wt) * in_space(k, x) + wt * in_space(k1, x);
    }

    std::string to_csv() const {
        std::string out = "# " + config_echo_ + "\n" + "t,x,u,valid\n";
        for (std::size_t k = 0; k < times_.size(); ++k) {
            for (std::size_t i = 0; i < n_nodes_; ++i) {
                const bool valid = i >= valid_lo_[k] && i <= valid_hi_[k];
                out += csv::format_double(times_[k]) + "," + csv::format_double(x(i)) + "," +
                       csv::format_double(u_[k][i]) + (valid ? ",1\n" : ",0\n");
            }
        }
        return out;
    }

private:
    friend class BackwardSolver;

    /// Round grid coordinates that are off a node only by rounding.
    static double snap(double pos) {
        const double r = std::round(pos);
        return std::abs(pos - r) <= 1e-9 * std::max(1.0, r) ? r : pos;
    }

    std::pair<std::size_t, double> bracket(double t) const {
        const std::size_t levels = times_.size() - 1;
        double pos = (horizon() - t) / horizon() * static_cast<double>(levels);
        pos = std::clamp(snap(pos), 0.0, static_cast<double>(levels));
        std::size_t k = static_cast<std::size_t>(pos);
        if (k >= levels) k = levels - 1;
        return {k, pos - static_cast<double>(k)};
    }

    double in_space(std::size_t k, double x) const {
        const auto& row = u_[k];
        double pos = (x - x_lo_) / dx_;
        pos = std::clamp(snap(pos), 0.0, static_cast<double>(n_nodes_ - 1));
        std::size_t i = static_cast<std::size_t>(pos);
        if (i >= n_nodes_ - 1) i = n_nodes_ - 2;
        const double w = pos - static_cast<double>(i);
        return (1.0 - w) * row[i] + w * row[i + 1];
    }

    double x_lo_ = 0.0;
    double dx_ = 0.0;
    std::size_t n_nodes_ = 0;
    std::vector<double> times_;
    std::vector<std::vector<double>> u_;
    std::vector<std::size_t> valid_lo_;
    std::vector<std::size_t> valid_hi_;
    SolveMode mode_ = SolveMode::sup;
    Discount discount_;
    double m0_ = 0.0;
    double dt_ = 0.0;
    std::size_t n_steps_ = 0;
    std::vector<double> level_max_abs_;
    std::size_t negative_args_ = 0;
    std::vector<std::size_t> negative_by_node_;
    std::string config_echo_;
};

namespace detail {

inline std::size_t node_count(const Domain& d, double dx) {
    if (!(d.x_hi > d.x_lo) || !(dx > 0.0)) throw std::invalid_argument("pde: need x_lo < x_hi and dx > 0");
    const double cells = (d.x_hi - d.x_lo) / dx;
    const auto n = static_cast<std::size_t>(std::llround(cells));
    if (n < 2 || std::abs(cells - static_cast<double>(n)) > 1e-6 * cells) {
        throw std::invalid_argument("pde: domain length must be a whole number (>= 2) of dx");
    }
    return n + 1;
}

using RateFn = std::function<double(double x)>;

inline RateFn make_rate(const Discount& d, const RegularizedCoefficientSet* reg) {
    switch (d.kind) {
        case Discount::Kind::constant:
            return [r = d.rate](double) { return r; };
        case Discount::Kind::raw:
            return [s = d.scale](double x) { return s * x; };
        case Discount::Kind::regularized:
            if (!reg) {
                throw std::invalid_argument("pde: regularized discount requires a RegularizedCoefficientSet");
            }
            return [s = d.scale, th = reg->theta_eps, eps = reg->eps](double x) { return s * th.value(0.0, x) + eps; };
    }
    throw std::invalid_argument("pde: unknown discount kind");
}

inline const char* mode_name(SolveMode m) { return m == SolveMode::sup ? "sup" : "inf"; }

inline const char* discount_name(Discount::Kind k) {
    switch (k) {
        case Discount::Kind::regularized: return "regularized";
        case Discount::Kind::raw: return "raw";
        case Discount::Kind::constant: return "constant";
    }
    return "?";
}

inline const char* boundary_name(Boundary::Kind k) {
    switch (k) {
        case Boundary::Kind::shrinking: return "shrinking";
        case Boundary::Kind::dirichlet: return "dirichlet";
        case Boundary::Kind::extrapolate: return "extrapolate";
    }
    return "?";
}

}  // namespace detail

/**
 * dx² / (σ̄²H² + dx·Fmax + dx²·Dmax) with H = sup|h|, Fmax = sup(|f| + σ̄²|g|),
 * Dmax = sup of the discount rate, all taken over the grid nodes (and over
 * 11 times in [0, T] for time-dependent coefficients).
 */
inline double cfl_max_dt(const CoefficientSet& c, const GFunction& gf, const Domain& domain, double dx,
                         const std::function<double(double)>& rate = {}, double horizon = 1.0) {
    const std::size_t n = detail::node_count(domain, dx);
    const double h_step = (domain.x_hi - domain.x_lo) / static_cast<double>(n - 1);
    const std::size_t nt = c.time_homogeneous ? 1 : 11;
    double H = 0.0, F = 0.0, D = 0.0;
    for (std::size_t k = 0; k < nt; ++k) {
        const double t = nt == 1 ? 0.0 : horizon * static_cast<double>(k) / static_cast<double>(nt - 1);
        for (std::size_t i = 0; i < n; ++i) {
            const double x = domain.x_lo + h_step * static_cast<double>(i);
            H = std::max(H, std::abs(c.h(t, x)));
            F = std::max(F, std::abs(c.f(t, x)) + gf.sigma_hi_sq() * std::abs(c.g(t, x)));
            if (rate) D = std::max(D, std::abs(rate(x)));
        }
    }
    const double denom = gf.sigma_hi_sq() * H * H + h_step * F + h_step * h_step * D;
    if (denom <= 0.0) return std::numeric_limits<double>::infinity();
    return h_step * h_step / denom;
}

inline double cfl_max_dt(const RegularizedCoefficientSet& reg, const GFunction& gf, const Domain& domain, double dx,
                         double discount_scale = 1.0, double horizon = 1.0) {
    return cfl_max_dt(reg.as_coefficients(), gf, domain, dx,
                      detail::make_rate(Discount::regularized(discount_scale), &reg), horizon);
}

class BackwardSolver {
public:
    static PdeSolution run(const CoefficientSet& c, const detail::RateFn& rate, const GFunction& gf,
                           const std::function<double(double)>& terminal, const Domain& domain, const PdeGrid& grid,
                           const SolverOptions& opts) {
        const std::size_t n = detail::node_count(domain, grid.dx);
        const double dx = (domain.x_hi - domain.x_lo) / static_cast<double>(n - 1);
        const double T = grid.horizon;
        if (!(T > 0.0)) throw std::invalid_argument("pde: horizon must be positive");
        const std::size_t snaps = std::max<std::size_t>(grid.snapshots, 1);

        const double dt_cap = cfl_max_dt(c, gf, domain, grid.dx, rate, T);
        double dt_req = grid.dt;
        if (dt_req > 0.0) {
            if (dt_req > dt_cap) {
                throw CflViolation("pde: dt = " + std::to_string(dt_req) + " exceeds the CFL bound " +
                                   std::to_string(dt_cap));
            }
        } else {
            dt_req = grid.cfl_fraction * dt_cap;
            if (!std::isfinite(dt_req)) dt_req = T / static_cast<double>(snaps);
        }
        const auto per_snap = static_cast<std::size_t>(std::ceil(T / (dt_req * static_cast<double>(snaps)) - 1e-12));
        const std::size_t n_steps = std::max<std::size_t>(per_snap, 1) * snaps;
        const double dt = T / static_cast<double>(n_steps);
        const std::size_t stride = n_steps / snaps;

        PdeSolution sol;
        sol.x_lo_ = domain.x_lo;
        sol.dx_ = dx;
        sol.n_nodes_ = n;
        sol.mode_ = opts.mode;
        sol.discount_ = opts.discount;
        sol.dt_ = dt;
        sol.n_steps_ = n_steps;
        {
            std::ostringstream os;
            os.precision(17);
            os << "{\"model\":\"" << c.name << "\",\"sigma_lo_sq\":" << gf.sigma_lo_sq()
               << ",\"sigma_hi_sq\":" << gf.sigma_hi_sq() << ",\"x_lo\":" << domain.x_lo << ",\"x_hi\":" << domain.x_hi
               << ",\"dx\":" << dx << ",\"dt\":" << dt << ",\"steps\":" << n_steps << ",\"horizon\":" << T
               << ",\"mode\":\"" << detail::mode_name(opts.mode) << "\",\"discount\":\""
               << detail::discount_name(opts.discount.kind) << "\",\"discount_scale\":" << opts.discount.scale
               << ",\"rate\":" << opts.discount.rate << ",\"boundary\":\"" << detail::boundary_name(opts.boundary.kind)
               << "\",\"upwind\":" << (opts.upwind ? "true" : "false") << "}";
            sol.config_echo_ = os.str();
        }

        std::vector<double> xs(n), u(n), next(n);
        for (std::size_t i = 0; i < n; ++i) {
            xs[i] = domain.x_lo + dx * static_cast<double>(i);
            u[i] = terminal(xs[i]);
            if (!std::isfinite(u[i])) throw std::invalid_argument("pde: terminal value not finite at x = " + std::to_string(xs[i]));
            sol.m0_ = std::max(sol.m0_, std::abs(u[i]));
        }

        // Per-node coefficients: a = ½h², g, f, discount.
        std::vector<double> half_h2(n), gg(n), ff(n), dd(n);
        auto load_coefficients = [&](double t) {
            for (std::size_t i = 0; i < n; ++i) {
                const double h = c.h(t, xs[i]);
                half_h2[i] = 0.5 * h * h;
                gg[i] = c.g(t, xs[i]);
                ff[i] = c.f(t, xs[i]);
                dd[i] = rate(xs[i]);
            }
        };
        load_coefficients(T);

        std::size_t lo = 0, hi = n - 1;
        auto record = [&](double t) {
            sol.times_.push_back(t);
            sol.u_.push_back(u);
            sol.valid_lo_.push_back(lo);
            sol.valid_hi_.push_back(hi);
        };
        auto max_abs = [&]() {
            double m = 0.0;
            for (std::size_t i = lo; i <= hi; ++i) m = std::max(m, std::abs(u[i]));
            return m;
        };
        record(T);
        sol.level_max_abs_.reserve(n_steps + 1);
        sol.level_max_abs_.push_back(max_abs());

        const double inv_dx = 1.0 / dx;
        const double inv_2dx = 0.5 / dx;
        const double inv_dx2 = 1.0 / (dx * dx);
        const double s_lo = gf.sigma_lo_sq(), s_hi = gf.sigma_hi_sq();
        const bool sup = opts.mode == SolveMode::sup;
        std::vector<std::size_t> negative(n, 0);

        for (std::size_t step = 1; step <= n_steps; ++step) {
            const double t_old = T - dt * static_cast<double>(step - 1);
            const double t_new = step == n_steps ? 0.0 : T - dt * static_cast<double>(step);
            if (!c.time_homogeneous && step > 1) load_coefficients(t_old);

            std::size_t new_lo = lo, new_hi = hi;
            std::size_t first = 1, last = n - 2;
            if (opts.boundary.kind == Boundary::Kind::shrinking) {
                new_lo = lo + 1;
                new_hi = hi >= 1 ? hi - 1 : 0;
                if (new_lo > new_hi || hi == 0) {
                    throw std::runtime_error("pde: valid region empty at t = " + std::to_string(t_new) +
                                             "; domain too small for the horizon");
                }
                first = new_lo;
                last = new_hi;
            }

            if (!opts.upwind) {
                for (std::size_t i = first; i <= last; ++i) {
                    const double ux = (u[i + 1] - u[i - 1]) * inv_2dx;
                    const double uxx = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * inv_dx2;
                    const double arg = ux * gg[i] + half_h2[i] * uxx;
                    negative[i] += arg < 0.0;
                    const double nl = sup ? gf.twice(arg) : -gf.twice(-arg);
                    next[i] = u[i] + dt * (nl + ff[i] * ux - dd[i] * u[i]);
                }
            } else {
                for (std::size_t i = first; i <= last; ++i) {
                    const double fwd = (u[i + 1] - u[i]) * inv_dx;
                    const double bwd = (u[i] - u[i - 1]) * inv_dx;
                    const double uxx = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * inv_dx2;
                    auto op = [&](double s) {
                        const double adv = ff[i] + gg[i] * s;
                        return half_h2[i] * s * uxx + adv * (adv > 0.0 ? fwd : bwd);
                    };
                    const double l_lo = op(s_lo), l_hi = op(s_hi);
                    const double pick = sup ? std::max(l_lo, l_hi) : std::min(l_lo, l_hi);
                    next[i] = u[i] + dt * (pick - dd[i] * u[i]);
                }
            }

            switch (opts.boundary.kind) {
                case Boundary::Kind::shrinking:
                    break;
                case Boundary::Kind::dirichlet:
                    next[0] = opts.boundary.left(t_new);
                    next[n - 1] = opts.boundary.right(t_new);
                    break;
                case Boundary::Kind::extrapolate:
                    next[0] = 2.0 * next[1] - next[2];
                    next[n - 1] = 2.0 * next[n - 2] - next[n - 3];
                    break;
            }
            if (opts.boundary.kind == Boundary::Kind::shrinking) {
                for (std::size_t i = first; i <= last; ++i) u[i] = next[i];
                lo = new_lo;
                hi = new_hi;
            } else {
                std::swap(u, next);
            }

            const double m = max_abs();
            if (!std::isfinite(m)) {
                throw NumericalFailure("pde: non-finite field at step " + std::to_string(step), step);
            }
            sol.level_max_abs_.push_back(m);
            if (step % stride == 0) record(t_new);
        }
        for (std::size_t v : negative) sol.negative_args_ += v;
        sol.negative_by_node_ = std::move(negative);
        return sol;
    }
};

/// Solve with an ordinary coefficient set; the discount must be raw or constant.
inline PdeSolution solve_backward(const CoefficientSet& coeffs, const GFunction& gf,
                                  const std::function<double(double)>& terminal, const Domain& domain,
                                  const PdeGrid& grid, const SolverOptions& opts = {}) {
    return BackwardSolver::run(coeffs, detail::make_rate(opts.discount, nullptr), gf, terminal, domain, grid, opts);
}

/// Solve with the ε-regularized coefficients f^ε, g^ε, h^ε.
inline PdeSolution solve_backward(const RegularizedCoefficientSet& reg, const GFunction& gf,
                                  const std::function<double(double)>& terminal, const Domain& domain,
                                  const PdeGrid& grid, const SolverOptions& opts = {}) {
    return BackwardSolver::run(reg.as_coefficients(), detail::make_rate(opts.discount, &reg), gf, terminal, domain,
                               grid, opts);
}

inline double evaluate(const PdeSolution& s, double t, double x) { return s.evaluate(t, x); }

namespace detail {

inline double mirror_gap(const PdeSolution& up, const PdeSolution& down) {
    double worst = 0.0;
    const std::size_t levels = std::min(up.time_grid().size(), down.time_grid().size());
    for (std::size_t k = 0; k < levels; ++k) {
        const std::size_t lo = std::max(up.valid_lo(k), down.valid_lo(k));
        const std::size_t hi = std::min(up.valid_hi(k), down.valid_hi(k));
        for (std::size_t i = lo; i <= hi; ++i) {
            worst = std::max(worst, std::abs(up.level(k)[i] + down.level(k)[i]));
        }
    }
    return worst;
}

}  // namespace detail

/// max |u_sup[φ] + u_inf[−φ]| over the common valid region of all stored levels.
template <class Coefficients>
double duality_check(const Coefficients& coeffs, const GFunction& gf, const std::function<double(double)>& terminal,
                     const Domain& domain, const PdeGrid& grid, SolverOptions opts = {}) {
    opts.mode = SolveMode::sup;
    const auto up = solve_backward(coeffs, gf, terminal, domain, grid, opts);
    opts.mode = SolveMode::inf;
    if (opts.boundary.kind == Boundary::Kind::dirichlet) {
        auto l = opts.boundary.left, r = opts.boundary.right;
        opts.boundary.left = [l](double t) { return -l(t); };
        opts.boundary.right = [r](double t) { return -r(t); };
    }
    const auto down = solve_backward(coeffs, gf, [&terminal](double x) { return -terminal(x); }, domain, grid, opts);
    return detail::mirror_gap(up, down);
}

}  // namespace gfk

#endif  // GFK_PDE_SOLVER_HPP
