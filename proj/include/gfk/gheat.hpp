/**
 * @file gheat.hpp
 * @brief G-normal increment law from the G-heat equation, and inversion sampling
 *
 * For each threshold a, the forward problem u_t = G(u_xx), u(0,x) = 1{x ≤ a}
 * is marched to t = 1 and F(a) = u(1, 0) = Ê[1{Δ ≤ a}] is recorded, where Δ
 * is a unit-time G-normal increment. Increments over a step dt are drawn as
 * √dt · F⁻¹(U) with F⁻¹ the generalized inverse of the piecewise-linear
 * interpolant of the table.
 */

#ifndef GFK_GHEAT_HPP
#define GFK_GHEAT_HPP

#include "gfk/csv.hpp"
#include "gfk/gfunction.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gfk {

/// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Spatial/temporal resolution of the G-heat solve.
struct GHeatNumerics {
    double x_halfwidth = 8.0;
    double dx = 0.02;
    double dt = 3.2e-4;

    /// Domain 8σ̄, 400 cells per σ̄-unit of half-width, dt at 80% of dx²/σ̄².
    static GHeatNumerics defaults_for(const GFunction& gf) {
        const double s = std::sqrt(gf.sigma_hi_sq());
        GHeatNumerics n;
        n.x_halfwidth = 8.0 * s;
        n.dx = 0.02 * s;
        n.dt = 0.8 * n.dx * n.dx / gf.sigma_hi_sq();
        return n;
    }
};

/// 201 equispaced levels over [−5σ̄, 5σ̄].
inline std::vector<double> default_level_grid(const GFunction& gf, std::size_t n = 201) {
    const double s = std::sqrt(gf.sigma_hi_sq());
    std::vector<double> a(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = -5.0 * s + 10.0 * s * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return a;
}

class IncrementLaw {
public:
    /// Validates every invariant; `tol` is the slack for the constant-volatility lower bound.
    IncrementLaw(std::vector<double> a_grid, std::vector<double> cdf, GFunction gf, double tol = 5e-3)
        : a_(std::move(a_grid)), cdf_(std::move(cdf)), gf_(gf) {
        validate(tol);
    }

    std::span<const double> a_grid() const noexcept { return a_; }
    std::span<const double> cdf() const noexcept { return cdf_; }
    const GFunction& gfunction() const noexcept { return gf_; }

    /// Piecewise-linear F(a), flat beyond the table.
    double cdf_at(double a) const {
        if (a <= a_.front()) return cdf_.front();
        if (a >= a_.back()) return cdf_.back();
        auto it = std::upper_bound(a_.begin(), a_.end(), a);
        const std::size_t i = static_cast<std::size_t>(it - a_.begin());
        const double w = (a - a_[i - 1]) / (a_[i] - a_[i - 1]);
        return cdf_[i - 1] + w * (cdf_[i] - cdf_[i - 1]);
    }

    /// Generalized inverse: smallest level with interpolated F ≥ u.
    double quantile(double u) const {
        if (u <= cdf_.front()) return a_.front();
        if (u > cdf_.back()) return a_.back();
        auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
        const std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
        // cdf_[i-1] < u <= cdf_[i], so the denominator is positive.
        const double w = (u - cdf_[i - 1]) / (cdf_[i] - cdf_[i - 1]);
        return a_[i - 1] + w * (a_[i] - a_[i - 1]);
    }

    double sample(double u, double dt) const { return std::sqrt(dt) * quantile(u); }

private:
    void validate(double tol) const {
        if (a_.size() < 2 || a_.size() != cdf_.size()) {
            throw std::invalid_argument("IncrementLaw: need matching a/cdf sequences of length >= 2");
        }
        for (std::size_t i = 0; i < a_.size(); ++i) {
            if (!std::isfinite(a_[i]) || !std::isfinite(cdf_[i])) {
                throw std::invalid_argument("IncrementLaw: non-finite entry at index " + std::to_string(i));
            }
            if (i > 0 && !(a_[i] > a_[i - 1])) {
                throw std::invalid_argument("IncrementLaw: a_grid not strictly increasing at index " + std::to_string(i));
            }
            if (i > 0 && cdf_[i] < cdf_[i - 1]) {
                throw std::invalid_argument("IncrementLaw: cdf decreases at index " + std::to_string(i));
            }
            if (cdf_[i] < 0.0 || cdf_[i] > 1.0) {
                throw std::invalid_argument("IncrementLaw: cdf outside [0,1] at index " + std::to_string(i));
            }
        }
        if (cdf_.front() > 0.02 || cdf_.back() < 0.98) {
            throw std::invalid_argument("IncrementLaw: grid does not cover the effective support");
        }
        const double s_hi = std::sqrt(gf_.sigma_hi_sq());
        const double s_lo = std::sqrt(gf_.sigma_lo_sq());
        for (std::size_t i = 0; i < a_.size(); ++i) {
            const double a = a_[i];
            const double lo_law = s_lo > 0.0 ? normal_cdf(a / s_lo) : (a > 0.0 ? 1.0 : (a < 0.0 ? 0.0 : 0.5));
            const double bound = std::max(normal_cdf(a / s_hi), lo_law);
            if (cdf_[i] < bound - tol) {
                throw std::invalid_argument("IncrementLaw: F(" + std::to_string(a) +
                                            ") below a constant-volatility law by more than tolerance");
            }
        }
    }

    std::vector<double> a_;
    std::vector<double> cdf_;
    GFunction gf_;
};

namespace detail {

/// Marches u_t = G(u_xx) to t = 1 from the cell-averaged indicator of (−∞, a] and returns u(1, 0).
inline double gheat_point(const GFunction& gf, double a, double half, double dx, std::size_t n_steps) {
    const std::size_t cells = static_cast<std::size_t>(std::llround(2.0 * half / dx));
    const double h = 2.0 * half / static_cast<double>(cells);
    const double dt = 1.0 / static_cast<double>(n_steps);
    const double lam = dt / (h * h);

    std::vector<double> u(cells + 1), next(cells + 1);
    for (std::size_t j = 0; j <= cells; ++j) {
        const double x = -half + h * static_cast<double>(j);
        u[j] = std::clamp((a + 0.5 * h - x) / h, 0.0, 1.0);
    }
    // Far field of 1{x <= a}: 1 on the left, 0 on the right.
    u.front() = 1.0;
    u.back() = 0.0;
    next.front() = 1.0;
    next.back() = 0.0;

    for (std::size_t k = 0; k < n_steps; ++k) {
        for (std::size_t j = 1; j < cells; ++j) {
            next[j] = u[j] + lam * gf(u[j + 1] - 2.0 * u[j] + u[j - 1]);
        }
        std::swap(u, next);
    }

    const double pos = half / h;
    const std::size_t j0 = std::min(static_cast<std::size_t>(pos), cells - 1);
    const double w = pos - static_cast<double>(j0);
    return std::clamp(u[j0] + w * (u[j0 + 1] - u[j0]), 0.0, 1.0);
}

}  // namespace detail

inline IncrementLaw solve_gheat_cdf(const GFunction& gf, std::span<const double> a_grid,
                                    const GHeatNumerics& numerics) {
    if (!(numerics.dx > 0.0) || !(numerics.dt > 0.0) || !(numerics.x_halfwidth > 0.0)) {
        throw std::invalid_argument("solve_gheat_cdf: numerics must be positive");
    }
    if (numerics.dt > numerics.dx * numerics.dx / gf.sigma_hi_sq()) {
        throw std::invalid_argument("solve_gheat_cdf: stability bound dt <= dx^2/sigma_hi^2 violated");
    }
    if (a_grid.size() < 2) throw std::invalid_argument("solve_gheat_cdf: need at least two levels");
    for (std::size_t i = 0; i < a_grid.size(); ++i) {
        if (i > 0 && !(a_grid[i] > a_grid[i - 1])) {
            throw std::invalid_argument("solve_gheat_cdf: a_grid must be strictly increasing");
        }
        if (std::abs(a_grid[i]) > numerics.x_halfwidth) {
            throw std::invalid_argument("solve_gheat_cdf: level " + std::to_string(a_grid[i]) +
                                        " outside the spatial domain");
        }
    }

    const auto n_steps = static_cast<std::size_t>(std::ceil(1.0 / numerics.dt - 1e-9));
    std::vector<double> cdf(a_grid.size());
    for (std::size_t i = 0; i < a_grid.size(); ++i) {
        cdf[i] = detail::gheat_point(gf, a_grid[i], numerics.x_halfwidth, numerics.dx, n_steps);
    }
    for (std::size_t i = 1; i < cdf.size(); ++i) {
        if (cdf[i] < cdf[i - 1] - 1e-6) {
            throw std::runtime_error("solve_gheat_cdf: non-monotone output at level " + std::to_string(a_grid[i]) +
                                     "; grid under-resolved");
        }
        cdf[i] = std::max(cdf[i], cdf[i - 1]);
    }
    return IncrementLaw(std::vector<double>(a_grid.begin(), a_grid.end()), std::move(cdf), gf);
}

/// Default grid and numerics for the band.
inline IncrementLaw solve_gheat_cdf(const GFunction& gf) {
    const auto levels = default_level_grid(gf);
    return solve_gheat_cdf(gf, levels, GHeatNumerics::defaults_for(gf));
}

inline double sample_increment(const IncrementLaw& law, double u, double dt) { return law.sample(u, dt); }

inline void save_law_csv(const IncrementLaw& law, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_law_csv: cannot open '" + path + "'");
    out << "a,cdf\n";
    for (std::size_t i = 0; i < law.a_grid().size(); ++i) {
        out << csv::format_double(law.a_grid()[i]) << ',' << csv::format_double(law.cdf()[i]) << '\n';
    }
}

inline IncrementLaw load_law_csv(const std::string& path, const GFunction& gf) {
    const auto table = csv::read(path);
    const std::size_t ia = table.column("a");
    const std::size_t ic = table.column("cdf");
    std::vector<double> a, cdf;
    for (const auto& row : table.rows) {
        a.push_back(csv::to_double(row[ia]));
        cdf.push_back(csv::to_double(row[ic]));
    }
    return IncrementLaw(std::move(a), std::move(cdf), gf);
}

}  // namespace gfk

#endif  // GFK_GHEAT_HPP
