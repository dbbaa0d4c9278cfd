/**
 * @file gfunction.hpp
 * @brief Sublinear generator G of a one-dimensional G-Brownian motion
 *
 * G(x) = ½(σ̄² x⁺ − σ̲² x⁻), parameterized by the variance band [σ̲², σ̄²].
 */

#ifndef GFK_GFUNCTION_HPP
#define GFK_GFUNCTION_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gfk {

/// Volatility uncertainty band stored as variance bounds.
class GFunction {
public:
    GFunction(double sigma_lo_sq, double sigma_hi_sq)
        : lo_sq_(sigma_lo_sq), hi_sq_(sigma_hi_sq) {
        if (!std::isfinite(lo_sq_) || !std::isfinite(hi_sq_) || lo_sq_ < 0.0 || lo_sq_ > hi_sq_) {
            throw std::invalid_argument("GFunction: need 0 <= sigma_lo_sq <= sigma_hi_sq, got (" +
                                        std::to_string(lo_sq_) + ", " + std::to_string(hi_sq_) + ")");
        }
    }

    /// Build from volatilities (σ̲, σ̄); the only place volatilities get squared.
    static GFunction from_volatilities(double sigma_lo, double sigma_hi) {
        if (sigma_lo < 0.0 || sigma_hi < 0.0) {
            throw std::invalid_argument("GFunction: volatilities must be nonnegative");
        }
        return GFunction(sigma_lo * sigma_lo, sigma_hi * sigma_hi);
    }

    double sigma_lo_sq() const noexcept { return lo_sq_; }
    double sigma_hi_sq() const noexcept { return hi_sq_; }
    bool is_linear() const noexcept { return lo_sq_ == hi_sq_; }

    double operator()(double x) const noexcept {
        return 0.5 * (hi_sq_ * std::max(x, 0.0) - lo_sq_ * std::max(-x, 0.0));
    }

    /// 2G(x) = sup over σ in [σ̲², σ̄²] of σx; the form the PDE update uses.
    double twice(double x) const noexcept {
        return hi_sq_ * std::max(x, 0.0) - lo_sq_ * std::max(-x, 0.0);
    }

    /// Sharp ellipticity constant: G(y) − G(ȳ) ≥ β(y − ȳ) for y ≥ ȳ.
    double ellipticity_beta() const {
        if (lo_sq_ <= 0.0) {
            throw std::domain_error("GFunction: degenerate band (sigma_lo_sq = 0), ellipticity fails");
        }
        return 0.5 * lo_sq_;
    }

    friend bool operator==(const GFunction&, const GFunction&) = default;

private:
    double lo_sq_;
    double hi_sq_;
};

inline double eval_G(const GFunction& gf, double x) noexcept { return gf(x); }

inline double ellipticity_beta(const GFunction& gf) { return gf.ellipticity_beta(); }

}  // namespace gfk

#endif  // GFK_GFUNCTION_HPP
