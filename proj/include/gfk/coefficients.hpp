/**
 * @file coefficients.hpp
 * @brief Coefficient triples (f, g, h) of dX = f dt + g d⟨B⟩ + h dB
 */

#ifndef GFK_COEFFICIENTS_HPP
#define GFK_COEFFICIENTS_HPP

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace gfk {

using ScalarField = std::function<double(double t, double x)>;

/// A coefficient with the derivatives the cutoff and the partials need.
struct CoefficientFn {
    ScalarField value;
    ScalarField dx;
    ScalarField dxx;
    ScalarField dt;

    double operator()(double t, double x) const { return value(t, x); }
    bool has_space_derivatives() const { return static_cast<bool>(dx) && static_cast<bool>(dxx); }
};

struct CoefficientSet {
    CoefficientFn f;
    CoefficientFn g;
    CoefficientFn h;
    /// h(t,x) > 0 for x > 0.
    bool positive_diffusion = false;
    /// Coefficients do not depend on t (lets the solver cache them per node).
    bool time_homogeneous = false;
    /// Evaluation requires x > 0.
    bool positive_domain = false;
    std::string name;
};

namespace detail {

inline CoefficientFn linear_in_x(double slope) {
    return CoefficientFn{
        [slope](double, double x) { return slope * x; },
        [slope](double, double) { return slope; },
        [](double, double) { return 0.0; },
        [](double, double) { return 0.0; },
    };
}

inline void require_positive(double x, const char* who) {
    if (!(x > 0.0)) {
        throw std::domain_error(std::string(who) + ": evaluation at x = " + std::to_string(x) + " <= 0");
    }
}

}  // namespace detail

/// Dothan model with a quadratic-variation drift: f = βx, g = γx, h = αx.
inline CoefficientSet dothan_coeffs(double alpha, double beta, double gamma) {
    if (!(alpha > 0.0)) throw std::invalid_argument("dothan_coeffs: alpha must be > 0");
    CoefficientSet c{
        detail::linear_in_x(beta),
        detail::linear_in_x(gamma),
        detail::linear_in_x(alpha),
        true,
        true,
        false,
        "dothan",
    };
    return c;
}

/// Parameters of dY = k(θ−Y)dt + k̃(θ̃−Y)d⟨B⟩ + α dB, X = e^Y.
struct ExpVasicekParams {
    double k = 0.3;
    double theta = 0.2;
    double k_tilde = 0.3;
    double theta_tilde = 0.2;
    double alpha = 0.3;
};

/**
 * X-coordinate coefficients of the exponential Vasicek model:
 *   f = x k(θ − log x),  g = x(k̃(θ̃ − log x) + ½α²),  h = αx,  for x > 0.
 */
inline CoefficientSet expvasicek_x_coeffs(const ExpVasicekParams& p) {
    const double k = p.k, th = p.theta, kt = p.k_tilde, tht = p.theta_tilde, al = p.alpha;
    const double half_a2 = 0.5 * al * al;
    auto zero = [](double, double) { return 0.0; };

    CoefficientFn f{
        [=](double, double x) { detail::require_positive(x, "expvasicek f"); return x * k * (th - std::log(x)); },
        [=](double, double x) { detail::require_positive(x, "expvasicek f_x"); return k * (th - std::log(x)) - k; },
        [=](double, double x) { detail::require_positive(x, "expvasicek f_xx"); return -k / x; },
        zero,
    };
    CoefficientFn g{
        [=](double, double x) {
            detail::require_positive(x, "expvasicek g");
            return x * (kt * (tht - std::log(x)) + half_a2);
        },
        [=](double, double x) {
            detail::require_positive(x, "expvasicek g_x");
            return kt * (tht - std::log(x)) + half_a2 - kt;
        },
        [=](double, double x) { detail::require_positive(x, "expvasicek g_xx"); return -kt / x; },
        zero,
    };
    CoefficientFn h{
        [=](double, double x) { detail::require_positive(x, "expvasicek h"); return al * x; },
        [=](double, double) { return al; },
        [](double, double) { return 0.0; },
        zero,
    };
    return CoefficientSet{std::move(f), std::move(g), std::move(h), al > 0.0, true, true, "expvasicek"};
}

inline CoefficientSet expvasicek_x_coeffs(double k, double theta, double k_tilde, double theta_tilde, double alpha) {
    return expvasicek_x_coeffs(ExpVasicekParams{k, theta, k_tilde, theta_tilde, alpha});
}

}  // namespace gfk

#endif  // GFK_COEFFICIENTS_HPP
