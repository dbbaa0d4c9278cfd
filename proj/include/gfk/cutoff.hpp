/**
 * @file cutoff.hpp
 * @brief ε-regularized coefficients with bounded C^{1,2} tails
 *
 * Above ε⁻¹ every coefficient φ ∈ {f, g, h} is continued by
 *   φ̃(t,x) = φ(t,ε⁻¹) + φ_x(t,ε⁻¹) atan(x−ε⁻¹) + φ_xx(t,ε⁻¹)(1 − e^{−½(x−ε⁻¹)²}),
 * below ε the diffusion h is continued by
 *   h̄(t,x) = h(t,ε) + h_x(t,ε) a atan((x−ε)/a) + h_xx(t,ε)(1 − e^{−½(x−c)²}),
 * where the Gaussian center c is ε⁻¹ as printed in the original definition, or ε
 * on request. The discount state ϑ(x) is x up to ε⁻¹ and ε⁻¹ + atan(x−ε⁻¹) above.
 *
 * Tail time derivatives assume ∂²_{tx}φ = 0, so φ̃_t(t,x) = φ_t(t,ε⁻¹).
 */

#ifndef GFK_CUTOFF_HPP
#define GFK_CUTOFF_HPP

#include "gfk/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace gfk {

enum class HbarCenter { inv_eps, eps };

struct CutoffOptions {
    HbarCenter hbar_center = HbarCenter::inv_eps;
    /// Horizon over which the a-selection rule and δ_ε scan run.
    double horizon = 1.0;
    std::size_t scan_nodes = 10000;
};

struct RegularizedCoefficientSet {
    CoefficientSet base;
    double eps = 0.0;
    CoefficientFn f_eps;
    CoefficientFn g_eps;
    CoefficientFn h_eps;
    /// ϑ^ε; the time argument is ignored.
    CoefficientFn theta_eps;
    double a_const = 1.0;
    double delta_eps = 0.0;
    HbarCenter hbar_center = HbarCenter::inv_eps;

    double inv_eps() const noexcept { return 1.0 / eps; }

    /// The regularized triple viewed as an ordinary coefficient set.
    CoefficientSet as_coefficients() const {
        CoefficientSet c{f_eps, g_eps, h_eps, true, base.time_homogeneous, base.positive_domain,
                         base.name + "_eps"};
        return c;
    }

    /// Discount rate ϑ^ε(x) + ε.
    double discount_rate(double x) const { return theta_eps.value(0.0, x) + eps; }
};

namespace detail {

struct UpperTail {
    CoefficientFn phi;
    double edge;

    double value(double t, double x) const {
        if (x <= edge) return phi.value(t, x);
        const double s = x - edge;
        return phi.value(t, edge) + phi.dx(t, edge) * std::atan(s) + phi.dxx(t, edge) * (1.0 - std::exp(-0.5 * s * s));
    }
    double dx(double t, double x) const {
        if (x <= edge) return phi.dx(t, x);
        const double s = x - edge;
        return phi.dx(t, edge) / (1.0 + s * s) + phi.dxx(t, edge) * s * std::exp(-0.5 * s * s);
    }
    double dxx(double t, double x) const {
        if (x <= edge) return phi.dxx(t, x);
        const double s = x - edge;
        const double q = 1.0 + s * s;
        return -phi.dx(t, edge) * 2.0 * s / (q * q) + phi.dxx(t, edge) * (1.0 - s * s) * std::exp(-0.5 * s * s);
    }
    double dt(double t, double x) const {
        if (!phi.dt) return 0.0;
        return phi.dt(t, std::min(x, edge));
    }
};

/// h^ε on all three pieces.
struct DiffusionCutoff {
    UpperTail upper;
    double eps;
    double a;
    double center;

    const CoefficientFn& h() const { return upper.phi; }

    double value(double t, double x) const {
        if (x >= eps) return upper.value(t, x);
        const double s = x - eps;
        const double c = x - center;
        return h().value(t, eps) + h().dx(t, eps) * a * std::atan(s / a) + h().dxx(t, eps) * (1.0 - std::exp(-0.5 * c * c));
    }
    double dx(double t, double x) const {
        if (x >= eps) return upper.dx(t, x);
        const double r = (x - eps) / a;
        const double c = x - center;
        return h().dx(t, eps) / (1.0 + r * r) + h().dxx(t, eps) * c * std::exp(-0.5 * c * c);
    }
    double dxx(double t, double x) const {
        if (x >= eps) return upper.dxx(t, x);
        const double r = (x - eps) / a;
        const double q = 1.0 + r * r;
        const double c = x - center;
        return -h().dx(t, eps) * 2.0 * r / (a * q * q) + h().dxx(t, eps) * (1.0 - c * c) * std::exp(-0.5 * c * c);
    }
    double dt(double t, double x) const {
        if (!h().dt) return 0.0;
        return h().dt(t, std::clamp(x, eps, upper.edge));
    }
};

template <class Piecewise>
CoefficientFn wrap(std::shared_ptr<const Piecewise> p) {
    return CoefficientFn{
        [p](double t, double x) { return p->value(t, x); },
        [p](double t, double x) { return p->dx(t, x); },
        [p](double t, double x) { return p->dxx(t, x); },
        [p](double t, double x) { return p->dt(t, x); },
    };
}

inline std::vector<double> time_scan(const CoefficientSet& base, double horizon) {
    if (base.time_homogeneous) return {0.0};
    std::vector<double> ts(101);
    for (std::size_t i = 0; i < ts.size(); ++i) ts[i] = horizon * static_cast<double>(i) / 100.0;
    return ts;
}

}  // namespace detail

/// Constant a of the lower h-cutoff: 1 when h_x(t,ε) ≤ 0, else min(1, h/(π h_x)); infimum over t.
inline double select_a(const CoefficientSet& base, double eps, double horizon) {
    double a = 1.0;
    for (double t : detail::time_scan(base, horizon)) {
        const double hx = base.h.dx(t, eps);
        if (hx > 0.0) {
            const double hv = base.h.value(t, eps);
            if (!(hv > 0.0)) throw std::domain_error("select_a: h(t, eps) must be positive");
            a = std::min(a, hv / (std::numbers::pi * hx));
        }
    }
    return a;
}

inline RegularizedCoefficientSet build_cutoff(const CoefficientSet& base, double eps, const CutoffOptions& opts = {}) {
    if (!(eps > 0.0 && eps < 1.0)) {
        throw std::invalid_argument("build_cutoff: eps must lie in (0,1), got " + std::to_string(eps));
    }
    for (const auto* c : {&base.f, &base.g, &base.h}) {
        if (!c->value || !c->has_space_derivatives()) {
            throw std::invalid_argument("build_cutoff: base '" + base.name + "' lacks required spatial derivatives");
        }
    }
    const double edge = 1.0 / eps;

    RegularizedCoefficientSet reg;
    reg.base = base;
    reg.eps = eps;
    reg.hbar_center = opts.hbar_center;
    reg.a_const = select_a(base, eps, opts.horizon);

    reg.f_eps = detail::wrap(std::make_shared<const detail::UpperTail>(detail::UpperTail{base.f, edge}));
    reg.g_eps = detail::wrap(std::make_shared<const detail::UpperTail>(detail::UpperTail{base.g, edge}));
    const double center = opts.hbar_center == HbarCenter::inv_eps ? edge : eps;
    reg.h_eps = detail::wrap(std::make_shared<const detail::DiffusionCutoff>(
        detail::DiffusionCutoff{detail::UpperTail{base.h, edge}, eps, reg.a_const, center}));

    reg.theta_eps = CoefficientFn{
        [edge](double, double x) { return x <= edge ? x : edge + std::atan(x - edge); },
        [edge](double, double x) {
            if (x <= edge) return 1.0;
            const double s = x - edge;
            return 1.0 / (1.0 + s * s);
        },
        [edge](double, double x) {
            if (x <= edge) return 0.0;
            const double s = x - edge;
            const double q = 1.0 + s * s;
            return -2.0 * s / (q * q);
        },
        [](double, double) { return 0.0; },
    };

    // δ_ε: scan h^ε densely over [0, ε] (the h̄ piece) and log-spaced over [ε, 10ε⁻¹],
    // then subtract a Lipschitz allowance for the gaps between scan nodes.
    const std::size_t n = std::max<std::size_t>(opts.scan_nodes, 2);
    double min_h = std::numeric_limits<double>::infinity();
    double max_slope = 0.0;
    double max_gap = 0.0;
    for (double t : detail::time_scan(base, opts.horizon)) {
        for (std::size_t i = 0; i < n; ++i) {
            const double x = eps * static_cast<double>(i) / static_cast<double>(n - 1);
            min_h = std::min(min_h, reg.h_eps.value(t, x));
            max_slope = std::max(max_slope, std::abs(reg.h_eps.dx(t, x)));
        }
        const double ratio = std::log(10.0 * edge / eps);
        double prev = eps;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = eps * std::exp(ratio * static_cast<double>(i) / static_cast<double>(n - 1));
            min_h = std::min(min_h, reg.h_eps.value(t, x));
            max_gap = std::max(max_gap, (x - prev) * std::abs(reg.h_eps.dx(t, x)));
            prev = x;
        }
    }
    max_gap = std::max(max_gap, max_slope * eps / static_cast<double>(n - 1));
    if (!(min_h > 0.0)) {
        throw std::domain_error("build_cutoff: h^eps is not bounded away from zero (scan minimum " +
                                std::to_string(min_h) + ")");
    }
    reg.delta_eps = min_h - 0.5 * max_gap > 0.0 ? min_h - 0.5 * max_gap : 0.5 * min_h;
    return reg;
}

/// a^ε, b^ε and their partial derivatives at one point.
struct ABRecord {
    double a_val;
    double b_val;
    double da_dx, da_dxx, da_dt;
    double db_dx, db_dxx, db_dt;
    double db_dy, db_dz;
    double db_dxy, db_dxz;
    double db_dyy, db_dzz, db_dyz;
};

/**
 * a^ε = ½(h^ε)²σ and b^ε = (g^εσ + f^ε)z − (ϑ^ε(x)+ε)y with their derivatives.
 * The partials are the exact derivatives of these two expressions.
 */
inline ABRecord eval_ab(const RegularizedCoefficientSet& reg, double sigma, double t, double x, double y, double z) {
    const double h = reg.h_eps.value(t, x), hx = reg.h_eps.dx(t, x), hxx = reg.h_eps.dxx(t, x), ht = reg.h_eps.dt(t, x);
    const double f = reg.f_eps.value(t, x), fx = reg.f_eps.dx(t, x), fxx = reg.f_eps.dxx(t, x), ft = reg.f_eps.dt(t, x);
    const double g = reg.g_eps.value(t, x), gx = reg.g_eps.dx(t, x), gxx = reg.g_eps.dxx(t, x), gt = reg.g_eps.dt(t, x);
    const double th = reg.theta_eps.value(t, x), thx = reg.theta_eps.dx(t, x), thxx = reg.theta_eps.dxx(t, x);

    ABRecord r{};
    r.a_val = 0.5 * h * h * sigma;
    r.b_val = (g * sigma + f) * z - (th + reg.eps) * y;
    r.da_dx = sigma * h * hx;
    r.da_dxx = sigma * (h * hxx + hx * hx);
    r.da_dt = sigma * h * ht;
    r.db_dx = z * (gx * sigma + fx) - thx * y;
    r.db_dxx = z * (gxx * sigma + fxx) - thxx * y;
    r.db_dt = z * (gt * sigma + ft);
    r.db_dy = -(th + reg.eps);
    r.db_dz = g * sigma + f;
    r.db_dxy = -thx;
    r.db_dxz = gx * sigma + fx;
    r.db_dyy = 0.0;
    r.db_dzz = 0.0;
    r.db_dyz = 0.0;
    return r;
}

struct JunctionEntry {
    std::string coefficient;
    std::string junction;
    int order;
    double mismatch;
    double tol;
    bool pass;
};

struct JunctionReport {
    std::vector<JunctionEntry> entries;
    bool pass = true;

    std::vector<std::string> failing() const {
        std::vector<std::string> names;
        for (const auto& e : entries) {
            if (!e.pass) names.push_back(e.coefficient + "@" + e.junction + "/d" + std::to_string(e.order));
        }
        return names;
    }

    std::string to_csv() const;
};

namespace detail {

/// One-sided quadratic fit through q(J + sδ), s = ±1, ±2, ±3; returns {q(J), q'(J)}.
template <class Q>
std::pair<double, double> one_sided(const Q& q, double junction, double step, int side) {
    const double y1 = q(junction + side * step);
    const double y2 = q(junction + side * 2.0 * step);
    const double y3 = q(junction + side * 3.0 * step);
    const double value = 3.0 * y1 - 3.0 * y2 + y3;
    const double slope = -side * (2.5 * y1 - 4.0 * y2 + 1.5 * y3) / step;
    return {value, slope};
}

}  // namespace detail

/**
 * Continuity of value, first and second derivative across each junction:
 * ε⁻¹ for f^ε, g^ε, h^ε, ϑ^ε and additionally ε for h^ε.
 * Value and first-derivative jumps come from one-sided fits of the function;
 * the second-derivative jump from one-sided fits of its first-derivative map.
 */
inline JunctionReport junction_report(const RegularizedCoefficientSet& reg, double tol, double stencil = 1e-6,
                                      double t = 0.0) {
    JunctionReport rep;
    auto check = [&](const std::string& name, const CoefficientFn& fn, const std::string& jname, double j) {
        auto val = [&](double x) { return fn.value(t, x); };
        auto der = [&](double x) { return fn.dx(t, x); };
        const auto [vl, sl] = detail::one_sided(val, j, stencil, -1);
        const auto [vr, sr] = detail::one_sided(val, j, stencil, +1);
        const auto [dl, cl] = detail::one_sided(der, j, stencil, -1);
        const auto [dr, cr] = detail::one_sided(der, j, stencil, +1);
        (void)dl;
        (void)dr;
        const double mism[3] = {std::abs(vl - vr), std::abs(sl - sr), std::abs(cl - cr)};
        for (int order = 0; order < 3; ++order) {
            const bool ok = std::isfinite(mism[order]) && mism[order] < tol;
            rep.entries.push_back({name, jname, order, mism[order], tol, ok});
            rep.pass = rep.pass && ok;
        }
    };
    const double edge = reg.inv_eps();
    check("f", reg.f_eps, "inv_eps", edge);
    check("g", reg.g_eps, "inv_eps", edge);
    check("h", reg.h_eps, "eps", reg.eps);
    check("h", reg.h_eps, "inv_eps", edge);
    check("theta", reg.theta_eps, "inv_eps", edge);
    return rep;
}

inline std::string JunctionReport::to_csv() const {
    std::string out = "coefficient,junction,order,mismatch,tol,pass\n";
    char buf[64];
    for (const auto& e : entries) {
        out += e.coefficient + "," + e.junction + "," + std::to_string(e.order) + ",";
        std::snprintf(buf, sizeof buf, "%.6e,%.6e,", e.mismatch, e.tol);
        out += buf;
        out += e.pass ? "1\n" : "0\n";
    }
    return out;
}

}  // namespace gfk

#endif  // GFK_CUTOFF_HPP
