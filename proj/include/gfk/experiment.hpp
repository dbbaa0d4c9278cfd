/**
 * @file experiment.hpp
 * @brief Config-driven experiments: value tables, trajectories, ε sweeps, classical check
 *
 * Configuration is an INI file with sections [model] [band] [run] [pde] [mc]
 * [gheat] [output]; any key can be overridden as `section.key=value`.
 */

#ifndef GFK_EXPERIMENT_HPP
#define GFK_EXPERIMENT_HPP

#include "gfk/coefficients.hpp"
#include "gfk/csv.hpp"
#include "gfk/cutoff.hpp"
#include "gfk/gfunction.hpp"
#include "gfk/gheat.hpp"
#include "gfk/paths.hpp"
#include "gfk/pde_solver.hpp"
#include "gfk/random.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gfk {

inline constexpr const char* kVersion = "0.3.0";

struct ExperimentConfig {
    // [model]
    std::string kind = "dothan";
    double alpha = 0.3;
    double beta = 0.8;
    double gamma = -0.2;
    double strike = 3.0;
    double k = 0.3;
    double theta = 0.2;
    double k_tilde = 0.3;
    double theta_tilde = 0.2;
    double x0 = 3.0;
    // [band]
    double sigma_lo = 1.0;
    double sigma_hi = 1.0;
    bool as_variance = false;
    std::vector<double> sigma_lo_list{0.5, 0.8, 1.0};
    std::vector<double> sweep_list{-0.2, 0.0, 0.2};
    // [run]
    double horizon = 1.0;
    double eps = 1e-6;
    double discount_scale = 1.0;
    std::vector<double> eps_list{1e-6, 1e-7};
    // [pde]
    double x_lo = 0.0;
    double x_hi = 20.0;
    double dx = 0.01;
    double dt = 0.0;
    double cfl_fraction = 0.8;
    std::string boundary = "extrapolate";
    std::size_t snapshots = 100;
    bool upwind = false;
    std::string hbar_center = "inv_eps";
    // [mc]
    std::size_t n_paths = 100000;
    std::size_t n_steps = 25;
    std::size_t refinement = 10;
    std::uint64_t seed = 20201215;
    std::size_t dump_paths = 100;
    std::string dothan_update = "exact";
    // [gheat]
    double gheat_halfwidth = 8.0;
    double gheat_dx = 0.02;
    std::size_t gheat_levels = 201;
    // [output]
    std::string out_dir = "out";

    bool operator==(const ExperimentConfig&) const = default;

    /// Named parameter sets: Dothan call (X0 = K = 3) or exponential Vasicek bond (X0 = 0.2).
    static ExperimentConfig defaults(const std::string& kind) {
        ExperimentConfig c;
        if (kind == "dothan") return c;
        if (kind != "expvasicek") throw std::invalid_argument("config: unknown model.kind '" + kind + "'");
        c.kind = kind;
        c.x0 = 0.2;
        c.x_lo = 0.002;
        c.x_hi = 3.0;
        c.dx = 0.002;
        return c;
    }

    std::string sweep_name() const { return kind == "dothan" ? "gamma" : "theta_tilde"; }
    double sweep_value() const { return kind == "dothan" ? gamma : theta_tilde; }
};

namespace config_detail {

using Entries = std::vector<std::pair<std::string, std::string>>;

inline std::string fmt(double v) { return csv::format_double(v); }

inline std::string fmt_list(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
    return s;
}

inline double parse_double(const std::string& key, const std::string& s) {
    try {
        return csv::to_double(s);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: '" + key + "' expects a number, got '" + s + "'");
    }
}

inline std::size_t parse_size(const std::string& key, const std::string& s) {
    const double v = parse_double(key, s);
    if (v < 0.0 || v != std::floor(v)) throw std::invalid_argument("config: '" + key + "' expects a nonnegative integer");
    return static_cast<std::size_t>(v);
}

inline bool parse_bool(const std::string& key, const std::string& s) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw std::invalid_argument("config: '" + key + "' expects true/false");
}

inline std::vector<double> parse_list(const std::string& key, const std::string& s) {
    std::vector<double> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) out.push_back(parse_double(key, item));
    }
    if (out.empty()) throw std::invalid_argument("config: '" + key + "' expects a non-empty list");
    return out;
}

}  // namespace config_detail

/// Flat `section.key` → text view of a config, in file order.
inline config_detail::Entries to_entries(const ExperimentConfig& c) {
    using config_detail::fmt;
    using config_detail::fmt_list;
    return {
        {"model.kind", c.kind},
        {"model.alpha", fmt(c.alpha)},
        {"model.beta", fmt(c.beta)},
        {"model.gamma", fmt(c.gamma)},
        {"model.strike", fmt(c.strike)},
        {"model.k", fmt(c.k)},
        {"model.theta", fmt(c.theta)},
        {"model.k_tilde", fmt(c.k_tilde)},
        {"model.theta_tilde", fmt(c.theta_tilde)},
        {"model.x0", fmt(c.x0)},
        {"band.sigma_lo", fmt(c.sigma_lo)},
        {"band.sigma_hi", fmt(c.sigma_hi)},
        {"band.as_variance", c.as_variance ? "true" : "false"},
        {"band.sigma_lo_list", fmt_list(c.sigma_lo_list)},
        {"band.sweep_list", fmt_list(c.sweep_list)},
        {"run.horizon", fmt(c.horizon)},
        {"run.eps", fmt(c.eps)},
        {"run.discount_scale", fmt(c.discount_scale)},
        {"run.eps_list", fmt_list(c.eps_list)},
        {"pde.x_lo", fmt(c.x_lo)},
        {"pde.x_hi", fmt(c.x_hi)},
        {"pde.dx", fmt(c.dx)},
        {"pde.dt", fmt(c.dt)},
        {"pde.cfl_fraction", fmt(c.cfl_fraction)},
        {"pde.boundary", c.boundary},
        {"pde.snapshots", std::to_string(c.snapshots)},
        {"pde.upwind", c.upwind ? "true" : "false"},
        {"pde.hbar_center", c.hbar_center},
        {"mc.n_paths", std::to_string(c.n_paths)},
        {"mc.n_steps", std::to_string(c.n_steps)},
        {"mc.refinement", std::to_string(c.refinement)},
        {"mc.seed", std::to_string(c.seed)},
        {"mc.dump_paths", std::to_string(c.dump_paths)},
        {"mc.dothan_update", c.dothan_update},
        {"gheat.halfwidth", fmt(c.gheat_halfwidth)},
        {"gheat.dx", fmt(c.gheat_dx)},
        {"gheat.levels", std::to_string(c.gheat_levels)},
        {"output.dir", c.out_dir},
    };
}

inline void validate(const ExperimentConfig& c) {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw std::invalid_argument("config: " + what);
    };
    require(c.kind == "dothan" || c.kind == "expvasicek", "model.kind must be dothan or expvasicek");
    require(c.alpha > 0.0, "model.alpha must be > 0");
    require(c.x0 > 0.0, "model.x0 must be > 0");
    require(c.sigma_hi > 0.0 && c.sigma_lo >= 0.0 && c.sigma_lo <= c.sigma_hi, "band needs 0 <= sigma_lo <= sigma_hi, sigma_hi > 0");
    for (double s : c.sigma_lo_list) require(s >= 0.0 && s <= c.sigma_hi, "band.sigma_lo_list entries must lie in [0, sigma_hi]");
    require(c.horizon > 0.0, "run.horizon must be > 0");
    require(c.eps > 0.0 && c.eps < 1.0, "run.eps must lie in (0,1)");
    for (double e : c.eps_list) require(e > 0.0 && e < 1.0, "run.eps_list entries must lie in (0,1)");
    require(c.discount_scale >= 0.0, "run.discount_scale must be >= 0");
    require(c.x_hi > c.x_lo && c.dx > 0.0, "pde needs x_lo < x_hi and dx > 0");
    require(c.x0 >= c.x_lo && c.x0 <= c.x_hi, "model.x0 must lie inside the PDE domain");
    require(c.kind != "expvasicek" || c.x_lo > 0.0, "exp-Vasicek coefficients need pde.x_lo > 0");
    require(c.dt >= 0.0 && c.cfl_fraction > 0.0 && c.cfl_fraction <= 1.0, "pde.dt >= 0 and 0 < pde.cfl_fraction <= 1");
    require(c.boundary == "extrapolate" || c.boundary == "shrinking", "pde.boundary must be extrapolate or shrinking");
    require(c.snapshots >= 1, "pde.snapshots must be >= 1");
    require(c.hbar_center == "inv_eps" || c.hbar_center == "eps", "pde.hbar_center must be inv_eps or eps");
    require(c.n_paths >= 1 && c.n_steps >= 1 && c.refinement >= 1, "mc counts must be >= 1");
    require(c.dothan_update == "exact" || c.dothan_update == "euler", "mc.dothan_update must be exact or euler");
    require(c.gheat_halfwidth > 5.0 && c.gheat_dx > 0.0 && c.gheat_levels >= 2, "gheat grid invalid");
}

/// Applies `section.key=value` assignments on top of `c`.
inline void apply_overrides(ExperimentConfig& c, const std::map<std::string, std::string>& kv) {
    using namespace config_detail;
    for (const auto& [key, v] : kv) {
        if (key == "model.kind") c.kind = v;
        else if (key == "model.alpha") c.alpha = parse_double(key, v);
        else if (key == "model.beta") c.beta = parse_double(key, v);
        else if (key == "model.gamma") c.gamma = parse_double(key, v);
        else if (key == "model.strike") c.strike = parse_double(key, v);
        else if (key == "model.k") c.k = parse_double(key, v);
        else if (key == "model.theta") c.theta = parse_double(key, v);
        else if (key == "model.k_tilde") c.k_tilde = parse_double(key, v);
        else if (key == "model.theta_tilde") c.theta_tilde = parse_double(key, v);
        else if (key == "model.x0") c.x0 = parse_double(key, v);
        else if (key == "band.sigma_lo") c.sigma_lo = parse_double(key, v);
        else if (key == "band.sigma_hi") c.sigma_hi = parse_double(key, v);
        else if (key == "band.as_variance") c.as_variance = parse_bool(key, v);
        else if (key == "band.sigma_lo_list") c.sigma_lo_list = parse_list(key, v);
        else if (key == "band.sweep_list") c.sweep_list = parse_list(key, v);
        else if (key == "run.horizon") c.horizon = parse_double(key, v);
        else if (key == "run.eps") c.eps = parse_double(key, v);
        else if (key == "run.discount_scale") c.discount_scale = parse_double(key, v);
        else if (key == "run.eps_list") c.eps_list = parse_list(key, v);
        else if (key == "pde.x_lo") c.x_lo = parse_double(key, v);
        else if (key == "pde.x_hi") c.x_hi = parse_double(key, v);
        else if (key == "pde.dx") c.dx = parse_double(key, v);
        else if (key == "pde.dt") c.dt = parse_double(key, v);
        else if (key == "pde.cfl_fraction") c.cfl_fraction = parse_double(key, v);
        else if (key == "pde.boundary") c.boundary = v;
        else if (key == "pde.snapshots") c.snapshots = parse_size(key, v);
        else if (key == "pde.upwind") c.upwind = parse_bool(key, v);
        else if (key == "pde.hbar_center") c.hbar_center = v;
        else if (key == "mc.n_paths") c.n_paths = parse_size(key, v);
        else if (key == "mc.n_steps") c.n_steps = parse_size(key, v);
        else if (key == "mc.refinement") c.refinement = parse_size(key, v);
        else if (key == "mc.seed") c.seed = std::stoull(v);
        else if (key == "mc.dump_paths") c.dump_paths = parse_size(key, v);
        else if (key == "mc.dothan_update") c.dothan_update = v;
        else if (key == "gheat.halfwidth") c.gheat_halfwidth = parse_double(key, v);
        else if (key == "gheat.dx") c.gheat_dx = parse_double(key, v);
        else if (key == "gheat.levels") c.gheat_levels = parse_size(key, v);
        else if (key == "output.dir") c.out_dir = v;
        else throw std::invalid_argument("config: unknown key '" + key + "'");
    }
}

/// INI text → flat key/value map.
inline std::map<std::string, std::string> parse_ini_entries(const std::string& text) {
    boost::property_tree::ptree tree;
    std::istringstream is(text);
    try {
        boost::property_tree::ini_parser::read_ini(is, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    std::map<std::string, std::string> kv;
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw std::invalid_argument("config: key '" + section + "' outside any section");
        for (const auto& [key, node] : body) kv[section + "." + key] = node.data();
    }
    return kv;
}

/// Builds a config from INI text plus overrides; model.kind selects the default parameter set.
inline ExperimentConfig parse_config(const std::string& ini_text, const std::map<std::string, std::string>& overrides = {}) {
    auto kv = parse_ini_entries(ini_text);
    for (const auto& [k, v] : overrides) kv[k] = v;
    const auto it = kv.find("model.kind");
    ExperimentConfig c = ExperimentConfig::defaults(it == kv.end() ? "dothan" : it->second);
    apply_overrides(c, kv);
    validate(c);
    return c;
}

inline std::string to_ini(const ExperimentConfig& c) {
    std::string out, section;
    for (const auto& [key, value] : to_entries(c)) {
        const auto dot = key.find('.');
        const std::string sec = key.substr(0, dot);
        if (sec != section) {
            out += (section.empty() ? "" : "\n") + ("[" + sec + "]\n");
            section = sec;
        }
        out += key.substr(dot + 1) + " = " + value + "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Model assembly
// ---------------------------------------------------------------------------

inline GFunction band_for(const ExperimentConfig& c, double sigma_lo) {
    return c.as_variance ? GFunction(sigma_lo, c.sigma_hi) : GFunction::from_volatilities(sigma_lo, c.sigma_hi);
}

inline ExpVasicekParams expvasicek_params(const ExperimentConfig& c, double theta_tilde) {
    return ExpVasicekParams{c.k, c.theta, c.k_tilde, theta_tilde, c.alpha};
}

/// Base coefficients with the swept parameter (γ or θ̃) set to `sweep`.
inline CoefficientSet base_for(const ExperimentConfig& c, double sweep) {
    return c.kind == "dothan" ? dothan_coeffs(c.alpha, c.beta, sweep) : expvasicek_x_coeffs(expvasicek_params(c, sweep));
}

inline RegularizedCoefficientSet regularized_for(const ExperimentConfig& c, double sweep, double eps) {
    CutoffOptions opts;
    opts.horizon = c.horizon;
    opts.hbar_center = c.hbar_center == "eps" ? HbarCenter::eps : HbarCenter::inv_eps;
    return build_cutoff(base_for(c, sweep), eps, opts);
}

/// (x − K)⁺ for the Dothan call, 1 for the exponential Vasicek bond.
inline std::function<double(double)> terminal_for(const ExperimentConfig& c) {
    if (c.kind == "dothan") return [K = c.strike](double x) { return std::max(x - K, 0.0); };
    return [](double) { return 1.0; };
}

inline Domain domain_for(const ExperimentConfig& c) { return Domain{c.x_lo, c.x_hi}; }

inline PdeGrid grid_for(const ExperimentConfig& c) {
    PdeGrid g;
    g.dx = c.dx;
    g.dt = c.dt;
    g.cfl_fraction = c.cfl_fraction;
    g.horizon = c.horizon;
    g.snapshots = c.snapshots;
    return g;
}

inline SolverOptions options_for(const ExperimentConfig& c, SolveMode mode = SolveMode::sup) {
    SolverOptions o;
    o.mode = mode;
    o.discount = Discount::regularized(c.discount_scale);
    o.boundary = c.boundary == "shrinking" ? Boundary::shrinking() : Boundary::extrapolate();
    o.upwind = c.upwind;
    return o;
}

inline PdeSolution solve_for(const ExperimentConfig& c, double sweep, double sigma_lo, double eps) {
    return solve_backward(regularized_for(c, sweep, eps), band_for(c, sigma_lo), terminal_for(c), domain_for(c),
                          grid_for(c), options_for(c));
}

/// Maximum principle: every recorded level stays within sup|φ| + slack.
inline bool within_terminal_bound(const PdeSolution& s, double slack = 1e-9) {
    for (double m : s.level_max_abs()) {
        if (!(m <= s.m0() + slack)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

struct ValueTable {
    std::string sweep_name;
    std::vector<double> sigma_lo;
    std::vector<double> sweep;
    /// value[row = σ̲][col = sweep]
    std::vector<std::vector<double>> value;
    std::vector<std::vector<double>> seconds;
    std::vector<std::vector<std::size_t>> negative_arguments;
    std::vector<std::vector<bool>> max_principle;
    double m0 = 0.0;

    std::string to_csv() const {
        std::string out = "sigma_lo";
        for (double s : sweep) out += "," + sweep_name + "=" + csv::format_double(s);
        out += "\n";
        for (std::size_t r = 0; r < sigma_lo.size(); ++r) {
            out += csv::format_double(sigma_lo[r]);
            for (double v : value[r]) out += "," + csv::format_double(v);
            out += "\n";
        }
        return out;
    }
};

inline ValueTable run_table(const ExperimentConfig& c) {
    validate(c);
    ValueTable t;
    t.sweep_name = c.sweep_name();
    t.sigma_lo = c.sigma_lo_list;
    t.sweep = c.sweep_list;
    for (double s_lo : c.sigma_lo_list) {
        std::vector<double> row, secs;
        std::vector<std::size_t> neg;
        std::vector<bool> mp;
        for (double sw : c.sweep_list) {
            const auto t0 = std::chrono::steady_clock::now();
            const auto sol = solve_for(c, sw, s_lo, c.eps);
            row.push_back(sol.evaluate(0.0, c.x0));
            secs.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
            neg.push_back(sol.negative_argument_count());
            mp.push_back(within_terminal_bound(sol));
            t.m0 = std::max(t.m0, sol.m0());
        }
        t.value.push_back(std::move(row));
        t.seconds.push_back(std::move(secs));
        t.negative_arguments.push_back(std::move(neg));
        t.max_principle.push_back(std::move(mp));
    }
    return t;
}

/// Dothan call table over γ × σ̲.
inline ValueTable run_table1(const ExperimentConfig& c) {
    if (c.kind != "dothan") throw std::invalid_argument("table1 needs model.kind = dothan");
    return run_table(c);
}

/// Exponential Vasicek bond table over θ̃ × σ̲.
inline ValueTable run_table2(const ExperimentConfig& c) {
    if (c.kind != "expvasicek") throw std::invalid_argument("table2 needs model.kind = expvasicek");
    return run_table(c);
}

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

struct TrajectoryResult {
    std::vector<double> times;
    /// Sample means over uncensored paths of M^ε_t and of u(t∧τ, X_{t∧τ}).
    std::vector<double> mean_m;
    std::vector<double> mean_u;
    std::size_t n_paths = 0;
    std::size_t n_censored = 0;
    std::size_t n_exited = 0;
    double u0 = 0.0;

    double mean_terminal_m() const { return mean_m.back(); }
    double mean_terminal_u() const { return mean_u.back(); }
    double censored_fraction() const { return n_paths ? static_cast<double>(n_censored) / static_cast<double>(n_paths) : 0.0; }

    /// max_t |mean_t − mean_0| / |mean_0| of M^ε.
    double drift_statistic() const {
        double worst = 0.0;
        for (double m : mean_m) worst = std::max(worst, std::abs(m - mean_m.front()));
        return mean_m.front() != 0.0 ? worst / std::abs(mean_m.front()) : worst;
    }

    std::string summary_csv() const {
        std::string out = "t,mean_M,mean_u\n";
        for (std::size_t k = 0; k < times.size(); ++k) {
            out += csv::format_double(times[k]) + "," + csv::format_double(mean_m[k]) + "," + csv::format_double(mean_u[k]) + "\n";
        }
        return out;
    }
};

/// Increment law for a band under the config's G-heat numerics.
inline IncrementLaw increment_law_for(const ExperimentConfig& c, const GFunction& gf) {
    const double s = std::sqrt(gf.sigma_hi_sq());
    GHeatNumerics n;
    n.x_halfwidth = c.gheat_halfwidth * s;
    n.dx = c.gheat_dx * s;
    n.dt = 0.8 * n.dx * n.dx / gf.sigma_hi_sq();
    const auto levels = default_level_grid(gf, c.gheat_levels);
    return solve_gheat_cdf(gf, levels, n);
}

/// States of the configured model along one G-path.
inline std::vector<double> model_states(const ExperimentConfig& c, const GPath& path) {
    if (c.kind == "dothan") {
        if (c.dothan_update == "exact") return dothan_exact_states(c.alpha, c.beta, c.gamma, path, c.x0);
        return euler_gsde(dothan_coeffs(c.alpha, c.beta, c.gamma), path, c.x0);
    }
    return expvasicek_states(expvasicek_params(c, c.theta_tilde), path, std::log(c.x0));
}

/**
 * Simulates `n_paths` paths of the configured model under the band (σ̲ = sigma_lo),
 * evaluates the solution along each and accumulates M^ε. The first `dump_paths`
 * paths go to `dump` as `path_id,t,B,QV,X,u,M` rows when it is non-null.
 */
inline TrajectoryResult run_trajectories(const ExperimentConfig& c, const PdeSolution& sol, const IncrementLaw& law,
                                         std::size_t n_paths, std::ostream* dump = nullptr) {
    const auto times = uniform_times(c.horizon, c.n_steps);
    TrajectoryResult r;
    r.times = times;
    r.n_paths = n_paths;
    r.mean_m.assign(times.size(), 0.0);
    r.mean_u.assign(times.size(), 0.0);
    r.u0 = sol.evaluate(0.0, c.x0);
    if (dump) *dump << trajectory_header << '\n';

    std::vector<double> u(times.size());
    for (std::size_t p = 0; p < n_paths; ++p) {
        UniformStream stream(c.seed, p, c.n_steps * c.refinement);
        const GPath path = simulate_gbm(law, times, c.refinement, stream);
        const auto x = model_states(c, path);
        std::vector<double> m;
        try {
            m = m_eps_process(x, times, sol, c.eps);
        } catch (const OutsideValidRegion&) {
            ++r.n_censored;
            continue;
        }
        const std::size_t exit = first_exit(x, c.eps);
        if (exit < times.size() - 1) ++r.n_exited;
        for (std::size_t k = 0; k < times.size(); ++k) {
            const std::size_t j = std::min(k, exit);
            u[k] = sol.evaluate(times[j], x[j]);
            r.mean_m[k] += m[k];
            r.mean_u[k] += u[k];
        }
        if (dump && p < c.dump_paths) write_trajectory_rows(*dump, p, path, x, u, m);
    }
    const double kept = static_cast<double>(n_paths - r.n_censored);
    if (kept > 0) {
        for (std::size_t k = 0; k < times.size(); ++k) {
            r.mean_m[k] /= kept;
            r.mean_u[k] /= kept;
        }
    }
    return r;
}

inline TrajectoryResult run_trajectories(const ExperimentConfig& c, std::size_t n_paths, std::ostream* dump = nullptr) {
    validate(c);
    const auto gf = band_for(c, c.sigma_lo);
    const auto sol = solve_for(c, c.sweep_value(), c.sigma_lo, c.eps);
    const auto law = increment_law_for(c, gf);
    return run_trajectories(c, sol, law, n_paths, dump);
}

// ---------------------------------------------------------------------------
// ε sweep and discount bound
// ---------------------------------------------------------------------------

struct EpsSweep {
    std::vector<double> eps;
    std::vector<double> value;
    /// |value[i] − value[i−1]|; first entry is 0.
    std::vector<double> diff;

    std::string to_csv() const {
        std::string out = "eps,u0,abs_diff_prev\n";
        for (std::size_t i = 0; i < eps.size(); ++i) {
            out += csv::format_double(eps[i]) + "," + csv::format_double(value[i]) + "," + csv::format_double(diff[i]) + "\n";
        }
        return out;
    }
};

inline EpsSweep run_epsilon_sweep(const ExperimentConfig& c, const std::vector<double>& eps_list) {
    validate(c);
    EpsSweep s;
    for (double e : eps_list) {
        if (!(e > 0.0 && e < 1.0)) throw std::invalid_argument("eps sweep: entries must lie in (0,1)");
        const double v = solve_for(c, c.sweep_value(), c.sigma_lo, e).evaluate(0.0, c.x0);
        s.diff.push_back(s.value.empty() ? 0.0 : std::abs(v - s.value.back()));
        s.eps.push_back(e);
        s.value.push_back(v);
    }
    return s;
}

struct DiscountBoundRow {
    double eps;
    double max_gap;
    double bound;
    bool pass;
};

/**
 * Regularized discount ϑ^ε + ε against the raw discount x on a common domain
 * inside every [ε, ε⁻¹]: max over the t = 0 level of |u^ε − u| ≤ M₀(1 − e^{−εT}).
 */
inline std::vector<DiscountBoundRow> run_discount_bound(const ExperimentConfig& c, const std::vector<double>& eps_list,
                                                        const Domain& domain) {
    validate(c);
    const auto gf = band_for(c, c.sigma_lo);
    const auto terminal = terminal_for(c);
    std::vector<DiscountBoundRow> rows;
    for (double e : eps_list) {
        if (domain.x_lo < e || domain.x_hi > 1.0 / e) {
            throw std::invalid_argument("discount bound: domain must lie inside [eps, 1/eps]");
        }
        auto opts = options_for(c);
        const auto reg = regularized_for(c, c.sweep_value(), e);
        const auto u_eps = solve_backward(reg, gf, terminal, domain, grid_for(c), opts);
        opts.discount = Discount::raw(c.discount_scale);
        const auto u_raw = solve_backward(base_for(c, c.sweep_value()), gf, terminal, domain, grid_for(c), opts);
        const auto& a = u_eps.level(u_eps.time_grid().size() - 1);
        const auto& b = u_raw.level(u_raw.time_grid().size() - 1);
        double gap = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) gap = std::max(gap, std::abs(a[i] - b[i]));
        const double bound = u_eps.m0() * (1.0 - std::exp(-e * c.horizon));
        rows.push_back({e, gap, bound, gap <= bound});
    }
    return rows;
}

/// Drift of the sample mean of M^ε over time; only meaningful when σ̲ = σ̄.
inline double classical_check(const ExperimentConfig& c, std::size_t n_paths = 0) {
    if (c.sigma_lo != c.sigma_hi) throw std::invalid_argument("classical-check needs band.sigma_lo == band.sigma_hi");
    return run_trajectories(c, n_paths ? n_paths : c.n_paths).drift_statistic();
}

}  // namespace gfk

#endif  // GFK_EXPERIMENT_HPP
