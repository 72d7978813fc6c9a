#pragma once

#include <charconv>
#include <type_traits>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rgflow/error.hpp"
#include "rgflow/flow.hpp"

namespace rgflow {

/// Everything a command needs: the flow configuration plus the settings of the
/// marginal, verification, direct-integration and output stages.
struct RunConfig {
    FlowConfig flow;
    int marginal_m = 256;     ///< tau intervals for the direct beta_n route
    int beta_n_max = 20;      ///< rows of the beta_n table
    int verify_flow_steps = 20;
    std::uint64_t seed = 1;   ///< contraction samples
    double direct_T_end = 0;  ///< 0 selects L^3
    int direct_refine = 2;
    std::string out_dir = "out";
    std::string label = "run";

    double T_end() const { return direct_T_end > 0.0 ? direct_T_end : std::pow(flow.L, 3); }

    void validate() const {
        flow.validate();
        if (marginal_m < 8) throw ConfigError("marginal: m must be >= 8");
        if (beta_n_max < 0) throw ConfigError("marginal: n_max must be >= 0");
        if (verify_flow_steps < 1) throw ConfigError("verify: flow_steps must be >= 1");
        if (direct_refine < 1) throw ConfigError("direct: refine must be >= 1");
        if (direct_T_end < 0.0) throw ConfigError("direct: T_end must be positive (or 0 for L^3)");
        if (label.empty()) throw ConfigError("output: label must not be empty");
    }
};

namespace detail {

using boost::property_tree::ptree;

/// Parses "3:1, 5:-0.5" into (j, a_j) pairs.
inline std::vector<std::pair<int, double>> parse_terms(const std::string& text) {
    std::vector<std::pair<int, double>> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto first = item.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw ConfigError("nonlinearity.terms: expected j:a_j, got '" + item + "'");
        try {
            const int j = std::stoi(item.substr(0, colon));
            const double a = std::stod(item.substr(colon + 1));
            out.emplace_back(j, a);
        } catch (const std::logic_error&) {
            throw ConfigError("nonlinearity.terms: cannot parse '" + item + "'");
        }
    }
    return out;
}

inline std::string format_terms(const std::vector<std::pair<int, double>>& terms) {
    std::string out;
    char buf[32];
    for (std::size_t i = 0; i < terms.size(); ++i) {
        out += (i ? ", " : "") + std::to_string(terms[i].first) + ':';
        out.append(buf, std::to_chars(buf, buf + sizeof buf, terms[i].second).ptr);
    }
    return out;
}

inline const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s = {
        {"kernel", {"d", "kappa", "q"}},
        {"time", {"p", "remainder", "delta", "coeff"}},
        {"grid", {"n_points", "x_max", "tail_tol"}},
        {"solver", {"m", "picard_tol", "picard_max", "norm_guard"}},
        {"nonlinearity", {"mu", "lambda", "terms"}},
        {"flow", {"L", "n_steps", "A0", "g0", "eps"}},
        {"marginal", {"m", "n_max"}},
        {"verify", {"flow_steps", "seed"}},
        {"direct", {"T_end", "refine"}},
        {"output", {"dir", "label"}},
    };
    return s;
}

template <class T>
T get(const ptree& pt, const std::string& path, T fallback) {
    const auto node = pt.get_optional<std::string>(ptree::path_type(path, '/'));
    if (!node) return fallback;
    if constexpr (std::is_same_v<T, std::string>) {
        return *node;
    } else {
        std::istringstream is(*node);
        T v{};
        is >> v;
        std::string rest;
        if (is.fail() || (is >> rest)) throw ConfigError("config: cannot parse " + path + " = '" + *node + "'");
        return v;
    }
}

}  // namespace detail

/// Reads the INI format; unknown sections or keys are rejected so typos cannot
/// silently fall back to defaults.
inline RunConfig parse_config(std::istream& is) {
    using detail::get;
    detail::ptree pt;
    try {
        boost::property_tree::ini_parser::read_ini(is, pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    for (const auto& [section, body] : pt) {
        const auto it = detail::schema().find(section);
        if (it == detail::schema().end()) throw ConfigError("config: unknown section [" + section + "]");
        if (!body.data().empty()) throw ConfigError("config: key '" + section + "' outside any section");
        for (const auto& [key, value] : body)
            if (!it->second.count(key)) throw ConfigError("config: unknown key " + section + "." + key);
    }

    RunConfig rc;
    FlowConfig& f = rc.flow;
    f.kernel.d = get(pt, "kernel/d", f.kernel.d);
    f.kernel.kappa = get(pt, "kernel/kappa", f.kernel.kappa);
    f.kernel.q = get(pt, "kernel/q", f.kernel.q);

    f.time.p = get(pt, "time/p", f.time.p);
    const auto remainder = get<std::string>(pt, "time/remainder", "zero");
    if (remainder == "zero") {
        f.time.remainder = RemainderModel::zero();
    } else if (remainder == "power") {
        f.time.remainder = RemainderModel::power(get(pt, "time/delta", 0.5), get(pt, "time/coeff", 1.0));
    } else {
        throw ConfigError("time.remainder must be zero or power, got '" + remainder + "'");
    }

    f.grid.n_points = get(pt, "grid/n_points", f.grid.n_points);
    f.grid.x_max = get(pt, "grid/x_max", f.grid.x_max);
    f.grid.tail_tol = get(pt, "grid/tail_tol", f.grid.tail_tol);

    f.solver.m = get(pt, "solver/m", f.solver.m);
    f.solver.picard_tol = get(pt, "solver/picard_tol", f.solver.picard_tol);
    f.solver.picard_max = get(pt, "solver/picard_max", f.solver.picard_max);
    f.solver.norm_guard = get(pt, "solver/norm_guard", f.solver.norm_guard);

    f.nonlinearity.mu = get(pt, "nonlinearity/mu", f.nonlinearity.mu);
    f.nonlinearity.lambda = get(pt, "nonlinearity/lambda", f.nonlinearity.lambda);
    if (pt.get_optional<std::string>(detail::ptree::path_type("nonlinearity/terms", '/')))
        f.nonlinearity.terms = detail::parse_terms(get<std::string>(pt, "nonlinearity/terms", ""));
    f.nonlinearity.alpha_c = Nonlinearity::critical_exponent(f.time.p, f.kernel.d);

    f.L = get(pt, "flow/L", f.L);
    f.n_steps = get(pt, "flow/n_steps", f.n_steps);
    f.A0 = get(pt, "flow/A0", f.A0);
    const auto g0 = get<std::string>(pt, "flow/g0", InitialRemainder::name(f.g0.kind));
    if (g0 == "zero") f.g0.kind = InitialRemainder::Kind::zero;
    else if (g0 == "odd-bump") f.g0.kind = InitialRemainder::Kind::odd_bump;
    else if (g0 == "even-bump") f.g0.kind = InitialRemainder::Kind::even_bump;
    else throw ConfigError("flow.g0 must be zero, odd-bump or even-bump, got '" + g0 + "'");
    f.g0.eps = get(pt, "flow/eps", f.g0.eps);

    rc.marginal_m = get(pt, "marginal/m", rc.marginal_m);
    rc.beta_n_max = get(pt, "marginal/n_max", rc.beta_n_max);
    rc.verify_flow_steps = get(pt, "verify/flow_steps", rc.verify_flow_steps);
    rc.seed = get(pt, "verify/seed", rc.seed);
    rc.direct_T_end = get(pt, "direct/T_end", rc.direct_T_end);
    rc.direct_refine = get(pt, "direct/refine", rc.direct_refine);
    rc.out_dir = get<std::string>(pt, "output/dir", rc.out_dir);
    rc.label = get<std::string>(pt, "output/label", rc.label);
    return rc;
}

inline RunConfig parse_config(const std::string& text) {
    std::istringstream is(text);
    return parse_config(is);
}

/// Every resolved parameter, defaults included, as section/key strings.
inline boost::property_tree::ptree resolved_tree(const RunConfig& rc) {
    detail::ptree pt;
    /// Doubles use the shortest round-trip form.
    auto put = [&](const std::string& path, const auto& v) {
        std::string text;
        if constexpr (std::is_floating_point_v<std::decay_t<decltype(v)>>) {
            char buf[32];
            text.assign(buf, std::to_chars(buf, buf + sizeof buf, v).ptr);
        } else {
            std::ostringstream os;
            os << v;
            text = os.str();
        }
        pt.put(detail::ptree::path_type(path, '/'), text);
    };
    const FlowConfig& f = rc.flow;
    put("kernel/d", f.kernel.d);
    put("kernel/kappa", f.kernel.kappa);
    put("kernel/q", f.kernel.q);
    put("time/p", f.time.p);
    put("time/remainder", f.time.remainder.is_zero() ? "zero" : "power");
    put("time/delta", f.time.remainder.delta);
    put("time/coeff", f.time.remainder.coeff);
    put("grid/n_points", f.grid.n_points);
    put("grid/x_max", f.grid.x_max);
    put("grid/tail_tol", f.grid.tail_tol);
    put("solver/m", f.solver.m);
    put("solver/picard_tol", f.solver.picard_tol);
    put("solver/picard_max", f.solver.picard_max);
    put("solver/norm_guard", f.solver.norm_guard);
    put("nonlinearity/mu", f.nonlinearity.mu);
    put("nonlinearity/lambda", f.nonlinearity.lambda);
    put("nonlinearity/terms", detail::format_terms(f.nonlinearity.terms));
    put("flow/L", f.L);
    put("flow/n_steps", f.n_steps);
    put("flow/A0", f.A0);
    put("flow/g0", InitialRemainder::name(f.g0.kind));
    put("flow/eps", f.g0.eps);
    put("marginal/m", rc.marginal_m);
    put("marginal/n_max", rc.beta_n_max);
    put("verify/flow_steps", rc.verify_flow_steps);
    put("verify/seed", rc.seed);
    put("direct/T_end", rc.T_end());
    put("direct/refine", rc.direct_refine);
    put("output/dir", rc.out_dir);
    put("output/label", rc.label);
    return pt;
}

inline std::string write_config(const RunConfig& rc) {
    std::ostringstream os;
    boost::property_tree::ini_parser::write_ini(os, resolved_tree(rc));
    return os.str();
}

}  // namespace rgflow
