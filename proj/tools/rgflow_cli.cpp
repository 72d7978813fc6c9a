#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "rgflow/config.hpp"
#include "rgflow/flow.hpp"
#include "rgflow/funcspace.hpp"
#include "rgflow/marginal.hpp"
#include "rgflow/verify.hpp"
#include "rgflow/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rgflow;

namespace {

constexpr int kExitVerifyFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

struct Options {
    std::string config;
    std::optional<std::string> out;
    std::optional<std::string> label;
    std::optional<std::uint64_t> seed;
    bool allow_negative_mu = false;
    std::string csv;  // norm
};

/// Echoed config values: numbers where the text is one, strings otherwise.
json typed(const std::string& text) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec == std::errc() && ptr == end) return v;
    return text;
}

/// NaN and infinities become null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

RunConfig load(const Options& o) {
    RunConfig rc;
    if (!o.config.empty()) {
        std::ifstream in(o.config);
        if (!in) throw ConfigError("cannot open config file " + o.config);
        rc = parse_config(in);
    }
    if (o.out) rc.out_dir = *o.out;
    if (o.label) rc.label = *o.label;
    if (o.seed) rc.seed = *o.seed;
    rc.flow.allow_negative_mu = o.allow_negative_mu;
    rc.validate();
    return rc;
}

fs::path artifact(const RunConfig& rc, const std::string& suffix) {
    fs::create_directories(rc.out_dir);
    return fs::path(rc.out_dir) / (rc.label + suffix);
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream(path) << j.dump(2) << '\n';
}

json manifest(const RunConfig& rc, const std::string& command) {
    json cfg = json::object();
    for (const auto& [section, body] : resolved_tree(rc)) {
        json sec = json::object();
        for (const auto& [key, value] : body) sec[key] = typed(value.data());
        cfg[section] = sec;
    }
    const auto& f = rc.flow;
    return {{"tool", "rgflow"},
            {"version", kVersion},
            {"command", command},
            {"label", rc.label},
            {"config", cfg},
            {"derived",
             {{"alpha_c", f.alpha_c()},
              {"mu_plus_abs_lambda", f.nonlinearity.mu + std::abs(f.nonlinearity.lambda)},
              {"g0_norm", bq_norm(f.g0.build(f.grid), f.kernel.q)},
              {"A0_pow_alpha_c", std::pow(f.A0, f.alpha_c())},
              {"allow_negative_mu", f.allow_negative_mu}}}};
}

void write_trace(const RunConfig& rc, const FlowTrace& t, json man) {
    const auto csv = artifact(rc, "_trace.csv");
    std::ofstream out(csv);
    write_trace_csv(t, out);
    man["status"] = t.complete ? "complete" : "aborted";
    if (!t.failure.empty()) man["failure"] = t.failure;
    man["R"] = num(t.R);
    man["A_prefactor"] = num(t.A_prefactor);
    man["trace_csv"] = csv.filename().string();
    write_json(artifact(rc, "_manifest.json"), man);
}

int cmd_flow(const Options& o) {
    const RunConfig rc = load(o);
    FlowTrace t;
    try {
        t = run_flow(rc.flow);
    } catch (const FlowAborted& e) {
        write_trace(rc, e.partial(), manifest(rc, "flow"));
        std::cerr << "rgflow flow: " << e.what() << "\n";
        return kExitSolver;
    }
    write_trace(rc, t, manifest(rc, "flow"));
    const auto trend = check_theorem_trend(t);
    std::printf("steps %d  A_final %.12g  g_norm_final %.6g\n", rc.flow.n_steps, t.rows.back().A,
                t.rows.back().g_norm);
    if (rc.flow.nonlinearity.mu > 0.0 && rc.flow.n_steps >= 6)
        std::printf("theorem_error trend (n >= 5): %s\n", trend.pass ? "decreasing" : "NOT decreasing");
    std::printf("wrote %s\n", artifact(rc, "_trace.csv").string().c_str());
    return 0;
}

int cmd_beta(const Options& o) {
    const RunConfig rc = load(o);
    const auto& f = rc.flow;
    const int ac = f.alpha_c();
    const auto R = R_constant(f.kernel, ac, f.grid);
    const double Rv = R.value(), p = f.time.p;
    json table = json::array();
    std::ofstream csv(artifact(rc, "_beta.csv"));
    csv << "n,beta_n_direct,beta_n_closed\n";
    char buf[256];
    for (int n = 0; n <= rc.beta_n_max; ++n) {
        const double direct = beta_n_direct(n, f.kernel, f.time, f.L, ac, f.grid, rc.marginal_m);
        const double closed = beta_n_closed(n, f.time, f.L, ac, Rv);
        table.push_back({{"n", n}, {"direct", direct}, {"closed_form", closed}});
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", n, direct, closed);
        csv << buf;
    }
    json out = {{"R_direct", num(R.direct)},
                {"R_oracle", R.oracle},
                {"beta", beta_limit(Rv, p, f.kernel.d, f.L)},
                {"beta_star_lo", beta_star_lo(Rv, p, ac)},
                {"beta_star_hi", beta_star_hi(Rv, p, ac, f.L)},
                {"beta_n_table", table},
                {"A_prefactor", f.nonlinearity.mu > 0.0 ? json(prefactor_A(Rv, p, f.kernel.d, f.nonlinearity.mu))
                                                        : json(nullptr)}};
    write_json(artifact(rc, "_beta.json"), out);
    auto man = manifest(rc, "beta");
    man["beta_json"] = rc.label + "_beta.json";
    write_json(artifact(rc, "_manifest.json"), man);
    std::cout << out.dump(2) << '\n';
    return 0;
}

int cmd_verify(const Options& o) {
    const RunConfig rc = load(o);
    const auto rep = run_suite(rc.flow, SuiteOptions{rc.seed, rc.verify_flow_steps});
    json checks = json::array();
    std::printf("%-26s %-6s %9s  %s\n", "check", "result", "time[s]", "measured");
    for (const auto& c : rep.checks) {
        json m = json::object();
        std::string line;
        for (const auto& x : c.measured) {
            m[x.name] = num(x.value);
            char buf[96];
            std::snprintf(buf, sizeof buf, "%s%s=%.4g", line.empty() ? "" : " ", x.name.c_str(), x.value);
            line += buf;
        }
        checks.push_back({{"name", c.name},
                          {"anchor", c.anchor},
                          {"measured", m},
                          {"tolerance", c.tolerance},
                          {"pass", c.pass},
                          {"runtime_s", c.runtime_s},
                          {"note", c.note}});
        std::printf("%-26s %-6s %9.2f  %s\n", c.name.c_str(), c.pass ? "PASS" : "FAIL", c.runtime_s, line.c_str());
        if (!c.note.empty()) std::printf("%-26s        %s\n", "", c.note.c_str());
    }
    auto man = manifest(rc, "verify");
    man["all_pass"] = rep.all_pass();
    man["checks"] = checks;
    write_json(artifact(rc, "_verify.json"), man);
    return rep.all_pass() ? 0 : kExitVerifyFailed;
}

int cmd_direct(const Options& o) {
    const RunConfig rc = load(o);
    const auto& f = rc.flow;
    const auto d = direct_integrate(f, rc.T_end(), rc.direct_refine);
    FlowConfig short_flow = f;
    short_flow.n_steps = static_cast<int>(d.at_L.size());
    const auto t = run_flow(short_flow);
    json rows = json::array();
    for (int k = 1; k <= static_cast<int>(d.at_L.size()); ++k) {
        const auto fk = d.rescaled(k, f.L, f.time.p, f.kernel.d, f.grid);
        const auto path = artifact(rc, "_direct_f" + std::to_string(k) + ".csv");
        std::ofstream out(path);
        write_csv(fk, out);
        const double diff = bq_norm(fk - t.f[static_cast<std::size_t>(k)], f.kernel.q);
        rows.push_back({{"k", k}, {"t", std::pow(f.L, k)}, {"norm", bq_norm(fk, f.kernel.q)}, {"diff_vs_flow", diff},
                        {"csv", path.filename().string()}});
        std::printf("t = L^%d  ||f_k|| = %.10g  ||direct - flow|| = %.3e\n", k, bq_norm(fk, f.kernel.q), diff);
    }
    auto man = manifest(rc, "direct");
    man["T_end"] = rc.T_end();
    man["direct_grid"] = {{"n_points", d.grid.n_points}, {"x_max", d.grid.x_max}};
    man["picard_iterations"] = d.iterations;
    man["slices"] = rows;
    write_json(artifact(rc, "_manifest.json"), man);
    return 0;
}

int cmd_norm(const Options& o) {
    int q = 2;
    double tail_tol = GridSpec{}.tail_tol;
    if (!o.config.empty()) {
        const RunConfig rc = load(o);
        q = rc.flow.kernel.q;
        tail_tol = rc.flow.grid.tail_tol;
    }
    std::ifstream in(o.csv);
    if (!in) throw ConfigError("cannot open " + o.csv);
    const auto f = read_csv(in, tail_tol);
    const auto r = bq_norm_checked(f, q);
    json out = {{"file", o.csv},
                {"q", q},
                {"norm", r.value},
                {"under_resolved", r.under_resolved},
                {"tail", tail_magnitude(f)},
                {"resolved", is_resolved(f)}};
    std::cout << out.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Renormalization-group engine for marginally perturbed scaling equations"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    Options o;
    auto common = [&](CLI::App* sub, bool need_config) {
        auto* c = sub->add_option("--config", o.config, "INI configuration file");
        if (need_config) c->required();
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--label", o.label, "run label used in artifact names");
        sub->add_flag("--allow-negative-mu", o.allow_negative_mu, "accept mu < 0 (finite-time blow-up possible)");
        sub->add_option("--seed", o.seed, "seed for the sampled contraction inputs");
    };
    auto* flow = app.add_subcommand("flow", "run the RG flow and write the trace");
    auto* beta = app.add_subcommand("beta", "marginal constants R, beta, brackets and the beta_n table");
    auto* verify = app.add_subcommand("verify", "run the verification suite");
    auto* direct = app.add_subcommand("direct", "direct integration oracle up to T_end");
    auto* norm = app.add_subcommand("norm", "B_q norm of a function dumped as CSV");
    for (auto* s : {flow, beta, verify, direct}) common(s, true);
    common(norm, false);
    norm->add_option("csv", o.csv, "CSV with columns omega,re_fhat,im_fhat")->required();

    CLI11_PARSE(app, argc, argv);
    try {
        if (*flow) return cmd_flow(o);
        if (*beta) return cmd_beta(o);
        if (*verify) return cmd_verify(o);
        if (*direct) return cmd_direct(o);
        if (*norm) return cmd_norm(o);
    } catch (const ConfigError& e) {
        std::cerr << "rgflow: configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const SolverError& e) {
        std::cerr << "rgflow: solver failure: " << e.what() << "\n";
        return kExitSolver;
    } catch (const FlowAborted& e) {
        std::cerr << "rgflow: " << e.what() << "\n";
        return kExitSolver;
    } catch (const Error& e) {
        std::cerr << "rgflow: " << e.what() << "\n";
        return kExitSolver;
    }
    return 0;
}
