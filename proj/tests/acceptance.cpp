/// Acceptance run: one PASS/FAIL line per criterion.
///
///   rgflow_acceptance [--expect-fail 9[,..]]
///
/// Exit status is 0 iff the failing criteria are exactly the expected set, so
/// a known failure stays visible in the output without masking regressions.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rgflow/config.hpp"
#include "rgflow/verify.hpp"

using namespace rgflow;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const CheckResult& c) {
    std::ostringstream os;
    os.precision(4);
    for (const auto& m : c.measured) os << (os.tellp() > 0 ? " " : "") << m.name << '=' << m.value;
    if (!c.note.empty()) os << " [" << c.note << ']';
    return os.str();
}

Outcome from(const CheckResult& c) { return {c.pass, fmt(c)}; }

Outcome all(std::initializer_list<CheckResult> cs) {
    Outcome o{true, {}};
    for (const auto& c : cs) {
        o.pass = o.pass && c.pass;
        o.detail += (o.detail.empty() ? "" : " | ") + c.name + ": " + fmt(c);
    }
    return o;
}

FlowConfig canonical() {
    std::ifstream in(std::string(RGFLOW_SOURCE_DIR) + "/configs/canonical.ini");
    auto rc = parse_config(in);
    rc.validate();
    return rc.flow;
}

std::set<int> parse_expected(int argc, char** argv) {
    std::set<int> out;
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--expect-fail") {
            std::stringstream ss(argv[i + 1]);
            std::string item;
            while (std::getline(ss, item, ',')) out.insert(std::stoi(item));
        }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    const auto expected = parse_expected(argc, argv);
    const FlowConfig cfg = canonical();
    const GridSpec grid = cfg.grid;
    const ScalingKernel heat = cfg.kernel;
    ScalingKernel quartic = heat;
    quartic.d = 4.0;
    const TimeChange tc0 = cfg.time;
    TimeChange tc_pow = tc0;
    tc_pow.remainder = RemainderModel::power(0.5, 1.0);
    const int ac = cfg.alpha_c();

    // Flow runs shared by 7-11: 12 canonical steps, then the 20-step extension.
    FlowTrace t12, t20;
    std::string flow_error;
    double t12_s = 0.0, t20_s = 0.0;
    try {
        auto t0 = std::chrono::steady_clock::now();
        t12 = run_flow(cfg);
        t12_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        FlowConfig c20 = cfg;
        c20.n_steps = 20;
        t0 = std::chrono::steady_clock::now();
        t20 = run_flow(c20);
        t20_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    } catch (const Error& e) {
        flow_error = e.what();
    }
    const double mu = cfg.nonlinearity.mu;

    struct Criterion {
        int id;
        const char* title;
        double budget_s;
        std::function<Outcome()> run;
        double extra_s = 0.0;  ///< shared flow time charged to this criterion
    };
    auto need_flow = [&](auto&& fn) {
        return [&, fn]() -> Outcome {
            if (!flow_error.empty()) return {false, "flow aborted: " + flow_error};
            return fn();
        };
    };

    const std::vector<Criterion> criteria = {
        {1, "kernel identities (d = 1, 1.5, 2, 4; 1024 points; <= 1e-13)", 1.0,
         [] { return from(check_kernel_identities({1.0, 1.5, 2.0, 4.0}, 1024, 1e-13)); }},
        {2, "linear fixed point, heat and d = 4 (<= 1e-8, 4096 points, x_max 40)", 5.0,
         [&] {
             return all({check_fixed_point(heat, 1.0, cfg.L, grid, "_heat"),
                         check_fixed_point(quartic, 1.0, cfg.L, grid, "_d4")});
         }},
        {3, "contraction on g^(0) = 0 (L = 2, 4, 8; ratios < 1; variation <= 25%)", 10.0,
         [&] { return from(check_contraction(heat, tc0, grid, 1, {2.0, 4.0, 8.0})); }},
        {4, "R by two routes (<= 1e-5), heat R = sqrt(pi/2) (<= 1e-6)", 10.0,
         [&] { return all({check_R(heat, ac, grid), check_R(quartic, 3, grid)}); }},
        {5, "beta_n = beta for r = 0 (n <= 20, <= 5e-6), heat value, bracket", 30.0,
         [&] {
             const auto base = check_beta_identities(heat, tc0, cfg.L, ac, grid, 20, 256);
             const double R = R_constant(heat, ac, grid).value();
             const double beta = beta_limit(R, tc0.p, heat.d, cfg.L);
             const double lo = beta_star_lo(R, tc0.p, ac), hi = beta_star_hi(R, tc0.p, ac, cfg.L);
             double worst = 0.0;
             bool bracket = true;
             for (int n = 0; n <= 20; ++n) {
                 const double b = beta_n_direct(n, heat, tc0, cfg.L, ac, grid, 256);
                 worst = std::max(worst, std::abs(b - beta));
                 bracket = bracket && lo < b && b < hi;
             }
             const double oracle = std::log(2.0) / (2.0 * std::sqrt(M_PI));
             char buf[160];
             std::snprintf(buf, sizeof buf, "direct max|beta_n - beta| over n = 0..20 = %.3g, |beta - ln2/(2 sqrt pi)| = %.3g",
                           worst, std::abs(beta - oracle));
             return Outcome{base.pass && worst <= 5e-6 && bracket && std::abs(beta - oracle) <= 1e-9,
                            fmt(base) + "; " + buf};
         }},
        {6, "beta_n convergence, r = power(0.5, 1): strict decrease on [2,20], slope <= -(p+1)/d + 0.3", 60.0,
         [&] { return from(check_beta_convergence(heat, tc_pow, cfg.L, ac, grid)); }},
        {7, "flow monotonicity, canonical 12 steps", 300.0,
         need_flow([&] { return from(check_flow_monotonicity(t12)); }), t12_s},
        {8, "increment law, 20 steps (decreasing past transient, <= 20% at n = 20)", 600.0,
         need_flow([&] { return from(check_increment_law(t20, mu, ac, beta_limit(t20.R, cfg.time.p, heat.d, cfg.L))); }),
         t20_s},
        {9, "renormalization lemma residual (bound at every step, ratio decreasing)", 300.0,
         need_flow([&] { return from(check_lemma_residual(t12, mu, ac)); })},
        {10, "theorem error trend on n in [5, 20]", 600.0,
         need_flow([&] { return from(check_theorem_trend(t20, 5)); })},
        {11, "RG flow vs direct integration at t = L^3 (<= 1e-4)", 300.0,
         need_flow([&] { return from(check_direct_vs_flow(cfg, t12, 3, 1e-4)); })},
    };

    std::set<int> failed;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        auto o = c.run();
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() + c.extra_s;
        if (s > c.budget_s) {
            o.pass = false;
            o.detail += " [runtime budget exceeded]";
        }
        if (!o.pass) failed.insert(c.id);
        std::printf("%s criterion %d: %s (%.2f s / %.0f s) -- %s\n", o.pass ? "PASS" : "FAIL", c.id, c.title, s,
                    c.budget_s, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria pass\n", criteria.size() - failed.size(), criteria.size());
    if (!expected.empty()) {
        std::printf("expected failures:");
        for (int id : expected) std::printf(" %d", id);
        std::printf(" -> %s\n", failed == expected ? "matched" : "MISMATCH");
    }
    return failed == expected ? 0 : 1;
}
