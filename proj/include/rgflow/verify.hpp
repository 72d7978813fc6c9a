#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "rgflow/blocksolver.hpp"
#include "rgflow/error.hpp"
#include "rgflow/flow.hpp"
#include "rgflow/funcspace.hpp"
#include "rgflow/kernel.hpp"
#include "rgflow/linear.hpp"
#include "rgflow/marginal.hpp"
#include "rgflow/timechange.hpp"

namespace rgflow {

struct Measurement {
    std::string name;
    double value = 0.0;
};

struct CheckResult {
    std::string name;
    std::string anchor;  ///< the statement the check instantiates
    std::vector<Measurement> measured;
    std::string tolerance;
    bool pass = false;
    double runtime_s = 0.0;
    std::string note;

    void add(std::string key, double v) { measured.push_back({std::move(key), v}); }
};

struct VerificationReport {
    std::vector<CheckResult> checks;
    bool all_pass() const {
        return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
    }
};

namespace detail {

template <class Fn>
CheckResult timed(std::string name, std::string anchor, Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    CheckResult r;
    r.name = std::move(name);
    r.anchor = std::move(anchor);
    try {
        fn(r);
    } catch (const Error& e) {
        r.pass = false;
        r.note = std::string("error: ") + e.what();
    }
    r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

inline bool strictly_decreasing(const std::vector<double>& v, std::size_t from = 0) {
    for (std::size_t i = std::max<std::size_t>(from, 1); i < v.size(); ++i)
        if (!(v[i] < v[i - 1])) return false;
    return true;
}

}  // namespace detail

// ---------------------------------------------------------------- kernel

/// Semigroup and self-similarity residuals for each exponent on an n-point grid.
inline CheckResult check_kernel_identities(const std::vector<double>& exponents = {1.0, 1.5, 2.0, 4.0},
                                           std::size_t n_points = 1024, double tol = 1e-13) {
    return detail::timed("kernel_identities", "kernel semigroup and self-similarity", [&](CheckResult& r) {
        GridSpec g;
        g.n_points = n_points;
        const auto w = g.omegas();
        double worst = 0.0;
        for (double d : exponents) {
            const ScalingKernel k{d, 1.0, 2};
            double res = 0.0;
            for (auto [t, s] : {std::pair{2.0, 0.5}, std::pair{3.0, 1.7}, std::pair{0.9, 0.2}})
                res = std::max(res, semigroup_residual(k, t, s, w));
            for (double t : {0.5, 2.0, 7.3}) res = std::max(res, self_similarity_residual(k, t, w));
            r.add("d=" + std::to_string(d).substr(0, 4), res);
            worst = std::max(worst, res);
        }
        r.tolerance = "<= " + std::to_string(tol);
        r.pass = worst <= tol;
    });
}

// ---------------------------------------------------------------- fixed point

struct FixedPointRow {
    GridSpec grid;
    double residual = 0.0;
    bool resolved = false;
};

struct FixedPointReport {
    std::vector<FixedPointRow> rows;
    double tol = 1e-8;
    double floor = 1e-11;  ///< round-off floor below which refinement cannot improve
    bool pass() const {
        if (rows.empty()) return false;
        for (const auto& row : rows)
            if (!row.resolved) return false;
        if (!(rows.front().residual <= tol)) return false;
        for (std::size_t i = 1; i < rows.size(); ++i)
            if (rows[i].residual > std::max(rows[i - 1].residual, floor)) return false;
        return true;
    }
};

/// ||R0_L f_p* - f_p*|| per grid (r = 0); grids ordered coarse to fine, the first
/// one is the grid under test.
inline FixedPointReport fixed_point_check(const ScalingKernel& kernel, double p, double L,
                                          const std::vector<GridSpec>& grids) {
    const TimeChange tc{p, RemainderModel::zero()};
    FixedPointReport rep;
    for (const auto& g : grids) {
        FixedPointRow row;
        row.grid = g;
        const auto f = f_p_star(kernel, p, g);
        row.resolved = is_resolved(f);
        try {
            row.residual = bq_norm(linear_rg_step(f, kernel, tc, 0, L) - f, kernel.q);
        } catch (const TailTooLarge&) {
            row.resolved = false;
            row.residual = std::numeric_limits<double>::infinity();
        }
        rep.rows.push_back(row);
    }
    return rep;
}

inline CheckResult check_fixed_point(const ScalingKernel& kernel, double p, double L, const GridSpec& grid,
                                     const std::string& label = "") {
    return detail::timed("fixed_point" + label, "linear fixed point of R0 with r = 0", [&](CheckResult& r) {
        GridSpec fine = grid;
        fine.n_points *= 2;
        const auto rep = fixed_point_check(kernel, p, L, {grid, fine});
        r.add("residual", rep.rows[0].residual);
        r.add("residual_refined", rep.rows[1].residual);
        r.add("resolved", rep.rows[0].resolved ? 1.0 : 0.0);
        r.tolerance = "<= 1e-8, non-increasing under refinement";
        r.pass = rep.pass();
    });
}

struct RemainderFixedPointRow {
    int n = 0;
    double residual = 0.0;
    double envelope = 0.0;  ///< |r(L^n)/L^{n(p+1)}|^{1/d}
};

/// ||h_n - f_p*|| against the envelope |r(L^n)/L^{n(p+1)}|^{1/d}; the constant is fitted at the first n.
inline std::vector<RemainderFixedPointRow> remainder_fixed_point(const ScalingKernel& kernel, const TimeChange& tc,
                                                                 double L, const GridSpec& grid, int n_lo, int n_hi,
                                                                 double* fitted_constant = nullptr,
                                                                 bool* bounded = nullptr) {
    std::vector<RemainderFixedPointRow> rows;
    const auto fs = f_p_star(kernel, tc.p, grid);
    for (int n = n_lo; n <= n_hi; ++n) {
        RemainderFixedPointRow row;
        row.n = n;
        row.residual = bq_norm(h_n(kernel, tc, n, L, grid) - fs, kernel.q);
        row.envelope = std::pow(std::abs(tc.scaled_r(n, L)), 1.0 / kernel.d);
        rows.push_back(row);
    }
    const double c = rows.front().residual / rows.front().envelope;
    if (fitted_constant) *fitted_constant = c;
    if (bounded) {
        *bounded = true;
        for (const auto& row : rows)
            if (row.residual > c * row.envelope * (1 + 1e-9)) *bounded = false;
    }
    return rows;
}

// ---------------------------------------------------------------- contraction

/// g^(w) = w e^{-w^2} first, then seeded random mixtures of the unit-width odd and
/// even bumps w^k e^{-w^2}, k = 1, 2, 3.
inline std::vector<SpectralFunction> contraction_samples(const GridSpec& grid, std::uint64_t seed, int extra = 4) {
    std::vector<SpectralFunction> out;
    out.push_back(SpectralFunction::from_fourier(grid, [](double w) { return w * std::exp(-w * w); }));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> coef(0.0, 1.0);
    for (int k = 0; k < extra; ++k) {
        const double c1 = coef(rng), c2 = coef(rng), c3 = coef(rng);
        out.push_back(SpectralFunction::from_fourier(grid, [&](double w) {
            return cplx(c2 * w * w, c1 * w + c3 * w * w * w) * std::exp(-w * w);
        }));
    }
    return out;
}

struct ContractionRow {
    double L = 0.0;
    double ratio = 0.0;   ///< max over samples and n of ||R0 g|| / ||g||
    double scaled = 0.0;  ///< ratio L^{(p+1)/d}
};

struct ContractionReport {
    std::vector<ContractionRow> rows;
    double variation = 0.0;  ///< max(scaled)/min(scaled) - 1
    bool all_below_one = false;
    bool decreasing_in_L = false;
    bool pass() const { return all_below_one && variation < 0.25; }
};

inline ContractionReport contraction_check(const ScalingKernel& kernel, const TimeChange& tc,
                                           const std::vector<double>& L_list,
                                           const std::vector<SpectralFunction>& samples,
                                           const std::vector<int>& n_list = {0, 1, 4}) {
    for (const auto& g : samples) {
        const double norm = bq_norm(g, kernel.q);
        if (!(norm > 0.0) || std::abs(eval_at_zero(g)) > 1e-14 * norm)
            throw DomainError("contraction_check: samples must satisfy g^(0) = 0 (f_p* is not in the contracting sector)");
    }
    ContractionReport rep;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double L : L_list) {
        ContractionRow row;
        row.L = L;
        for (const auto& g : samples)
            for (int n : n_list)
                row.ratio = std::max(row.ratio, bq_norm(linear_rg_step(g, kernel, tc, n, L), kernel.q) / bq_norm(g, kernel.q));
        row.scaled = row.ratio * std::pow(L, (tc.p + 1.0) / kernel.d);
        lo = std::min(lo, row.scaled);
        hi = std::max(hi, row.scaled);
        rep.rows.push_back(row);
    }
    rep.variation = hi / lo - 1.0;
    rep.all_below_one = std::all_of(rep.rows.begin(), rep.rows.end(), [](const auto& r) { return r.ratio < 1.0; });
    rep.decreasing_in_L = true;
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
        if (!(rep.rows[i].ratio < rep.rows[i - 1].ratio)) rep.decreasing_in_L = false;
    return rep;
}

inline CheckResult check_contraction(const ScalingKernel& kernel, const TimeChange& tc, const GridSpec& grid,
                                     std::uint64_t seed, const std::vector<double>& L_list = {2.0, 4.0, 8.0}) {
    return detail::timed("contraction", "contraction of R0 on the g^(0) = 0 sector", [&](CheckResult& r) {
        const auto rep = contraction_check(kernel, tc, L_list, contraction_samples(grid, seed));
        for (const auto& row : rep.rows) {
            r.add("ratio_L" + std::to_string(static_cast<int>(row.L)), row.ratio);
            r.add("ratio_times_scale_L" + std::to_string(static_cast<int>(row.L)), row.scaled);
        }
        r.add("variation", rep.variation);
        r.tolerance = "all ratios < 1, variation < 0.25";
        r.pass = rep.pass();
    });
}

// ---------------------------------------------------------------- constants

inline CheckResult check_R(const ScalingKernel& kernel, int alpha_c, const GridSpec& grid) {
    return detail::timed("R_dual_route", "kernel constant R by two routes", [&](CheckResult& r) {
        const auto R = R_constant(kernel, alpha_c, grid);
        r.add("R_direct", R.direct);
        r.add("R_oracle", R.oracle);
        r.add("discrepancy", R.discrepancy());
        r.tolerance = "|direct - oracle| <= 1e-5";
        r.pass = R.discrepancy() <= 1e-5;
        if (kernel.d == 2.0 && kernel.kappa == 1.0 && alpha_c == 2) {
            const double err = std::abs(R.value() - std::sqrt(std::numbers::pi / 2));
            r.add("heat_closed_form_error", err);
            r.tolerance += "; heat: |R - sqrt(pi/2)| <= 1e-6";
            r.pass = r.pass && err <= 1e-6;
        }
    });
}

/// beta_n = beta for r = 0 (both routes), and the bracket beta_* < beta_n < beta^*.
inline CheckResult check_beta_identities(const ScalingKernel& kernel, const TimeChange& tc, double L, int alpha_c,
                                         const GridSpec& grid, int n_max = 20, int m = 256) {
    return detail::timed("beta_identities", "beta_n limit, rigidity and bracket", [&](CheckResult& r) {
        const double R = R_constant(kernel, alpha_c, grid).value();
        const double beta = beta_limit(R, tc.p, kernel.d, L);
        const double lo = beta_star_lo(R, tc.p, alpha_c), hi = beta_star_hi(R, tc.p, alpha_c, L);
        double gap_closed = 0.0, route_gap = 0.0;
        bool bracket = true;
        for (int n = 0; n <= n_max; ++n) {
            const double bc = beta_n_closed(n, tc, L, alpha_c, R);
            if (tc.remainder.is_zero()) gap_closed = std::max(gap_closed, std::abs(bc - beta));
            bracket = bracket && lo < bc && bc < hi;
        }
        // the direct route costs a block of pointwise powers; sample a few n
        for (int n : {0, n_max / 2, n_max}) {
            const double bd = beta_n_direct(n, kernel, tc, L, alpha_c, grid, m);
            route_gap = std::max(route_gap, std::abs(bd - beta_n_closed(n, tc, L, alpha_c, R)));
            bracket = bracket && lo < bd && bd < hi;
        }
        r.add("beta", beta);
        r.add("beta_star_lo", lo);
        r.add("beta_star_hi", hi);
        r.add("max_route_gap", route_gap);
        r.tolerance = "routes agree within 5e-6; beta_* < beta_n < beta^*";
        r.pass = route_gap <= 5e-6 && bracket;
        if (tc.remainder.is_zero()) {
            r.add("max_gap_to_beta", gap_closed + route_gap);
            r.tolerance += "; r = 0: |beta_n - beta| <= 5e-6";
            r.pass = r.pass && gap_closed + route_gap <= 5e-6;
        }
    });
}

inline CheckResult check_beta_convergence(const ScalingKernel& kernel, const TimeChange& tc, double L, int alpha_c,
                                          const GridSpec& grid) {
    return detail::timed("beta_convergence", "rate of beta_n -> beta", [&](CheckResult& r) {
        const double R = R_constant(kernel, alpha_c, grid).value();
        const auto conv = beta_convergence(kernel, tc, L, alpha_c, R, 2, 20, 8);
        r.add("gap_n2", conv.rows.front().gap);
        r.add("gap_n20", conv.rows.back().gap);
        r.add("strictly_decreasing", conv.strictly_decreasing ? 1.0 : 0.0);
        r.add("slope_8_20", conv.slope);
        r.add("slope_bound", conv.slope_bound);
        r.tolerance = "gap strictly decreasing on [2,20]; log-log slope on [8,20] <= -(p+1)/d + 0.3";
        r.pass = conv.pass();
    });
}

// ---------------------------------------------------------------- flow

/// Amplitude/remainder invariants on a completed trace.
inline CheckResult check_flow_monotonicity(const FlowTrace& t) {
    return detail::timed("flow_monotonicity", "amplitude decrease and remainder bound along the flow",
                         [&](CheckResult& r) {
        bool pos = true, dec = true, gbound = true;
        double worst_g0 = 0.0, worst_dec = 0.0, worst_gratio = 0.0;
        for (std::size_t n = 0; n < t.rows.size(); ++n) {
            const auto& row = t.rows[n];
            pos = pos && row.A > 0.0;
            if (n + 1 < t.rows.size()) dec = dec && t.rows[n + 1].A < row.A;
            gbound = gbound && row.g_norm < row.A * row.A;
            worst_gratio = std::max(worst_gratio, row.g_norm / (row.A * row.A));
            worst_g0 = std::max(worst_g0, row.g_hat0);
            worst_dec = std::max(worst_dec, row.decomposition);
        }
        r.add("steps", static_cast<double>(t.rows.size() - 1));
        r.add("A_final", t.rows.back().A);
        r.add("max_g_over_A2", worst_gratio);
        r.add("max_g_hat0", worst_g0);
        r.add("max_decomposition", worst_dec);
        r.tolerance = "A_n > 0 decreasing; ||g_n|| < A_n^2; |g^_n(0)| <= 1e-10; decomposition < 1e-9";
        r.pass = t.complete && pos && dec && gbound && worst_g0 <= 1e-10 && worst_dec < 1e-9;
    });
}

struct IncrementLaw {
    std::vector<double> deviation;  ///< |D_{n+1} - D_n - mu (alpha_c - 1) beta|, n = 0..N-1
    double target = 0.0;
    double final_relative = 0.0;
    bool decreasing = false;
};

inline IncrementLaw increment_law(const FlowTrace& t, double mu, int alpha_c, double beta, std::size_t transient) {
    IncrementLaw law;
    law.target = mu * (alpha_c - 1) * beta;
    for (std::size_t n = 0; n + 1 < t.rows.size(); ++n) {
        const double D0 = std::pow(t.rows[n].A, -(alpha_c - 1.0));
        const double D1 = std::pow(t.rows[n + 1].A, -(alpha_c - 1.0));
        law.deviation.push_back(std::abs(D1 - D0 - law.target));
    }
    law.final_relative = law.deviation.empty() ? 0.0 : law.deviation.back() / law.target;
    law.decreasing = detail::strictly_decreasing(law.deviation, transient + 1);
    return law;
}

inline CheckResult check_increment_law(const FlowTrace& t, double mu, int alpha_c, double beta,
                                       std::size_t transient = 5) {
    return detail::timed("increment_law", "increments of A_n^{-(alpha_c-1)} tend to mu (alpha_c-1) beta",
                         [&](CheckResult& r) {
        const auto law = increment_law(t, mu, alpha_c, beta, transient);
        r.add("target", law.target);
        r.add("deviation_first", law.deviation.front());
        r.add("deviation_final", law.deviation.back());
        r.add("final_relative", law.final_relative);
        r.add("transient_steps", static_cast<double>(transient));
        r.tolerance = "deviation strictly decreasing for n >= " + std::to_string(transient) +
                      "; final relative deviation <= 0.2";
        r.pass = t.complete && law.decreasing && law.final_relative <= 0.2;
    });
}

inline CheckResult check_lemma_residual(const FlowTrace& t, double mu, int alpha_c) {
    return detail::timed("renormalization_residual", "|A_{n+1} - A_n + mu beta_n A_n^alpha_c| <= ||w_n||",
                         [&](CheckResult& r) {
        bool bound = true, dec = true;
        double worst_margin = -std::numeric_limits<double>::infinity();
        std::vector<double> ratio;
        std::size_t first_rise = 0;
        for (std::size_t n = 0; n + 1 < t.rows.size(); ++n) {
            const auto& row = t.rows[n];
            const double An = std::pow(row.A, alpha_c);
            const double lhs = std::abs(t.rows[n + 1].A - row.A + mu * row.beta_n * An);
            bound = bound && lhs <= row.w_norm;
            worst_margin = std::max(worst_margin, lhs / row.w_norm);
            ratio.push_back(row.w_norm / An);
            if (ratio.size() > 1 && !(ratio.back() < ratio[ratio.size() - 2])) {
                if (dec) first_rise = n;
                dec = false;
            }
        }
        r.add("max_lhs_over_w", worst_margin);
        r.add("w_over_A_first", ratio.front());
        r.add("w_over_A_final", ratio.back());
        if (!dec) {
            r.add("first_rise_at_n", static_cast<double>(first_rise));
            r.add("ratio_before_rise", ratio[first_rise - 1]);
            r.add("ratio_at_rise", ratio[first_rise]);
        }
        r.tolerance = "inequality at every step; ||w_n||/A_n^alpha_c strictly decreasing at every step";
        r.pass = t.complete && bound && dec;
    });
}

inline CheckResult check_theorem_trend(const FlowTrace& t, int n_lo = 5) {
    return detail::timed("theorem_trend", "(n ln L)^{(p+1)/d} f_n approaches A f_p*", [&](CheckResult& r) {
        std::vector<double> err;
        for (const auto& row : t.rows)
            if (row.n >= n_lo) err.push_back(row.theorem_error);
        r.add("n_first", n_lo);
        r.add("n_last", t.rows.back().n);
        r.add("error_first", err.empty() ? NAN : err.front());
        r.add("error_last", err.empty() ? NAN : err.back());
        r.add("A_prefactor", t.A_prefactor);
        r.tolerance = "theorem_error strictly decreasing on n >= " + std::to_string(n_lo);
        r.pass = t.complete && err.size() >= 2 && detail::strictly_decreasing(err);
    });
}

// ---------------------------------------------------------------- direct oracle

struct DirectSolution {
    GridSpec grid;                       ///< enlarged grid of the unscaled problem
    std::vector<double> times;           ///< tau nodes on [1, T_end]
    std::vector<SpectralFunction> at_L;  ///< u(., L^k), k = 1..K
    int iterations = 0;

    /// f_k = a_k u(a_k ., L^k) on the flow grid, a_k = L^{k (p+1)/d}.
    SpectralFunction rescaled(int k, double L, double p, double d, const GridSpec& flow_grid) const {
        if (k < 1 || k > static_cast<int>(at_L.size())) throw DomainError("DirectSolution: no slice at L^" + std::to_string(k));
        return resample(at_L[static_cast<std::size_t>(k - 1)], flow_grid, std::pow(L, k * (p + 1.0) / d));
    }
};

/// Solves the unscaled equation on [1, T_end] as one block with s(t). The grid is
/// widened by a = T_end^{(p+1)/d} (x_max * a, n_points * 2^ceil(log2 a)) so that the
/// rescaled slices keep the flow grid's frequency extent. Nodes are uniform with
/// m * refine intervals on each [L^k, L^{k+1}], so t = L^k are nodes.
inline DirectSolution direct_integrate(const FlowConfig& cfg, double T_end, int refine = 2) {
    cfg.validate();
    const double L = cfg.L;
    if (!(T_end > 1.0) || T_end > std::pow(L, 3) * (1 + 1e-12))
        throw DomainError("direct_integrate: T_end must lie in (1, L^3]");
    if (refine < 1) throw DomainError("direct_integrate: refine must be >= 1");
    const double p = cfg.time.p, d = cfg.kernel.d;
    const double a = std::pow(T_end, (p + 1.0) / d);
    DirectSolution out;
    out.grid = cfg.grid;
    out.grid.x_max = cfg.grid.x_max * a;
    out.grid.n_points = cfg.grid.n_points << static_cast<int>(std::ceil(std::log2(a) - 1e-12));

    std::vector<double> nodes{1.0};
    std::vector<std::size_t> marks;
    const int per = cfg.solver.m * refine;
    for (double t0 = 1.0; t0 < T_end * (1 - 1e-12); t0 *= L) {
        const double t1 = std::min(t0 * L, T_end);
        for (int j = 1; j <= per; ++j) nodes.push_back(j == per ? t1 : t0 + (t1 - t0) * j / per);
        if (std::abs(t1 - t0 * L) <= 1e-12 * t1) marks.push_back(nodes.size() - 1);
    }
    out.times = nodes;

    const auto f0 = f_p_star(cfg.kernel, p, out.grid) * cfg.A0 + cfg.g0.build(out.grid);
    const Block block{cfg.kernel, cfg.time, 0, T_end};
    const auto sol = picard_solve(f0, cfg.nonlinearity, block, cfg.solver, nodes);
    out.iterations = sol.iterations;
    for (std::size_t idx : marks) out.at_L.push_back(sol.slices[idx]);
    return out;
}

inline CheckResult check_direct_vs_flow(const FlowConfig& cfg, const FlowTrace& t, int k = 3, double tol = 1e-4) {
    return detail::timed("direct_vs_rg", "composed RG blocks against direct integration at t = L^k",
                         [&](CheckResult& r) {
        if (static_cast<int>(t.f.size()) <= k) throw DomainError("check_direct_vs_flow: trace has fewer than k steps");
        const auto direct = direct_integrate(cfg, std::pow(cfg.L, k));
        double worst = 0.0;
        for (int j = 1; j <= k; ++j) {
            const double diff = bq_norm(direct.rescaled(j, cfg.L, cfg.time.p, cfg.kernel.d, cfg.grid) -
                                            t.f[static_cast<std::size_t>(j)],
                                        cfg.kernel.q);
            r.add("diff_n" + std::to_string(j), diff);
            if (j == k) worst = diff;
        }
        r.add("direct_grid_points", static_cast<double>(direct.grid.n_points));
        r.tolerance = "||rescaled direct - f_k|| <= " + std::to_string(tol) + " at k = " + std::to_string(k);
        r.pass = worst <= tol;
    });
}

// ---------------------------------------------------------------- suite

struct SuiteOptions {
    std::uint64_t seed = 1;
    int flow_steps = 20;  ///< the increment law and theorem trend need a longer run than the default
};

/// Full check suite for one configuration.
inline VerificationReport run_suite(const FlowConfig& cfg, const SuiteOptions& opt = {}) {
    cfg.validate();
    VerificationReport rep;
    const int ac = cfg.alpha_c();
    const double p = cfg.time.p;
    rep.checks.push_back(check_kernel_identities());
    rep.checks.push_back(check_fixed_point(cfg.kernel, p, cfg.L, cfg.grid));
    rep.checks.push_back(check_contraction(cfg.kernel, cfg.time, cfg.grid, opt.seed));
    rep.checks.push_back(check_R(cfg.kernel, ac, cfg.grid));
    rep.checks.push_back(check_beta_identities(cfg.kernel, cfg.time, cfg.L, ac, cfg.grid));
    if (!cfg.time.remainder.is_zero())
        rep.checks.push_back(check_beta_convergence(cfg.kernel, cfg.time, cfg.L, ac, cfg.grid));

    FlowConfig long_cfg = cfg;
    long_cfg.n_steps = std::max(cfg.n_steps, opt.flow_steps);
    FlowTrace trace;
    try {
        trace = run_flow(long_cfg);
    } catch (const Error& e) {
        CheckResult r;
        r.name = "flow";
        r.anchor = "RG flow run";
        r.note = e.what();
        rep.checks.push_back(r);
        return rep;
    }
    const double mu = cfg.nonlinearity.mu;
    const double beta = beta_limit(trace.R, p, cfg.kernel.d, cfg.L);
    rep.checks.push_back(check_flow_monotonicity(trace));
    if (mu > 0.0) {
        rep.checks.push_back(check_increment_law(trace, mu, ac, beta));
        rep.checks.push_back(check_lemma_residual(trace, mu, ac));
        rep.checks.push_back(check_theorem_trend(trace));
    }
    rep.checks.push_back(check_direct_vs_flow(cfg, trace));
    return rep;
}

}  // namespace rgflow
