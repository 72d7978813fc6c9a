#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <exception>
#include <limits>
#include <string>
#include <vector>

#include "rgflow/blocksolver.hpp"
#include "rgflow/error.hpp"
#include "rgflow/funcspace.hpp"
#include "rgflow/kernel.hpp"
#include "rgflow/linear.hpp"
#include "rgflow/marginal.hpp"
#include "rgflow/timechange.hpp"

namespace rgflow {

/// Initial remainder g0; every choice has g0^(0) = 0.
struct InitialRemainder {
    enum class Kind { zero, odd_bump, even_bump };
    Kind kind = Kind::even_bump;
    double eps = 1e-3;

    /// odd: i eps w e^{-w^2} (a real odd function); even: eps w^2 e^{-w^2}.
    SpectralFunction build(const GridSpec& grid) const {
        switch (kind) {
            case Kind::zero: return SpectralFunction::zero(grid);
            case Kind::odd_bump:
                return SpectralFunction::from_fourier(grid, [&](double w) { return cplx(0.0, eps * w * std::exp(-w * w)); });
            case Kind::even_bump:
                return SpectralFunction::from_fourier(grid, [&](double w) { return eps * w * w * std::exp(-w * w); });
        }
        return SpectralFunction::zero(grid);
    }

    static const char* name(Kind k) {
        switch (k) {
            case Kind::zero: return "zero";
            case Kind::odd_bump: return "odd-bump";
            case Kind::even_bump: return "even-bump";
        }
        return "?";
    }
};

struct FlowConfig {
    ScalingKernel kernel;
    TimeChange time{1.0, RemainderModel::zero()};
    Nonlinearity nonlinearity{0.05, 0.01, 2, {{3, 1.0}}};
    GridSpec grid;
    SolverParams solver;
    double L = 2.0;
    int n_steps = 12;
    double A0 = 0.05;
    InitialRemainder g0;
    bool allow_negative_mu = false;

    int alpha_c() const { return Nonlinearity::critical_exponent(time.p, kernel.d); }

    /// Checks every computable hypothesis; messages name the one violated.
    void validate() const {
        kernel.validate();
        time.validate();
        grid.validate();
        solver.validate();
        nonlinearity.validate(time.p, kernel.d, allow_negative_mu);
        if (!(L > 1.0)) throw ConfigError("flow: L must exceed 1");
        if (n_steps < 0) throw ConfigError("flow: n_steps must be >= 0");
        if (!(A0 > 0.0) || !std::isfinite(A0)) throw ConfigError("flow: A0 must be positive");
        const double mu = nonlinearity.mu, lambda = nonlinearity.lambda;
        const bool linear = mu == 0.0 && lambda == 0.0;
        if (!linear && !(std::abs(lambda) < std::abs(mu)))
            throw ConfigError("theorem condition violated: |lambda| < mu fails (lambda = " + std::to_string(lambda) +
                              ", mu = " + std::to_string(mu) + ")");
        const double g0_norm = bq_norm(g0.build(grid), kernel.q);
        const double bound = std::pow(A0, alpha_c());
        if (!(g0_norm < bound))
            throw ConfigError("(M2) violated: ||g0|| = " + std::to_string(g0_norm) + " >= A0^alpha_c = " +
                              std::to_string(bound));
    }
};

struct FlowState {
    int n = 0;
    SpectralFunction f;
    double A = 0.0;
    SpectralFunction g;
};

struct StepDiagnostics {
    SpectralFunction nu;          ///< u_n(., L) - u0_n(., L)
    double nu_hat0 = 0.0;
    int picard_iters = 0;
    double picard_residual = 0.0;
    double g_hat0 = 0.0;          ///< |g^_{n+1}(0)|
    double decomposition = 0.0;   ///< max |f_{n+1} - A_{n+1} h_{n+1} - g_{n+1}|
    std::vector<double> times;    ///< block nodes, reused for nu*_n
};

inline constexpr double kGZeroTol = 1e-10;
inline constexpr double kDecompositionTol = 1e-9;

inline double decomposition_residual(const FlowState& s, const FlowConfig& cfg) {
    auto model = h_n(cfg.kernel, cfg.time, s.n, cfg.L, cfg.grid);
    model *= cplx(s.A);
    model += s.g;
    return max_abs_diff(s.f, model);
}

/// One RG step f_n -> f_{n+1} with the amplitude/remainder update.
inline FlowState rg_step(const FlowState& s, const FlowConfig& cfg, StepDiagnostics* diag = nullptr) {
    const double pre = decomposition_residual(s, cfg);
    if (!(pre < kDecompositionTol))
        throw DecompositionDrift("rg_step: f_n - A_n h_n - g_n = " + std::to_string(pre) + " at n = " +
                                 std::to_string(s.n));
    const Block block{cfg.kernel, cfg.time, s.n, cfg.L};
    const auto sol = picard_solve(s.f, cfg.nonlinearity, block, cfg.solver);
    const auto u0_end = apply_multiplier(s.f, cfg.kernel, block.s(cfg.L));
    const auto nu = sol.at_end() - u0_end;
    const double nu0 = eval_at_zero(nu).real();
    const double a = block.dilation();
    if (dilation_loses_tail(sol.at_end(), a)) throw TailTooLarge("rg_step: dilation pushes the tail off the grid");

    FlowState next;
    next.n = s.n + 1;
    next.f = dilate(sol.at_end(), a);
    next.A = s.A + nu0;
    next.g = linear_rg_step(s.g, cfg.kernel, cfg.time, s.n, cfg.L);
    next.g += dilate(nu, a);
    next.g.axpy(-nu0, h_n(cfg.kernel, cfg.time, next.n, cfg.L, cfg.grid));

    const double g0 = std::abs(eval_at_zero(next.g));
    const double post = decomposition_residual(next, cfg);
    if (!(g0 <= kGZeroTol))
        throw DecompositionDrift("rg_step: g^_{n+1}(0) = " + std::to_string(g0) + " at n = " + std::to_string(next.n));
    if (!(post < kDecompositionTol))
        throw DecompositionDrift("rg_step: f_{n+1} - A_{n+1} h_{n+1} - g_{n+1} = " + std::to_string(post) +
                                 " at n = " + std::to_string(next.n));
    if (diag) {
        diag->nu = nu;
        diag->nu_hat0 = nu0;
        diag->picard_iters = sol.iterations;
        diag->picard_residual = sol.residual;
        diag->g_hat0 = g0;
        diag->decomposition = post;
        diag->times = sol.times;
    }
    return next;
}

/// One trace row per n; step quantities (nu_hat0, beta_n, w_norm, picard_iters)
/// describe the step n -> n+1 and are NaN/0 on the final row.
struct FlowRow {
    int n = 0;
    double A = 0.0;
    double g_norm = 0.0;
    double nu_hat0 = std::numeric_limits<double>::quiet_NaN();
    double beta_n = std::numeric_limits<double>::quiet_NaN();
    double w_norm = std::numeric_limits<double>::quiet_NaN();
    double theorem_error = std::numeric_limits<double>::quiet_NaN();
    int picard_iters = 0;
    double g_hat0 = 0.0;
    double decomposition = 0.0;
};

struct FlowTrace {
    std::vector<FlowRow> rows;
    std::vector<SpectralFunction> f;  ///< f_0 .. f_N
    SpectralFunction g;               ///< terminal g_N
    double R = 0.0;
    double A_prefactor = std::numeric_limits<double>::quiet_NaN();
    bool complete = false;
    std::string failure;
};

/// A flow that stopped early; carries the rows computed so far.
class FlowAborted : public Error {
public:
    FlowAborted(const std::string& what, FlowTrace partial) : Error(what), partial_(std::move(partial)) {}
    const FlowTrace& partial() const noexcept { return partial_; }

private:
    FlowTrace partial_;
};

/// ||(n ln L)^{(p+1)/d} f_n - A f_p*||; defined for n >= 2.
inline double theorem_error(const SpectralFunction& f_n, int n, double L, double A_prefactor, const ScalingKernel& kernel,
                            double p) {
    if (n < 2) throw DomainError("theorem_error: requires n >= 2");
    auto diff = f_n * std::pow(n * std::log(L), (p + 1.0) / kernel.d);
    diff.axpy(-A_prefactor, f_p_star(kernel, p, f_n.grid()));
    return bq_norm(diff, kernel.q);
}

inline FlowTrace run_flow(const FlowConfig& cfg) {
    cfg.validate();
    const int ac = cfg.alpha_c();
    const double mu = cfg.nonlinearity.mu;
    const int q = cfg.kernel.q;
    const double p = cfg.time.p;

    FlowTrace trace;
    trace.R = R_constant(cfg.kernel, ac, cfg.grid).value();
    if (mu > 0.0) trace.A_prefactor = prefactor_A(trace.R, p, cfg.kernel.d, mu);

    FlowState s;
    s.g = cfg.g0.build(cfg.grid);
    s.A = cfg.A0;
    s.f = f_p_star(cfg.kernel, p, cfg.grid) * cfg.A0 + s.g;
    trace.f.push_back(s.f);

    auto base_row = [&](const FlowState& st) {
        FlowRow row;
        row.n = st.n;
        row.A = st.A;
        row.g_norm = bq_norm(st.g, q);
        row.g_hat0 = std::abs(eval_at_zero(st.g));
        row.decomposition = decomposition_residual(st, cfg);
        if (st.n >= 2 && mu > 0.0)
            row.theorem_error = theorem_error(st.f, st.n, cfg.L, trace.A_prefactor, cfg.kernel, p);
        return row;
    };

    for (int n = 0; n < cfg.n_steps; ++n) {
        FlowRow row = base_row(s);
        try {
            StepDiagnostics diag;
            FlowState next = rg_step(s, cfg, &diag);
            const auto star = nu_star(n, cfg.kernel, cfg.time, cfg.L, ac, cfg.grid, diag.times);
            row.nu_hat0 = diag.nu_hat0;
            row.beta_n = eval_at_zero(star).real();
            auto w = diag.nu;
            w.axpy(mu * std::pow(s.A, ac), star);
            row.w_norm = bq_norm(w, q);
            row.picard_iters = diag.picard_iters;
            trace.rows.push_back(row);
            trace.f.push_back(next.f);
            s = std::move(next);
        } catch (const Error& e) {
            trace.rows.push_back(row);
            trace.g = s.g;
            trace.failure = e.what();
            throw FlowAborted("run_flow: step " + std::to_string(n) + " failed: " + e.what(), std::move(trace));
        }
    }
    trace.rows.push_back(base_row(s));
    trace.g = s.g;
    trace.complete = true;
    return trace;
}

/// Trace CSV: n,A_n,g_norm,nu_hat0,beta_n,w_norm,theorem_error,picard_iters.
inline void write_trace_csv(const FlowTrace& t, std::ostream& os) {
    os << "n,A_n,g_norm,nu_hat0,beta_n,w_norm,theorem_error,picard_iters\n";
    char buf[512];
    for (const auto& r : t.rows) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", r.n, r.A, r.g_norm, r.nu_hat0,
                      r.beta_n, r.w_norm, r.theorem_error, r.picard_iters);
        os << buf;
    }
}

}  // namespace rgflow
