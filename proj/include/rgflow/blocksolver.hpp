#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rgflow/error.hpp"
#include "rgflow/funcspace.hpp"
#include "rgflow/kernel.hpp"
#include "rgflow/timechange.hpp"

namespace rgflow {

/// F(u) = -mu u^{alpha_c} + lambda sum_j a_j u^j, all j > alpha_c.
struct Nonlinearity {
    double mu = 0.0;
    double lambda = 0.0;
    int alpha_c = 2;
    std::vector<std::pair<int, double>> terms;  ///< (j, a_j)

    /// alpha_c = (p+1+d)/(p+1); throws unless it is an integer >= 2.
    static int critical_exponent(double p, double d) {
        const double ac = (p + 1.0 + d) / (p + 1.0);
        const double rounded = std::round(ac);
        if (std::abs(ac - rounded) > 1e-9 || rounded < 2.0) {
            std::ostringstream msg;
            msg << "(M1) violated: alpha_c = (p+1+d)/(p+1) = " << ac << " is not an integer >= 2";
            throw ConfigError(msg.str());
        }
        return static_cast<int>(rounded);
    }

    /// Smallest irrelevant power; alpha_c + 1 when there are no terms.
    int alpha() const {
        int a = std::numeric_limits<int>::max();
        for (const auto& [j, c] : terms) a = std::min(a, j);
        return terms.empty() ? alpha_c + 1 : a;
    }

    void validate(double p, double d, bool allow_negative_mu = false) const {
        const int ac = critical_exponent(p, d);
        if (ac != alpha_c)
            throw ConfigError("nonlinearity: alpha_c = " + std::to_string(alpha_c) + " but (p+1+d)/(p+1) = " +
                              std::to_string(ac));
        for (const auto& [j, c] : terms)
            if (j <= alpha_c)
                throw ConfigError("nonlinearity: irrelevant power " + std::to_string(j) +
                                  " must exceed alpha_c = " + std::to_string(alpha_c));
        if (!std::isfinite(mu) || !std::isfinite(lambda)) throw ConfigError("nonlinearity: couplings must be finite");
        if (mu < 0.0 && !allow_negative_mu)
            throw ConfigError("(M1) violated: mu must be >= 0 (negative mu may blow up in finite time; "
                              "pass --allow-negative-mu to override)");
    }

    /// lambda_n = L^{-n(p+1)(alpha-alpha_c)/d} lambda.
    double lambda_n(int n, double L, double p, double d) const {
        return lambda * std::exp(-n * (p + 1.0) * (alpha() - alpha_c) / d * std::log(L));
    }

    /// Coefficients of lambda_n F_{L,n}: lambda a_j L^{-n(p+1)(j - alpha_c)/d}.
    std::vector<std::pair<int, double>> renormalized_terms(int n, double L, double p, double d) const {
        std::vector<std::pair<int, double>> out;
        for (const auto& [j, a] : terms)
            out.emplace_back(j, lambda * a * std::exp(-n * (p + 1.0) * (j - alpha_c) / d * std::log(L)));
        return out;
    }
};

/// One RG block: the kernel, the time change and the block index/scale.
/// With n = 0 and L = T the same object describes the unscaled problem on [1, T].
struct Block {
    ScalingKernel kernel;
    TimeChange time;
    int n = 0;
    double L = 2.0;

    double s(double t) const { return time.s_n(n, L, t); }
    double dilation() const { return std::pow(L, (time.p + 1.0) / kernel.d); }
};

struct SolverParams {
    int m = 32;                 ///< uniform tau sub-intervals on [1, L]
    double picard_tol = 1e-10;  ///< block-norm tolerance on successive iterates
    int picard_max = 50;
    double norm_guard = 0.0;    ///< 0 selects 10x the linear block norm

    void validate() const {
        if (m < 8) throw ConfigError("solver: m must be >= 8");
        if (!(picard_tol > 0.0)) throw ConfigError("solver: picard_tol must be positive");
        if (picard_max < 1) throw ConfigError("solver: picard_max must be >= 1");
        if (norm_guard < 0.0) throw ConfigError("solver: norm_guard must be >= 0");
    }
};

/// Space-time samples u^(., t_j) on the block's time nodes.
struct BlockSolution {
    std::vector<double> times;
    std::vector<SpectralFunction> slices;
    double block_norm = 0.0;
    int iterations = 0;
    double residual = 0.0;

    const SpectralFunction& at_end() const { return slices.back(); }
};

inline std::vector<double> uniform_nodes(double t0, double t1, int m) {
    std::vector<double> t(static_cast<std::size_t>(m) + 1);
    for (int j = 0; j <= m; ++j) t[static_cast<std::size_t>(j)] = t0 + (t1 - t0) * j / m;
    t.back() = t1;
    return t;
}

inline double block_norm(const std::vector<SpectralFunction>& slices, int q) {
    double worst = 0.0;
    for (const auto& s : slices) worst = std::max(worst, bq_norm(s, q));
    return worst;
}

/// u0(t_j) = exp(s(t_j) L) f for each node.
inline BlockSolution linear_block(const SpectralFunction& f, const Block& block, const std::vector<double>& nodes) {
    BlockSolution out;
    out.times = nodes;
    for (double t : nodes) out.slices.push_back(apply_multiplier(f, block.kernel, block.s(t)));
    out.block_norm = block_norm(out.slices, block.kernel.q);
    return out;
}

inline BlockSolution linear_block(const SpectralFunction& f, const Block& block, const SolverParams& params) {
    return linear_block(f, block, uniform_nodes(1.0, block.L, params.m));
}

/// Composite-trapezoid Duhamel integral D(t_j) = int_{t_0}^{t_j} exp([s(t_j)-s(tau)] L) P(tau) dtau
/// for every node at once. Uses the exact step recurrence
/// D_{j+1} = E_j (D_j + h_j/2 P_j) + h_j/2 P_{j+1}, E_j the multiplier over [t_j, t_{j+1}].
class DuhamelIntegrator {
public:
    DuhamelIntegrator(const GridSpec& grid, const Block& block, std::vector<double> nodes)
        : grid_(grid), nodes_(std::move(nodes)) {
        if (nodes_.size() < 2) throw DomainError("DuhamelIntegrator: need at least two nodes");
        std::vector<double> s(nodes_.size());
        for (std::size_t j = 0; j < nodes_.size(); ++j) s[j] = block.s(nodes_[j]);
        for (std::size_t j = 0; j + 1 < nodes_.size(); ++j)
            steps_.push_back(multiplier_samples(grid_, block.kernel, s[j + 1] - s[j]));
    }

    const std::vector<double>& nodes() const { return nodes_; }

    std::vector<SpectralFunction> integrate(const std::vector<SpectralFunction>& integrand) const {
        if (integrand.size() != nodes_.size()) throw DomainError("DuhamelIntegrator: node count mismatch");
        std::vector<SpectralFunction> out;
        out.reserve(nodes_.size());
        out.emplace_back(grid_);
        const std::size_t n = grid_.n_points;
        for (std::size_t j = 0; j + 1 < nodes_.size(); ++j) {
            const double half = 0.5 * (nodes_[j + 1] - nodes_[j]);
            const auto& e = steps_[j];
            const auto& prev = out.back().fhat();
            const auto& pj = integrand[j].fhat();
            const auto& pn = integrand[j + 1].fhat();
            std::vector<cplx> next(n);
            for (std::size_t i = 0; i < n; ++i) next[i] = e[i] * (prev[i] + half * pj[i]) + half * pn[i];
            out.emplace_back(grid_, std::move(next));
        }
        return out;
    }

private:
    GridSpec grid_;
    std::vector<double> nodes_;
    std::vector<std::vector<double>> steps_;
};

namespace detail {

inline std::vector<double> trapezoid_weights(const std::vector<double>& nodes, std::size_t last) {
    std::vector<double> w(last + 1, 0.0);
    for (std::size_t i = 0; i < last; ++i) {
        const double h = 0.5 * (nodes[i + 1] - nodes[i]);
        w[i] += h;
        w[i + 1] += h;
    }
    return w;
}

/// Explicit trapezoid sum of exp([s(t_k)-s(t_i)] L) P(u(t_i)) over i <= k.
template <class Integrand>
SpectralFunction duhamel_at(const BlockSolution& u, const Block& block, std::size_t t_index, Integrand&& integrand) {
    if (t_index >= u.slices.size()) throw DomainError("duhamel: t_index out of range");
    const GridSpec& g = u.slices.front().grid();
    SpectralFunction acc(g);
    if (t_index == 0) return acc;
    const auto w = trapezoid_weights(u.times, t_index);
    const double st = block.s(u.times[t_index]);
    for (std::size_t i = 0; i <= t_index; ++i) {
        const auto p = integrand(u.slices[i]);
        acc.axpy(w[i], apply_multiplier(p, block.kernel, st - block.s(u.times[i])));
    }
    return acc;
}

}  // namespace detail

/// M_n(u)(t_k) = mu int_1^{t_k} exp([s_n(t_k)-s_n(tau)] L) u^{alpha_c}(tau) dtau (trapezoid).
inline SpectralFunction apply_Mn(const BlockSolution& u, const Nonlinearity& nl, const Block& block,
                                 std::size_t t_index) {
    auto out = detail::duhamel_at(u, block, t_index,
                                  [&](const SpectralFunction& s) { return pointwise_power(s, nl.alpha_c); });
    return out *= cplx(nl.mu);
}

/// N_n(u)(t_k): the Duhamel term of lambda_n F_{L,n}(u).
inline SpectralFunction apply_Nn(const BlockSolution& u, const Nonlinearity& nl, const Block& block,
                                 std::size_t t_index) {
    const auto terms = nl.renormalized_terms(block.n, block.L, block.time.p, block.kernel.d);
    if (terms.empty() || nl.lambda == 0.0) return SpectralFunction(u.slices.front().grid());
    return detail::duhamel_at(u, block, t_index,
                              [&](const SpectralFunction& s) { return pointwise_polynomial(s, terms); });
}

/// Integrand of V_n = -M_n + N_n at one slice: -mu u^{alpha_c} + lambda_n F_{L,n}(u).
inline SpectralFunction nonlinear_integrand(const SpectralFunction& u, const Nonlinearity& nl, const Block& block) {
    std::vector<std::pair<int, double>> terms;
    if (nl.mu != 0.0) terms.emplace_back(nl.alpha_c, -nl.mu);
    if (nl.lambda != 0.0)
        for (const auto& t : nl.renormalized_terms(block.n, block.L, block.time.p, block.kernel.d))
            if (t.second != 0.0) terms.push_back(t);
    if (terms.empty()) return SpectralFunction(u.grid());
    return pointwise_polynomial(u, terms);
}

/// One application of T_n(u) = u0 + V_n(u) on every node.
inline std::vector<SpectralFunction> apply_T(const std::vector<SpectralFunction>& u,
                                             const std::vector<SpectralFunction>& u0, const Nonlinearity& nl,
                                             const Block& block, const DuhamelIntegrator& duhamel) {
    std::vector<SpectralFunction> integrand;
    integrand.reserve(u.size());
    for (const auto& s : u) integrand.push_back(nonlinear_integrand(s, nl, block));
    auto v = duhamel.integrate(integrand);
    for (std::size_t j = 0; j < v.size(); ++j) v[j] += u0[j];
    return v;
}

/// Whole-block Picard iteration u <- u0 + V_n(u), started from u0.
inline BlockSolution picard_solve(const SpectralFunction& f, const Nonlinearity& nl, const Block& block,
                                  const SolverParams& params, const std::vector<double>& nodes) {
    const int q = block.kernel.q;
    const BlockSolution lin = linear_block(f, block, nodes);
    if (bq_norm(f, q) > 0.0 && params.norm_guard > 0.0 && bq_norm(f, q) >= params.norm_guard)
        throw Divergence("picard_solve: initial data norm exceeds norm_guard", {0, 0.0, bq_norm(f, q)});
    const double guard = params.norm_guard > 0.0 ? params.norm_guard
                                                 : std::max(10.0 * lin.block_norm, std::numeric_limits<double>::min());
    const DuhamelIntegrator duhamel(f.grid(), block, nodes);

    std::vector<SpectralFunction> u = lin.slices;
    PicardDiagnostics diag;
    for (int it = 1; it <= params.picard_max; ++it) {
        auto next = apply_T(u, lin.slices, nl, block, duhamel);
        double update = 0.0;
        for (std::size_t j = 0; j < next.size(); ++j) update = std::max(update, bq_norm(next[j] - u[j], q));
        u = std::move(next);
        const double norm = block_norm(u, q);
        diag = {it, update, norm};
        if (!std::isfinite(norm) || norm > guard)
            throw Divergence("picard_solve: block norm " + std::to_string(norm) + " exceeds norm_guard " +
                                 std::to_string(guard),
                             diag);
        if (update < params.picard_tol) {
            BlockSolution out;
            out.times = nodes;
            out.slices = std::move(u);
            out.block_norm = norm;
            out.iterations = it;
            out.residual = update;
            return out;
        }
    }
    throw NoConvergence("picard_solve: no convergence after " + std::to_string(params.picard_max) +
                            " iterations (last update " + std::to_string(diag.last_update) + ")",
                        diag);
}

inline BlockSolution picard_solve(const SpectralFunction& f, const Nonlinearity& nl, const Block& block,
                                  const SolverParams& params) {
    return picard_solve(f, nl, block, params, uniform_nodes(1.0, block.L, params.m));
}

}  // namespace rgflow
