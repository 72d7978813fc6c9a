#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "rgflow/blocksolver.hpp"
#include "rgflow/error.hpp"
#include "rgflow/funcspace.hpp"
#include "rgflow/kernel.hpp"
#include "rgflow/linear.hpp"
#include "rgflow/timechange.hpp"

namespace rgflow {

struct RQuadrature {
    double box_tol = 1e-12;  ///< integrand bound on the box boundary
    int nodes_1d = 65537;    ///< alpha_c = 2; many nodes so non-smooth |w|^d profiles converge
    int nodes_2d = 1025;     ///< alpha_c = 3, per axis
};

struct RResult {
    double direct = std::numeric_limits<double>::quiet_NaN();  ///< NaN when alpha_c > 3
    double oracle = 0.0;
    double discrepancy() const { return std::isnan(direct) ? 0.0 : std::abs(direct - oracle); }
    double value() const { return std::isnan(direct) ? oracle : direct; }
};

namespace detail {

/// Tensor trapezoid of G^(-x1,1) G^(x1-x2,1) ... G^(x_{D},1) over [-X, X]^D.
inline double R_direct(const ScalingKernel& k, int alpha_c, const RQuadrature& quad) {
    const int dim = alpha_c - 1;
    const double X = std::pow(-std::log(quad.box_tol) / k.kappa, 1.0 / k.d);
    const int n = dim == 1 ? quad.nodes_1d : quad.nodes_2d;
    if (n < 257) throw ConfigError("R_constant: at least 257 nodes per axis are required");
    const double h = 2 * X / (n - 1);
    auto G = [&](double w) { return k.multiplier(w, 1.0); };
    auto w = [&](int i) { return (i == 0 || i == n - 1) ? 0.5 : 1.0; };
    double sum = 0.0;
    if (dim == 1) {
        for (int i = 0; i < n; ++i) {
            const double x = -X + i * h;
            sum += w(i) * G(x) * G(x);
        }
        return sum * h;
    }
    std::vector<double> g1(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) g1[static_cast<std::size_t>(i)] = G(-X + i * h);
    for (int i = 0; i < n; ++i) {
        const double x1 = -X + i * h;
        double inner = 0.0;
        for (int j = 0; j < n; ++j) inner += w(j) * G(x1 - (-X + j * h)) * g1[static_cast<std::size_t>(j)];
        sum += w(i) * g1[static_cast<std::size_t>(i)] * inner;
    }
    return sum * h * h;
}

/// (2 pi)^{alpha_c - 1} int G(x,1)^{alpha_c} dx on the grid.
inline double R_oracle(const ScalingKernel& k, int alpha_c, const GridSpec& grid, double tol) {
    const auto G = SpectralFunction::from_fourier(grid, [&](double w) { return k.multiplier(w, 1.0); });
    if (!is_resolved(G)) throw TailTooLarge("R_constant: G^(., 1) is not resolved on the grid");
    const auto phys = G.physical();
    double peak = 0.0, edge = 0.0;
    for (std::size_t j = 0; j < phys.size(); ++j) {
        const double v = std::pow(std::abs(phys[j]), alpha_c);
        peak = std::max(peak, v);
        if (std::abs(grid.x(j)) >= 0.9 * grid.x_max) edge = std::max(edge, v);
    }
    if (edge > tol * peak)
        throw TailTooLarge("R_constant: G(x,1)^alpha_c at the box edge is " + std::to_string(edge / peak) +
                           " of its peak");
    const double integral = eval_at_zero(pointwise_power(G, alpha_c)).real();
    return std::pow(2 * std::numbers::pi, alpha_c - 1) * integral;
}

}  // namespace detail

/// R by tensor quadrature (alpha_c <= 3) and by the physical-space oracle.
inline RResult R_constant(const ScalingKernel& kernel, int alpha_c, const GridSpec& grid = {},
                          const RQuadrature& quad = {}) {
    if (alpha_c < 2) throw DomainError("R_constant: alpha_c must be >= 2");
    kernel.validate();
    RResult out;
    if (alpha_c <= 3) out.direct = detail::R_direct(kernel, alpha_c, quad);
    out.oracle = detail::R_oracle(kernel, alpha_c, grid, quad.box_tol);
    return out;
}

/// nu*_n = int_1^L exp([s_n(L) - s_n(t)] L) (exp(s_n(t) L) h_n)^{alpha_c} dt, trapezoid on `nodes`.
inline SpectralFunction nu_star(int n, const ScalingKernel& kernel, const TimeChange& tc, double L, int alpha_c,
                                const GridSpec& grid, const std::vector<double>& nodes) {
    const Block block{kernel, tc, n, L};
    const auto lin = linear_block(h_n(kernel, tc, n, L, grid), block, nodes);
    std::vector<SpectralFunction> integrand;
    integrand.reserve(lin.slices.size());
    for (const auto& s : lin.slices) integrand.push_back(pointwise_power(s, alpha_c));
    return DuhamelIntegrator(grid, block, nodes).integrate(integrand).back();
}

inline SpectralFunction nu_star(int n, const ScalingKernel& kernel, const TimeChange& tc, double L, int alpha_c,
                                const GridSpec& grid, int m) {
    return nu_star(n, kernel, tc, L, alpha_c, grid, uniform_nodes(1.0, L, m));
}

/// beta_n = Re nu*^_n(0).
inline double beta_n_direct(int n, const ScalingKernel& kernel, const TimeChange& tc, double L, int alpha_c,
                            const GridSpec& grid, int m) {
    return eval_at_zero(nu_star(n, kernel, tc, L, alpha_c, grid, m)).real();
}

/// beta_n = R (p+1)^{1/(p+1)} / (2pi)^{alpha_c-1} int_0^{L-1} [(L-tau)^{p+1} + h_n(tau)]^{-1/(p+1)} dtau,
/// h_n(tau) = (p+1) [r_n(L - tau) + r(L^n) L^{-n(p+1)}].
inline double beta_n_closed(int n, const TimeChange& tc, double L, int alpha_c, double R) {
    const double p = tc.p;
    const double shift = tc.scaled_r(n, L);
    auto base = [&](double tau) {
        const double t = L - tau;
        return std::pow(t, p + 1.0) + (p + 1.0) * (tc.r_n(n, L, t) + shift);
    };
    for (int i = 0; i <= 64; ++i) {
        const double tau = (L - 1.0) * i / 64.0;
        if (!(base(tau) > 0.0))
            throw DomainError("beta_n: (L-tau)^{p+1} + h_n <= 0 at tau = " + std::to_string(tau) +
                              "; n is too small for this remainder");
    }
    auto integrand = [&](double tau) { return std::pow(base(tau), -1.0 / (p + 1.0)); };
    const double I = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, L - 1.0, 15, 1e-14);
    return R * std::pow(p + 1.0, 1.0 / (p + 1.0)) / std::pow(2 * std::numbers::pi, alpha_c - 1) * I;
}

/// beta = R [(p+1)/(2pi)^d]^{1/(p+1)} ln L.
inline double beta_limit(double R, double p, double d, double L) {
    return R * std::pow((p + 1.0) / std::pow(2 * std::numbers::pi, d), 1.0 / (p + 1.0)) * std::log(L);
}

inline double beta_star_lo(double R, double p, int alpha_c) {
    return R / std::pow(2 * std::numbers::pi, alpha_c - 1) * std::pow((p + 1.0) / 4.0, 1.0 / (p + 1.0)) *
           (1.0 - std::pow(3.0, -1.0 / (p + 1.0)));
}

inline double beta_star_hi(double R, double p, int alpha_c, double L) {
    return R / std::pow(2 * std::numbers::pi, alpha_c - 1) * (L - 1.0) * std::pow(6.0 * (p + 1.0), 1.0 / (p + 1.0));
}

/// [mu (alpha_c - 1) beta n]^{-(p+1)/d}.
inline double predicted_An(int n, double mu, int alpha_c, double beta, double p, double d) {
    if (n < 1) throw DomainError("predicted_An: n must be >= 1");
    if (!(mu > 0.0)) throw DomainError("predicted_An: mu must be positive");
    return std::pow(mu * (alpha_c - 1) * beta * n, -(p + 1.0) / d);
}

/// A = {(d/(p+1)) [(p+1)/(2pi)^d]^{1/(p+1)} mu R}^{-(p+1)/d}.
inline double prefactor_A(double R, double p, double d, double mu) {
    if (!(mu > 0.0)) throw DomainError("prefactor_A: mu must be positive");
    return std::pow(d / (p + 1.0) * std::pow((p + 1.0) / std::pow(2 * std::numbers::pi, d), 1.0 / (p + 1.0)) * mu * R,
                    -(p + 1.0) / d);
}

struct BetaGapRow {
    int n = 0;
    double beta_n = 0.0;
    double gap = 0.0;       ///< |beta_n - beta|
    double envelope = 0.0;  ///< c n^{-(p+1)/d}, c fitted at the first row
};

struct BetaConvergence {
    std::vector<BetaGapRow> rows;
    double beta = 0.0;
    bool strictly_decreasing = false;
    double slope = 0.0;        ///< least-squares log-log slope over the fit window
    double slope_bound = 0.0;  ///< -(p+1)/d + 0.3
    double envelope_ratio = 0.0;  ///< max gap/envelope over the fit window

    bool pass() const { return strictly_decreasing && slope <= slope_bound; }
};

/// Gap |beta_n - beta| (closed-form route) for n in [n_lo, n_hi]; slope fitted on [fit_lo, n_hi].
inline BetaConvergence beta_convergence(const ScalingKernel& kernel, const TimeChange& tc, double L, int alpha_c,
                                        double R, int n_lo, int n_hi, int fit_lo) {
    if (tc.remainder.is_zero()) throw DomainError("beta_convergence: requires a nonzero remainder");
    if (n_lo < 1 || n_hi <= n_lo || fit_lo < n_lo || fit_lo >= n_hi)
        throw DomainError("beta_convergence: bad n range");
    BetaConvergence out;
    const double rate = (tc.p + 1.0) / kernel.d;
    out.beta = beta_limit(R, tc.p, kernel.d, L);
    out.slope_bound = -rate + 0.3;
    for (int n = n_lo; n <= n_hi; ++n) {
        BetaGapRow row;
        row.n = n;
        row.beta_n = beta_n_closed(n, tc, L, alpha_c, R);
        row.gap = std::abs(row.beta_n - out.beta);
        out.rows.push_back(row);
    }
    const double c = out.rows.front().gap * std::pow(n_lo, rate);
    out.strictly_decreasing = true;
    for (std::size_t i = 0; i < out.rows.size(); ++i) {
        out.rows[i].envelope = c * std::pow(out.rows[i].n, -rate);
        if (i > 0 && !(out.rows[i].gap < out.rows[i - 1].gap)) out.strictly_decreasing = false;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int k = 0;
    for (const auto& row : out.rows) {
        if (row.n < fit_lo) continue;
        const double x = std::log(row.n), y = std::log(row.gap);
        sx += x, sy += y, sxx += x * x, sxy += x * y, ++k;
        out.envelope_ratio = std::max(out.envelope_ratio, row.gap / row.envelope);
    }
    out.slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    return out;
}

}  // namespace rgflow
