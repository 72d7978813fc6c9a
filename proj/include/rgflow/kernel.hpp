#pragma once

#include <cmath>
#include <span>
#include <string>

#include "rgflow/error.hpp"

namespace rgflow {

/// Symmetric stable scaling kernel, G^(w,t) = exp(-kappa t |w|^d).
///
/// Satisfies self-similarity G^(w,t) = G^(t^{1/d} w, 1) and the semigroup
/// identity G^(w,t) = G^(w,t-s) G^(w,s) exactly in Fourier variables.
/// d = 2, kappa = 1 is the heat kernel G(x,t) = (4 pi t)^{-1/2} e^{-x^2/4t}.
/// q is the weight exponent of the B_q norm.
struct ScalingKernel {
    double d = 2.0;
    double kappa = 1.0;
    int q = 2;

    void validate() const {
        if (!(d > 0.0) || !std::isfinite(d))
            throw ConfigError("kernel: scaling exponent d must be positive, got " + std::to_string(d));
        if (!(kappa > 0.0) || !std::isfinite(kappa))
            throw ConfigError("kernel: kappa must be positive, got " + std::to_string(kappa));
        if (q <= 1)
            throw ConfigError("kernel: weight exponent q must be an integer > 1, got " + std::to_string(q));
    }

    /// Exponent of the multiplier, kappa t |w|^d.
    double exponent(double omega, double t) const { return kappa * t * std::pow(std::abs(omega), d); }

    /// Multiplier value for t >= 0 (t = 0 gives the identity). No domain check.
    double multiplier(double omega, double t) const { return std::exp(-exponent(omega, t)); }

    /// |d/dw G^(w,1)| = kappa d |w|^{d-1} exp(-kappa |w|^d).
    double profile_slope(double omega) const {
        const double w = std::abs(omega);
        return kappa * d * std::pow(w, d - 1.0) * std::exp(-kappa * std::pow(w, d));
    }
};

inline double ghat(const ScalingKernel& k, double omega, double t) {
    if (!(t > 0.0)) throw DomainError("ghat: time must be positive");
    return k.multiplier(omega, t);
}

/// max over the frequencies of |G^(w,t) - G^(w,t-s) G^(w,s)|.
inline double semigroup_residual(const ScalingKernel& k, double t, double s,
                                 std::span<const double> omegas) {
    if (!(s > 0.0) || !(t > s)) throw DomainError("semigroup_residual: requires t > s > 0");
    double worst = 0.0;
    for (double w : omegas) {
        const double lhs = k.multiplier(w, t);
        const double rhs = k.multiplier(w, t - s) * k.multiplier(w, s);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

/// max over the frequencies of |G^(w,t) - G^(t^{1/d} w, 1)|.
inline double self_similarity_residual(const ScalingKernel& k, double t,
                                       std::span<const double> omegas) {
    if (!(t > 0.0)) throw DomainError("self_similarity_residual: time must be positive");
    const double scale = std::pow(t, 1.0 / k.d);
    double worst = 0.0;
    for (double w : omegas)
        worst = std::max(worst, std::abs(k.multiplier(w, t) - k.multiplier(scale * w, 1.0)));
    return worst;
}

struct KernelConstants {
    double K = 0.0;   ///< sup |G^(w,1)|
    double K1 = 0.0;  ///< sup |G^'(w,1)|
};

/// Grid suprema of |G^(.,1)| and its derivative. The grid must reach far
/// enough that the multiplier at its outermost frequency is below 1e-12.
inline KernelConstants kernel_constants(const ScalingKernel& k, std::span<const double> omegas,
                                        double tail_tol = 1e-12) {
    double w_max = 0.0;
    for (double w : omegas) w_max = std::max(w_max, std::abs(w));
    if (k.multiplier(w_max, 1.0) > tail_tol)
        throw TailTooLarge("kernel_constants: multiplier at the grid edge " + std::to_string(w_max) +
                           " exceeds " + std::to_string(tail_tol));
    KernelConstants c;
    for (double w : omegas) {
        c.K = std::max(c.K, k.multiplier(w, 1.0));
        c.K1 = std::max(c.K1, k.profile_slope(w));
    }
    return c;
}

}  // namespace rgflow
