#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "rgflow/error.hpp"

namespace rgflow {

/// Remainder of the time change, r(t) = s(t) - (t^{p+1} - 1)/(p+1).
///
/// Zero, or a single power coming from c(t) = t^p + coeff t^{p-delta}:
/// r(t) = coeff (t^e - 1)/e with e = p + 1 - delta.
struct RemainderModel {
    enum class Kind { zero, power };
    Kind kind = Kind::zero;
    double delta = 0.5;
    double coeff = 1.0;

    static RemainderModel zero() { return {}; }
    static RemainderModel power(double delta, double coeff) { return {Kind::power, delta, coeff}; }
    bool is_zero() const { return kind == Kind::zero || coeff == 0.0; }
};

/// Time change s(t) = int_1^t c, c(t) = t^p + o(t^p), and its block-level
/// rescalings s_n(t) on [1, L].
struct TimeChange {
    double p = 1.0;
    RemainderModel remainder;

    void validate() const {
        if (!(p > 0.0) || !std::isfinite(p))
            throw ConfigError("time: growth exponent p must be positive, got " + std::to_string(p));
        if (remainder.kind == RemainderModel::Kind::power) {
            if (!(remainder.delta > 0.0) || !(remainder.delta < p + 1.0))
                throw ConfigError("time: power remainder needs delta in (0, p+1), got " +
                                  std::to_string(remainder.delta));
            if (remainder.coeff < 0.0)
                throw ConfigError("time: negative remainder coefficients are not supported");
        }
    }

    double remainder_exponent() const { return p + 1.0 - remainder.delta; }

    /// r(t).
    double r(double t) const {
        if (remainder.is_zero()) return 0.0;
        const double e = remainder_exponent();
        return remainder.coeff * std::expm1(e * std::log(t)) / e;
    }

    /// r(L^n) L^{-n(p+1)}, evaluated without forming L^n.
    double scaled_r(int n, double L) const {
        if (remainder.is_zero() || n == 0) return 0.0;
        const double lnL = std::log(L);
        const double e = remainder_exponent();
        return remainder.coeff / e *
               (std::exp(-n * remainder.delta * lnL) - std::exp(-n * (p + 1.0) * lnL));
    }

    /// r_n(t) = [r(L^n t) - r(L^n)] L^{-n(p+1)} = coeff/e L^{-n delta} (t^e - 1).
    double r_n(int n, double L, double t) const {
        if (remainder.is_zero()) return 0.0;
        const double e = remainder_exponent();
        return remainder.coeff / e * std::exp(-n * remainder.delta * std::log(L)) *
               std::expm1(e * std::log(t));
    }

    double s(double t) const {
        if (!(t >= 1.0)) throw DomainError("s: requires t >= 1, got " + std::to_string(t));
        return std::expm1((p + 1.0) * std::log(t)) / (p + 1.0) + r(t);
    }

    double s_n(int n, double L, double t) const {
        if (n < 0) throw DomainError("s_n: step index must be nonnegative");
        if (!(L > 1.0)) throw DomainError("s_n: block scale must exceed 1");
        if (!(t >= 1.0) || !(t <= L))
            throw DomainError("s_n: t = " + std::to_string(t) + " outside [1, L]");
        return std::expm1((p + 1.0) * std::log(t)) / (p + 1.0) + r_n(n, L, t);
    }
};

struct M3Row {
    int n = 0;
    double integral_lhs = 0.0;   ///< L^{-n(p+1)} int_1^{L^n} |o(t^p)| dt
    double remainder_lhs = 0.0;  ///< |r(L^n)| / L^{n(p+1)}
    double bound = 0.0;          ///< n^{-(p+1)/d}
    bool pass = false;
};

struct M3Report {
    std::vector<M3Row> rows;
    /// Smallest n from which both inequalities hold up to n_max.
    std::optional<int> first_passing;
    bool all_pass() const {
        for (const auto& r : rows)
            if (!r.pass) return false;
        return true;
    }
};

/// Evaluates the growth condition on the remainder for n in [2, n_max].
/// Failures are reported, not thrown.
inline M3Report check_M3(const TimeChange& tc, double L, int n_max, double d) {
    if (!(L > 1.0)) throw DomainError("check_M3: block scale must exceed 1");
    if (n_max < 2) throw DomainError("check_M3: n_max must be at least 2");
    M3Report rep;
    for (int n = 2; n <= n_max; ++n) {
        M3Row row;
        row.n = n;
        row.bound = std::pow(static_cast<double>(n), -(tc.p + 1.0) / d);
        if (!tc.remainder.is_zero()) {
            // |o(t^p)| = coeff t^{p-delta} integrates to the same closed form as r(L^n).
            row.integral_lhs = std::abs(tc.scaled_r(n, L));
            row.remainder_lhs = std::abs(tc.scaled_r(n, L));
        }
        row.pass = row.integral_lhs <= row.bound && row.remainder_lhs <= row.bound;
        rep.rows.push_back(row);
    }
    for (std::size_t i = rep.rows.size(); i-- > 0;) {
        if (!rep.rows[i].pass) break;
        rep.first_passing = rep.rows[i].n;
    }
    return rep;
}

struct BracketReport {
    double lower = 0.0;  ///< 1/(6(p+1))
    double upper = 0.0;  ///< 3/(2(p+1))
    std::vector<double> ratios;  ///< s_n(L)/L^{p+1}, n = 0..n_max
    bool pass = true;
};

/// Numerical stand-in for the large-L requirement: s_n(L)/L^{p+1} must stay
/// inside (1/(6(p+1)), 3/(2(p+1))) for every n.
inline BracketReport check_sn_bracket(const TimeChange& tc, double L, int n_max) {
    if (!(L > 1.0)) throw DomainError("check_sn_bracket: block scale must exceed 1");
    BracketReport rep;
    rep.lower = 1.0 / (6.0 * (tc.p + 1.0));
    rep.upper = 3.0 / (2.0 * (tc.p + 1.0));
    const double Lp = std::pow(L, tc.p + 1.0);
    for (int n = 0; n <= n_max; ++n) {
        const double ratio = tc.s_n(n, L, L) / Lp;
        rep.ratios.push_back(ratio);
        if (!(ratio > rep.lower && ratio < rep.upper)) rep.pass = false;
    }
    return rep;
}

}  // namespace rgflow
