#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rgflow/detail/fft.hpp"
#include "rgflow/error.hpp"
#include "rgflow/kernel.hpp"

namespace rgflow {

using cplx = std::complex<double>;

/// Uniform physical grid on [-x_max, x_max) and its conjugate frequency grid.
///
/// Frequencies are stored in natural order, w_i = (i - N/2) dw with
/// dw = pi/x_max, so w = 0 is the node N/2 and w_max = pi N / (2 x_max).
/// Fourier convention: f^(w) = int f(x) e^{-iwx} dx, inverse with 1/(2 pi).
struct GridSpec {
    std::size_t n_points = 4096;
    double x_max = 40.0;
    double tail_tol = 1e-10;  ///< tail smallness threshold for the resolution flag
    int pad_factor = 0;       ///< 0 selects ceil((k+1)/2) for a k-th power

    void validate() const {
        const std::size_t n = n_points;
        if (n < 256 || (n & (n - 1)) != 0)
            throw ConfigError("grid: n_points must be a power of two >= 256, got " + std::to_string(n));
        if (!(x_max > 0.0)) throw ConfigError("grid: x_max must be positive");
        if (!(tail_tol > 0.0)) throw ConfigError("grid: tail_tol must be positive");
        if (pad_factor < 0) throw ConfigError("grid: pad_factor must be >= 0");
    }

    std::size_t size() const { return n_points; }
    std::size_t zero_index() const { return n_points / 2; }
    double dx() const { return 2.0 * x_max / static_cast<double>(n_points); }
    double domega() const { return std::numbers::pi / x_max; }
    double omega_max() const { return std::numbers::pi * static_cast<double>(n_points) / (2.0 * x_max); }
    double omega(std::size_t i) const {
        return (static_cast<double>(i) - static_cast<double>(n_points / 2)) * domega();
    }
    double x(std::size_t j) const { return -x_max + static_cast<double>(j) * dx(); }

    std::vector<double> omegas() const {
        std::vector<double> w(n_points);
        for (std::size_t i = 0; i < n_points; ++i) w[i] = omega(i);
        return w;
    }

    bool same_points(const GridSpec& o) const {
        return n_points == o.n_points && std::abs(x_max - o.x_max) <= 1e-12 * x_max;
    }
};

/// A function of x held as samples of f^ on the frequency grid.
class SpectralFunction {
public:
    /// Zero function on the default grid.
    SpectralFunction() : SpectralFunction(GridSpec{}) {}
    explicit SpectralFunction(const GridSpec& grid) : grid_(grid), fhat_(grid.n_points) {}

    SpectralFunction(const GridSpec& grid, std::vector<cplx> fhat) : grid_(grid), fhat_(std::move(fhat)) {
        if (fhat_.size() != grid_.n_points) throw DomainError("SpectralFunction: sample count does not match grid");
    }

    /// Samples a closed-form transform w -> f^(w).
    template <class Fn>
    static SpectralFunction from_fourier(const GridSpec& grid, Fn&& fn) {
        SpectralFunction f(grid);
        for (std::size_t i = 0; i < grid.n_points; ++i) f.fhat_[i] = cplx(fn(grid.omega(i)));
        return f;
    }

    static SpectralFunction zero(const GridSpec& grid) { return SpectralFunction(grid); }

    /// Transform of physical samples f(x_j) on the grid's own points.
    static SpectralFunction from_physical(const GridSpec& grid, std::span<const cplx> samples);

    const GridSpec& grid() const { return grid_; }
    std::size_t size() const { return fhat_.size(); }
    const std::vector<cplx>& fhat() const { return fhat_; }
    std::vector<cplx>& fhat_mut() { return fhat_; }
    const cplx& operator[](std::size_t i) const { return fhat_[i]; }
    cplx& operator[](std::size_t i) { return fhat_[i]; }

    /// Physical samples f(x_j), j = 0..N-1.
    std::vector<cplx> physical() const;

    SpectralFunction& operator+=(const SpectralFunction& o) {
        check_same_grid(o);
        for (std::size_t i = 0; i < fhat_.size(); ++i) fhat_[i] += o.fhat_[i];
        return *this;
    }
    SpectralFunction& operator-=(const SpectralFunction& o) {
        check_same_grid(o);
        for (std::size_t i = 0; i < fhat_.size(); ++i) fhat_[i] -= o.fhat_[i];
        return *this;
    }
    SpectralFunction& operator*=(cplx c) {
        for (auto& v : fhat_) v *= c;
        return *this;
    }
    /// this += c * o
    SpectralFunction& axpy(cplx c, const SpectralFunction& o) {
        check_same_grid(o);
        for (std::size_t i = 0; i < fhat_.size(); ++i) fhat_[i] += c * o.fhat_[i];
        return *this;
    }

    friend SpectralFunction operator+(SpectralFunction a, const SpectralFunction& b) { return a += b; }
    friend SpectralFunction operator-(SpectralFunction a, const SpectralFunction& b) { return a -= b; }
    friend SpectralFunction operator*(cplx c, SpectralFunction a) { return a *= c; }
    friend SpectralFunction operator*(double c, SpectralFunction a) { return a *= cplx(c); }
    friend SpectralFunction operator*(SpectralFunction a, double c) { return a *= cplx(c); }

private:
    void check_same_grid(const SpectralFunction& o) const {
        if (!grid_.same_points(o.grid_)) throw DomainError("SpectralFunction: grids differ");
    }

    GridSpec grid_;
    std::vector<cplx> fhat_;
};

namespace detail {

inline double parity_sign(long k) { return (k % 2 == 0) ? 1.0 : -1.0; }

/// Physical samples on m >= N points of [-x_max, x_max) from N modes
/// (zero padding above the stored band).
inline std::vector<cplx> to_physical(const SpectralFunction& f, std::size_t m) {
    const GridSpec& g = f.grid();
    const std::size_t n = g.n_points;
    const long half = static_cast<long>(n / 2);
    const long mm = static_cast<long>(m);
    std::vector<cplx> buf(m, cplx(0.0));
    for (std::size_t i = 0; i < n; ++i) {
        const long k = static_cast<long>(i) - half;
        buf[static_cast<std::size_t>(((k % mm) + mm) % mm)] = f[i] * parity_sign(k);
    }
    backward_fft(buf);
    const double scale = g.domega() / (2.0 * std::numbers::pi);
    for (auto& v : buf) v *= scale;
    return buf;
}

/// Keeps the N grid modes of the transform of m physical samples.
inline std::vector<cplx> from_physical(const GridSpec& g, std::vector<cplx> samples) {
    const std::size_t n = g.n_points;
    const std::size_t m = samples.size();
    const long half = static_cast<long>(n / 2);
    const long mm = static_cast<long>(m);
    forward_fft(samples);
    const double dxm = 2.0 * g.x_max / static_cast<double>(m);
    std::vector<cplx> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const long k = static_cast<long>(i) - half;
        out[i] = dxm * parity_sign(k) * samples[static_cast<std::size_t>(((k % mm) + mm) % mm)];
    }
    return out;
}

}  // namespace detail

inline SpectralFunction SpectralFunction::from_physical(const GridSpec& grid, std::span<const cplx> samples) {
    if (samples.size() != grid.n_points) throw DomainError("from_physical: sample count does not match grid");
    return SpectralFunction(grid, detail::from_physical(grid, std::vector<cplx>(samples.begin(), samples.end())));
}

inline std::vector<cplx> SpectralFunction::physical() const { return detail::to_physical(*this, grid_.n_points); }

/// w = 0 sample of f^ (a grid node; equals int f dx).
inline cplx eval_at_zero(const SpectralFunction& f) { return f[f.grid().zero_index()]; }

/// Largest |f^(w)| over the two outermost octaves, |w| >= w_max/4.
inline double tail_magnitude(const SpectralFunction& f) {
    const GridSpec& g = f.grid();
    const double cut = g.omega_max() / 4.0;
    double worst = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (std::abs(g.omega(i)) >= cut) worst = std::max(worst, std::abs(f[i]));
    return worst;
}

inline bool is_resolved(const SpectralFunction& f) { return tail_magnitude(f) <= f.grid().tail_tol; }

/// Grid max norm of f^ - g^.
inline double max_abs_diff(const SpectralFunction& a, const SpectralFunction& b) {
    if (!a.grid().same_points(b.grid())) throw DomainError("max_abs_diff: grids differ");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

inline double max_abs(const SpectralFunction& a) {
    double worst = 0.0;
    for (const auto& v : a.fhat()) worst = std::max(worst, std::abs(v));
    return worst;
}

/// Max |Im f(x_j)| of the physical samples; zero for real functions.
inline double max_imag_physical(const SpectralFunction& f) {
    double worst = 0.0;
    for (const auto& v : f.physical()) worst = std::max(worst, std::abs(v.imag()));
    return worst;
}

/// f^'(w), computed as the transform of -i x f(x).
inline SpectralFunction fhat_derivative(const SpectralFunction& f) {
    const GridSpec& g = f.grid();
    auto phys = f.physical();
    for (std::size_t j = 0; j < phys.size(); ++j) phys[j] *= cplx(0.0, -g.x(j));
    return SpectralFunction(g, detail::from_physical(g, std::move(phys)));
}

struct NormResult {
    double value = 0.0;
    bool under_resolved = false;
};

/// Grid supremum of (1 + |w|^q)(|f^(w)| + |f^'(w)|), with the resolution flag.
inline NormResult bq_norm_checked(const SpectralFunction& f, int q) {
    const GridSpec& g = f.grid();
    const SpectralFunction d = fhat_derivative(f);
    NormResult r;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double w = std::abs(g.omega(i));
        const double weight = 1.0 + std::pow(w, q);
        r.value = std::max(r.value, weight * (std::abs(f[i]) + std::abs(d[i])));
    }
    r.under_resolved = !is_resolved(f);
    return r;
}

inline double bq_norm(const SpectralFunction& f, int q) { return bq_norm_checked(f, q).value; }

/// Number of padded physical points used for a product of degree k.
inline std::size_t padded_size(const GridSpec& g, int degree) {
    const int factor = g.pad_factor > 0 ? g.pad_factor : (degree + 2) / 2;
    return g.n_points * static_cast<std::size_t>(std::max(factor, 1));
}

/// Evaluates sum_k c_k u^k pointwise in physical space on a zero-padded grid
/// and keeps the grid band. Terms are (power, coefficient) pairs.
inline SpectralFunction pointwise_polynomial(const SpectralFunction& u,
                                             std::span<const std::pair<int, double>> terms) {
    int degree = 1;
    for (const auto& [k, c] : terms) {
        if (k < 1) throw DomainError("pointwise_polynomial: powers must be >= 1");
        degree = std::max(degree, k);
    }
    const GridSpec& g = u.grid();
    std::vector<std::pair<int, double>> sorted(terms.begin(), terms.end());
    std::sort(sorted.begin(), sorted.end());
    auto phys = detail::to_physical(u, padded_size(g, degree));
    for (auto& v : phys) {
        cplx acc(0.0);
        cplx pw(1.0);
        int have = 0;
        for (const auto& [k, c] : sorted) {
            while (have < k) {
                pw *= v;
                ++have;
            }
            acc += c * pw;
        }
        v = acc;
    }
    return SpectralFunction(g, detail::from_physical(g, std::move(phys)));
}

inline SpectralFunction pointwise_power(const SpectralFunction& u, int k) {
    if (k < 2) throw DomainError("pointwise_power: exponent must be >= 2");
    const std::pair<int, double> term{k, 1.0};
    return pointwise_polynomial(u, std::span(&term, 1));
}

/// f^ -> G^(w,t) f^ sample-wise; t = 0 is the identity.
inline SpectralFunction apply_multiplier(const SpectralFunction& f, const ScalingKernel& kernel, double t) {
    if (!(t >= 0.0)) throw DomainError("apply_multiplier: time must be nonnegative");
    SpectralFunction out = f;
    if (t == 0.0) return out;
    const GridSpec& g = f.grid();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= kernel.multiplier(g.omega(i), t);
    return out;
}

/// Samples of G^(w, t) on the grid.
inline std::vector<double> multiplier_samples(const GridSpec& g, const ScalingKernel& kernel, double t) {
    std::vector<double> m(g.n_points);
    for (std::size_t i = 0; i < g.n_points; ++i) m[i] = kernel.multiplier(g.omega(i), t);
    return m;
}

/// Samples f^(w/a) at the frequencies of `target`, evaluated exactly from the
/// physical samples, dx sum_j f(x_j) e^{-i (w/a) x_j}, with a chirp-z transform.
/// Frequencies with |w/a| beyond the source band are set to zero.
inline SpectralFunction resample(const SpectralFunction& f, const GridSpec& target, double a) {
    if (!(a > 0.0)) throw DomainError("dilate: scale must be positive");
    const GridSpec& src = f.grid();
    const std::size_t ns = src.n_points;
    const std::size_t nt = target.n_points;
    const auto phys = f.physical();

    using ld = long double;
    const ld dx = static_cast<ld>(src.dx());
    const ld x0 = -static_cast<ld>(src.x_max);
    const ld dtheta = static_cast<ld>(target.domega()) / static_cast<ld>(a);
    const ld theta0 = -static_cast<ld>(nt / 2) * dtheta;
    const ld beta = dtheta * dx;
    auto cis = [](ld phase) { return cplx(static_cast<double>(std::cos(phase)), static_cast<double>(std::sin(phase))); };

    std::size_t p = 1;
    while (p < ns + nt - 1) p <<= 1;

    std::vector<cplx> av(p, cplx(0.0));
    for (std::size_t j = 0; j < ns; ++j) {
        const ld jj = static_cast<ld>(j);
        av[j] = phys[j] * cis(-(theta0 * jj * dx + beta * jj * jj / 2));
    }
    std::vector<cplx> bv(p, cplx(0.0));
    for (long m = -static_cast<long>(ns - 1); m <= static_cast<long>(nt - 1); ++m) {
        const ld mm = static_cast<ld>(m);
        bv[static_cast<std::size_t>((m + static_cast<long>(p)) % static_cast<long>(p))] = cis(beta * mm * mm / 2);
    }
    detail::forward_fft(av);
    detail::forward_fft(bv);
    for (std::size_t i = 0; i < p; ++i) av[i] *= bv[i];
    detail::backward_fft(av);

    const double band = src.omega_max() * (1.0 + 1e-12);
    SpectralFunction out(target);
    for (std::size_t i = 0; i < nt; ++i) {
        const ld ii = static_cast<ld>(i);
        const double theta = static_cast<double>(theta0 + ii * dtheta);
        if (std::abs(theta) > band) continue;
        const cplx pre = cis(-(theta0 * x0 + ii * dtheta * x0 + beta * ii * ii / 2));
        out[i] = static_cast<double>(dx) / static_cast<double>(p) * pre * av[i];
    }
    return out;
}

/// Rescaled function with f^_new(w) = f^(w/a), i.e. f_new(x) = a f(a x).
inline SpectralFunction dilate(const SpectralFunction& f, double a) { return resample(f, f.grid(), a); }

/// True if samples pushed off the grid by dilate(f, a) exceed the tail tolerance.
inline bool dilation_loses_tail(const SpectralFunction& f, double a) {
    const GridSpec& g = f.grid();
    const double cut = std::min(g.omega_max() / a, g.omega_max()) * (1.0 - 1e-12);
    for (std::size_t i = 0; i < f.size(); ++i)
        if (std::abs(g.omega(i)) >= cut && std::abs(f[i]) > g.tail_tol) return true;
    return false;
}

/// f_p*, the function with transform G^(w, 1/(p+1)).
inline SpectralFunction f_p_star(const ScalingKernel& kernel, double p, const GridSpec& grid) {
    if (!(p > 0.0)) throw DomainError("f_p_star: p must be positive");
    const double t = 1.0 / (p + 1.0);
    return SpectralFunction::from_fourier(grid, [&](double w) { return kernel.multiplier(w, t); });
}

/// CSV dump with columns omega,re_fhat,im_fhat.
inline void write_csv(const SpectralFunction& f, std::ostream& os) {
    os << "omega,re_fhat,im_fhat\n";
    char line[128];
    for (std::size_t i = 0; i < f.size(); ++i) {
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", f.grid().omega(i), f[i].real(), f[i].imag());
        os << line;
    }
}

/// Reads a CSV written by write_csv; the grid is reconstructed from the
/// omega column (N rows, spacing dw => x_max = pi/dw).
inline SpectralFunction read_csv(std::istream& is, double tail_tol = 1e-10) {
    std::string line;
    if (!std::getline(is, line)) throw DomainError("read_csv: empty input");
    std::vector<double> omegas;
    std::vector<cplx> values;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double w, re, im;
        if (!(ls >> w >> re >> im)) throw DomainError("read_csv: malformed row '" + line + "'");
        omegas.push_back(w);
        values.emplace_back(re, im);
    }
    if (omegas.size() < 2) throw DomainError("read_csv: need at least two rows");
    GridSpec g;
    g.n_points = omegas.size();
    g.x_max = std::numbers::pi * static_cast<double>(g.n_points) / (2.0 * std::abs(omegas.front()));
    g.tail_tol = tail_tol;
    g.validate();
    for (std::size_t i = 0; i < omegas.size(); ++i)
        if (std::abs(omegas[i] - g.omega(i)) > 1e-9 * (1.0 + std::abs(omegas[i])))
            throw DomainError("read_csv: omega column is not a symmetric uniform grid");
    return SpectralFunction(g, std::move(values));
}

}  // namespace rgflow
