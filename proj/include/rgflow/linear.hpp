#pragma once

#include <cmath>

#include "rgflow/error.hpp"
#include "rgflow/funcspace.hpp"
#include "rgflow/kernel.hpp"
#include "rgflow/timechange.hpp"

namespace rgflow {

/// h_n = R0_{L^n} f_p*, from its closed form G^(w, 1/(p+1) + r(L^n) L^{-n(p+1)}).
inline SpectralFunction h_n(const ScalingKernel& kernel, const TimeChange& tc, int n, double L, const GridSpec& grid) {
    if (n < 0) throw DomainError("h_n: n must be nonnegative");
    const double t = 1.0 / (tc.p + 1.0) + tc.scaled_r(n, L);
    if (!(t > 0.0)) throw DomainError("h_n: nonpositive time argument " + std::to_string(t));
    return SpectralFunction::from_fourier(grid, [&](double w) { return kernel.multiplier(w, t); });
}

/// R0_{L,n} f: linear evolution to the block end, then rescaling by L^{(p+1)/d}.
/// Evaluated as G^(w/a, s_n(L)) f^(w/a) so only f itself is resampled; the evolved
/// function is wider in x and would need a larger box for the same accuracy.
/// Throws TailTooLarge when the dilation pushes resolved content off the grid.
inline SpectralFunction linear_rg_step(const SpectralFunction& f, const ScalingKernel& kernel, const TimeChange& tc,
                                       int n, double L) {
    const double s = tc.s_n(n, L, L);
    const double a = std::pow(L, (tc.p + 1.0) / kernel.d);
    if (dilation_loses_tail(apply_multiplier(f, kernel, s), a))
        throw TailTooLarge("linear_rg_step: dilation pushes the tail off the grid");
    auto out = dilate(f, a);
    const GridSpec& g = out.grid();
    for (std::size_t i = 0; i < g.n_points; ++i) out[i] *= kernel.multiplier(g.omega(i) / a, s);
    return out;
}

}  // namespace rgflow
