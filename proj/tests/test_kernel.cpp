#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rgflow/funcspace.hpp"
#include "rgflow/kernel.hpp"

using namespace rgflow;

namespace {

std::vector<double> uniform_omegas(std::size_t n, double w_max) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = -w_max + 2.0 * w_max * static_cast<double>(i) / static_cast<double>(n - 1);
    return w;
}

}  // namespace

TEST(Kernel, GhatValues) {
    const ScalingKernel heat{2.0, 1.0, 2};
    EXPECT_EQ(ghat(heat, 0.0, 5.0), 1.0);
    EXPECT_NEAR(ghat(heat, 1.0, 1.0), std::exp(-1.0), 1e-16);
    EXPECT_NEAR(ghat(heat, 1.0, 0.5), ghat(heat, std::sqrt(0.5), 1.0), 4e-16);
    EXPECT_NEAR(ghat(heat, 1.0, 0.5), std::exp(-0.5), 1e-16);
}

TEST(Kernel, GhatRejectsNonPositiveTime) {
    const ScalingKernel heat;
    EXPECT_THROW(ghat(heat, 1.0, 0.0), DomainError);
    EXPECT_THROW(ghat(heat, 1.0, -1.0), DomainError);
}

TEST(Kernel, SemigroupResidual) {
    const auto grid = uniform_omegas(1024, 10.0);
    EXPECT_LE(semigroup_residual(ScalingKernel{2.0, 1.0, 2}, 2.0, 1.0, grid), 1e-14);
    EXPECT_LE(semigroup_residual(ScalingKernel{4.0, 1.0, 2}, 3.0, 0.5, grid), 1e-14);
    EXPECT_LE(semigroup_residual(ScalingKernel{1.5, 1.0, 2}, 1.1, 0.4, grid), 1e-13);
    EXPECT_THROW(semigroup_residual(ScalingKernel{}, 1.0, 1.0, grid), DomainError);
    EXPECT_THROW(semigroup_residual(ScalingKernel{}, 1.0, 2.0, grid), DomainError);
}

TEST(Kernel, SelfSimilarityAndEvennessOnRandomDraws) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> wdist(-8.0, 8.0), tdist(0.05, 6.0);
    for (double d : {1.0, 1.5, 2.0, 4.0}) {
        const ScalingKernel k{d, 1.0, 2};
        for (int i = 0; i < 200; ++i) {
            const double w = wdist(rng), t = tdist(rng), s = tdist(rng) * 0.5;
            const double lhs = ghat(k, w, t);
            EXPECT_NEAR(lhs, ghat(k, std::pow(t, 1.0 / d) * w, 1.0), 1e-14 + 1e-13 * lhs);
            EXPECT_EQ(ghat(k, -w, t), ghat(k, w, t));
            if (t > s) EXPECT_LE(std::abs(ghat(k, w, t) - ghat(k, w, t - s) * ghat(k, w, s)), 1e-13);
            EXPECT_LE(ghat(k, w, 1.0), 1.0);
        }
    }
}

TEST(Kernel, Constants) {
    const auto grid = uniform_omegas(200001, 8.0);
    auto c2 = kernel_constants(ScalingKernel{2.0, 1.0, 2}, grid);
    EXPECT_DOUBLE_EQ(c2.K, 1.0);
    // sup 2|w| e^{-w^2} = sqrt(2/e), at w = 1/sqrt(2)
    EXPECT_NEAR(c2.K1, 0.8577638849607068, 1e-9);
    auto c1 = kernel_constants(ScalingKernel{1.0, 1.0, 2}, uniform_omegas(200001, 40.0));
    EXPECT_NEAR(c1.K1, 1.0, 1e-12);
}

TEST(Kernel, ConstantsRejectShortGrid) {
    EXPECT_THROW(kernel_constants(ScalingKernel{2.0, 1.0, 2}, uniform_omegas(101, 3.0)), TailTooLarge);
}

TEST(Kernel, ValidateRejectsBadParameters) {
    EXPECT_THROW((ScalingKernel{-1.0, 1.0, 2}.validate()), ConfigError);
    EXPECT_THROW((ScalingKernel{2.0, 0.0, 2}.validate()), ConfigError);
    EXPECT_THROW((ScalingKernel{2.0, 1.0, 1}.validate()), ConfigError);
    EXPECT_NO_THROW((ScalingKernel{2.0, 1.0, 2}.validate()));
}

TEST(Kernel, FpStar) {
    const GridSpec grid;
    const ScalingKernel heat{2.0, 1.0, 2};
    const auto f = f_p_star(heat, 1.0, grid);
    EXPECT_EQ(eval_at_zero(f), cplx(1.0));
    for (std::size_t i = 0; i < grid.size(); i += 97)
        EXPECT_NEAR(f[i].real(), std::exp(-grid.omega(i) * grid.omega(i) / 2.0), 1e-16);
}

TEST(Kernel, FpStarNormMatchesDenseOracle) {
    // d = 4: f^ = e^{-w^4/2}, f^' = -2 w^3 e^{-w^4/2}
    const GridSpec grid;
    const ScalingKernel k4{4.0, 1.0, 2};
    const double norm = bq_norm(f_p_star(k4, 1.0, grid), 2);
    double oracle = 0.0;
    for (int i = 0; i <= 400000; ++i) {
        const double w = 4.0 * i / 400000.0;
        const double e = std::exp(-std::pow(w, 4) / 2.0);
        oracle = std::max(oracle, (1 + w * w) * (e + 2 * w * w * w * e));
    }
    // the grid sup under-estimates the dense sup by at most the grid modulus of continuity
    EXPECT_LE(norm, oracle + 1e-10);
    EXPECT_GT(norm, 0.97 * oracle);
    double grid_oracle = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double w = std::abs(grid.omega(i));
        const double e = std::exp(-std::pow(w, 4) / 2.0);
        grid_oracle = std::max(grid_oracle, (1 + w * w) * (e + 2 * w * w * w * e));
    }
    EXPECT_NEAR(norm, grid_oracle, 1e-12);
}

TEST(Kernel, PhysicalMassIsOne) {
    const GridSpec grid;
    for (double d : {2.0, 4.0}) {
        const ScalingKernel k{d, 1.0, 2};
        for (double t : {0.5, 1.0, 3.0}) {
            const auto g = SpectralFunction::from_fourier(grid, [&](double w) { return k.multiplier(w, t); });
            const auto phys = g.physical();
            double mass = 0.0;
            for (const auto& v : phys) mass += v.real() * grid.dx();
            EXPECT_NEAR(mass, 1.0, 1e-8);
        }
    }
}
