#include <gtest/gtest.h>

#include <cmath>

#include "rgflow/flow.hpp"

using namespace rgflow;

namespace {

const ScalingKernel heat{2.0, 1.0, 2};
const TimeChange linear_time{1.0, RemainderModel::zero()};
const TimeChange power_time{1.0, RemainderModel::power(0.5, 1.0)};

FlowConfig canonical() { return FlowConfig{}; }

const FlowTrace& canonical_trace() {
    static const FlowTrace t = run_flow(canonical());
    return t;
}

}  // namespace

TEST(LinearStep, FixedPoint) {
    const GridSpec g;
    const auto f = f_p_star(heat, 1.0, g);
    EXPECT_LE(bq_norm(linear_rg_step(f, heat, linear_time, 0, 2.0) - f, 2), 1e-8);
    EXPECT_LE(max_abs_diff(linear_rg_step(f, heat, linear_time, 5, 4.0), f), 1e-8);
    const ScalingKernel quartic{4.0, 1.0, 2};
    const auto f4 = f_p_star(quartic, 1.0, g);
    EXPECT_LE(bq_norm(linear_rg_step(f4, quartic, linear_time, 0, 2.0) - f4, 2), 1e-8);
}

TEST(LinearStep, ZeroModeAndContraction) {
    const GridSpec g;
    const auto bump = SpectralFunction::from_fourier(g, [](double w) { return w * std::exp(-w * w); });
    const auto out = linear_rg_step(bump, heat, linear_time, 0, 2.0);
    EXPECT_LT(std::abs(eval_at_zero(out)), 1e-16);
    const double ratio = bq_norm(out, 2) / bq_norm(bump, 2);
    EXPECT_LT(ratio, 1.0);
    EXPECT_NEAR(ratio, 0.7537, 1e-4);  // pinned regression value
}

TEST(LinearStep, ClosedFormReferenceDirection) {
    const GridSpec g;
    const auto fs = f_p_star(heat, 1.0, g);
    for (int n : {0, 3, 9}) EXPECT_EQ(max_abs_diff(h_n(heat, linear_time, n, 2.0, g), fs), 0.0);
    EXPECT_NEAR(0.5 + power_time.scaled_r(10, 2.0), 0.520832, 1e-6);
    double prev = 1e300;
    for (int n = 1; n <= 14; ++n) {
        const auto h = h_n(heat, power_time, n, 2.0, g);
        const double dist = bq_norm(h - fs, 2);
        EXPECT_LT(dist, prev) << n;
        prev = dist;
        // R0_{L,n-1} h_{n-1} = h_n
        EXPECT_LT(max_abs_diff(linear_rg_step(h_n(heat, power_time, n - 1, 2.0, g), heat, power_time, n - 1, 2.0), h),
                  1e-13);
    }
    EXPECT_THROW(h_n(heat, power_time, -1, 2.0, g), DomainError);
}

TEST(FlowConfig, Validation) {
    EXPECT_NO_THROW(canonical().validate());
    auto c = canonical();
    c.nonlinearity.lambda = 0.1;
    try {
        c.validate();
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("|lambda| < mu"), std::string::npos);
    }
    c = canonical();
    c.g0.eps = 1.0;
    try {
        c.validate();
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("(M2)"), std::string::npos);
    }
    c = canonical();
    c.kernel.d = 3.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = canonical();
    c.L = 1.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = canonical();
    c.nonlinearity = {0.0, 0.0, 2, {{3, 1.0}}};
    EXPECT_NO_THROW(c.validate());
}

TEST(FlowConfig, InitialRemainders) {
    const GridSpec g;
    for (auto k : {InitialRemainder::Kind::zero, InitialRemainder::Kind::odd_bump, InitialRemainder::Kind::even_bump}) {
        const auto g0 = InitialRemainder{k, 1e-3}.build(g);
        EXPECT_EQ(std::abs(eval_at_zero(g0)), 0.0);
        EXPECT_LT(max_imag_physical(g0), 1e-15);
    }
    EXPECT_LT(bq_norm(InitialRemainder{}.build(g), 2), 0.05 * 0.05);
}

TEST(RgStep, LinearFlowIsStationary) {
    auto c = canonical();
    c.nonlinearity = {0.0, 0.0, 2, {{3, 1.0}}};
    c.g0.kind = InitialRemainder::Kind::zero;
    c.n_steps = 4;
    const auto t = run_flow(c);
    ASSERT_EQ(t.rows.size(), 5u);
    for (const auto& row : t.rows) {
        EXPECT_NEAR(row.A, 0.05, 1e-15);
        EXPECT_LT(row.g_norm, 1e-12);
    }
    EXPECT_LT(max_abs_diff(t.f.back(), 0.05 * f_p_star(heat, 1.0, c.grid)), 1e-12);
    EXPECT_TRUE(std::isnan(t.rows.back().theorem_error));
}

TEST(RgStep, DecompositionWithRemainderModel) {
    auto c = canonical();
    c.time = power_time;
    c.g0.kind = InitialRemainder::Kind::odd_bump;
    FlowState s{0, {}, c.A0, c.g0.build(c.grid)};
    s.f = f_p_star(heat, 1.0, c.grid) * c.A0 + s.g;
    for (int n = 0; n < 3; ++n) {
        StepDiagnostics d;
        s = rg_step(s, c, &d);
        EXPECT_LT(d.decomposition, 1e-9);
        EXPECT_LT(d.g_hat0, 1e-10);
        EXPECT_LT(d.nu_hat0, 0.0);
    }
    FlowState broken = s;
    broken.A *= 1.01;
    EXPECT_THROW(rg_step(broken, c), DecompositionDrift);
}

TEST(RunFlow, CanonicalMonotonicity) {
    const auto& t = canonical_trace();
    ASSERT_TRUE(t.complete);
    ASSERT_EQ(t.rows.size(), 13u);
    for (std::size_t n = 0; n < t.rows.size(); ++n) {
        const auto& row = t.rows[n];
        EXPECT_GT(row.A, 0.0);
        if (n + 1 < t.rows.size()) {
            EXPECT_LT(t.rows[n + 1].A, row.A);
            EXPECT_LT(row.nu_hat0, 0.0);
            EXPECT_LE(row.picard_iters, 8);
        }
        EXPECT_LT(row.g_norm, row.A * row.A);
        EXPECT_LT(row.g_hat0, 1e-10);
        EXPECT_LT(row.decomposition, 1e-9);
    }
}

TEST(RunFlow, RenormalizationLemmaResidual) {
    const auto& t = canonical_trace();
    for (std::size_t n = 0; n + 1 < t.rows.size(); ++n) {
        const auto& row = t.rows[n];
        const double lhs = std::abs(t.rows[n + 1].A - row.A + 0.05 * row.beta_n * row.A * row.A);
        EXPECT_LE(lhs, row.w_norm) << n;
        EXPECT_NEAR(row.beta_n, std::log(2.0) / (2 * std::sqrt(std::numbers::pi)), 2e-4);
    }
    // ||w_n||/A_n^2 decreases except for one rise at n = 2 -> 3, where the decaying
    // even bump crosses the remainder sourced by the nonlinearity (m-independent)
    auto ratio = [&](std::size_t n) { return t.rows[n].w_norm / (t.rows[n].A * t.rows[n].A); };
    for (std::size_t n = 1; n + 1 < t.rows.size(); ++n) {
        if (n == 3)
            EXPECT_GT(ratio(n), ratio(n - 1));
        else
            EXPECT_LT(ratio(n), ratio(n - 1)) << n;
    }
}

TEST(RunFlow, CouplingDependenceIsFirstOrder) {
    auto c = canonical();
    c.n_steps = 4;
    std::vector<FlowTrace> runs;
    for (double lambda : {0.0, 0.01, 0.005}) {
        c.nonlinearity.lambda = lambda;
        runs.push_back(run_flow(c));
    }
    for (std::size_t n = 1; n < runs[0].rows.size(); ++n) {
        const double full = runs[1].rows[n].A - runs[0].rows[n].A;
        const double half = runs[2].rows[n].A - runs[0].rows[n].A;
        EXPECT_NEAR(full / half, 2.0, 0.02) << n;
        EXPECT_LT(runs[0].rows[n].A, runs[0].rows[n - 1].A);
    }
}

TEST(RunFlow, AbortKeepsPartialTrace) {
    auto c = canonical();
    c.solver.picard_max = 1;
    try {
        run_flow(c);
        FAIL();
    } catch (const FlowAborted& e) {
        EXPECT_FALSE(e.partial().complete);
        EXPECT_EQ(e.partial().rows.size(), 1u);
        EXPECT_FALSE(e.partial().failure.empty());
    }
}
