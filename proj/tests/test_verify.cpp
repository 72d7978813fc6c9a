#include <gtest/gtest.h>

#include <cmath>

#include "rgflow/verify.hpp"

using namespace rgflow;

namespace {

const ScalingKernel heat{2.0, 1.0, 2};
const TimeChange linear_time{1.0, RemainderModel::zero()};
const TimeChange power_time{1.0, RemainderModel::power(0.5, 1.0)};

const FlowTrace& long_trace() {
    static const FlowTrace t = [] {
        FlowConfig c;
        c.n_steps = 20;
        return run_flow(c);
    }();
    return t;
}

double find(const CheckResult& r, const std::string& key) {
    for (const auto& m : r.measured)
        if (m.name == key) return m.value;
    ADD_FAILURE() << "missing measurement " << key;
    return NAN;
}

}  // namespace

TEST(Verify, KernelIdentities) {
    const auto r = check_kernel_identities();
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.measured.size(), 4u);
}

TEST(Verify, FixedPoint) {
    const GridSpec g;
    EXPECT_TRUE(check_fixed_point(heat, 1.0, 2.0, g).pass);
    EXPECT_TRUE(check_fixed_point(ScalingKernel{4.0, 1.0, 2}, 1.0, 2.0, g).pass);
    GridSpec coarse;
    coarse.n_points = 256;
    const auto bad = check_fixed_point(heat, 1.0, 2.0, coarse);
    EXPECT_FALSE(bad.pass);
    EXPECT_EQ(find(bad, "resolved"), 0.0);
}

TEST(Verify, FixedPointWithRemainderTracksEnvelope) {
    double c = 0.0;
    bool bounded = false;
    const auto rows = remainder_fixed_point(heat, power_time, 2.0, GridSpec{}, 2, 12, &c, &bounded);
    EXPECT_TRUE(bounded);
    EXPECT_GT(c, 0.0);
    EXPECT_LT(rows.back().residual, rows.front().residual);
}

TEST(Verify, Contraction) {
    const GridSpec g;
    const auto spec_sample = contraction_samples(g, 1, 0);
    const auto rep = contraction_check(heat, linear_time, {2.0, 4.0, 8.0}, spec_sample);
    EXPECT_TRUE(rep.decreasing_in_L);
    EXPECT_TRUE(rep.pass());
    EXPECT_NEAR(rep.rows[0].ratio, 0.7537, 1e-4);
    const auto seeded = contraction_check(heat, linear_time, {2.0, 4.0, 8.0}, contraction_samples(g, 7));
    EXPECT_TRUE(seeded.pass());
    // with r != 0 the n = 0 step also evolves through r(L), which contracts L = 2 more
    const auto power = check_contraction(heat, power_time, g, 3);
    EXPECT_FALSE(power.pass);
    EXPECT_NEAR(find(power, "variation"), 0.350, 1e-3);
    EXPECT_THROW(contraction_check(heat, linear_time, {2.0}, {f_p_star(heat, 1.0, g)}), DomainError);
    // the seed selects the samples deterministically
    EXPECT_EQ(max_abs_diff(contraction_samples(g, 9)[2], contraction_samples(g, 9)[2]), 0.0);
    EXPECT_GT(max_abs_diff(contraction_samples(g, 9)[2], contraction_samples(g, 10)[2]), 0.0);
}

TEST(Verify, Constants) {
    const GridSpec g;
    EXPECT_TRUE(check_R(heat, 2, g).pass);
    EXPECT_TRUE(check_R(ScalingKernel{4.0, 1.0, 2}, 3, g).pass);
    EXPECT_TRUE(check_beta_identities(heat, linear_time, 2.0, 2, g).pass);
    const auto conv = check_beta_convergence(heat, power_time, 2.0, 2, g);
    EXPECT_TRUE(conv.pass);
}

TEST(Verify, TheoremErrorAtTarget) {
    const GridSpec g;
    const double A = 70.9;
    for (int n : {2, 7}) {
        const auto f = f_p_star(heat, 1.0, g) * (A / (n * std::log(2.0)));
        EXPECT_LT(theorem_error(f, n, 2.0, A, heat, 1.0), 1e-10);  // round-off in the (1+w^2) weight
    }
    EXPECT_THROW(theorem_error(f_p_star(heat, 1.0, g), 1, 2.0, A, heat, 1.0), DomainError);
}

TEST(Verify, FlowChecksOnCanonicalRun) {
    const auto& t = long_trace();
    const double beta = beta_limit(t.R, 1.0, 2.0, 2.0);
    EXPECT_TRUE(check_flow_monotonicity(t).pass);
    const auto inc = check_increment_law(t, 0.05, 2, beta);
    EXPECT_TRUE(inc.pass);
    EXPECT_LT(find(inc, "final_relative"), 1e-3);
    EXPECT_TRUE(check_theorem_trend(t).pass);
    // strict monotonicity of ||w_n||/A_n^2 fails once, at the g0 transient
    const auto lem = check_lemma_residual(t, 0.05, 2);
    EXPECT_FALSE(lem.pass);
    EXPECT_LE(find(lem, "max_lhs_over_w"), 1.0);
    EXPECT_EQ(find(lem, "first_rise_at_n"), 3.0);
}

TEST(Verify, TheoremTrendForSeveralCouplings) {
    for (double mu : {0.05, 0.08}) {
        FlowConfig c;
        c.nonlinearity.mu = mu;
        c.n_steps = 8;
        const auto t = run_flow(c);
        EXPECT_TRUE(check_theorem_trend(t).pass) << mu;
        EXPECT_NEAR(t.A_prefactor * mu, 2 * std::sqrt(std::numbers::pi), 1e-9);
    }
}

TEST(Verify, DirectIntegrationLinearClosedForm) {
    FlowConfig c;
    c.nonlinearity = {0.0, 0.0, 2, {{3, 1.0}}};
    c.time = power_time;
    const auto d = direct_integrate(c, 4.0, 1);
    ASSERT_EQ(d.at_L.size(), 2u);
    const auto f0 = f_p_star(heat, 1.0, d.grid) * c.A0 + c.g0.build(d.grid);
    for (int k = 1; k <= 2; ++k) {
        const double t = std::pow(2.0, k);
        EXPECT_LT(max_abs_diff(d.at_L[static_cast<std::size_t>(k - 1)], apply_multiplier(f0, heat, power_time.s(t))), 1e-15);
    }
    EXPECT_THROW(direct_integrate(c, 9.0), DomainError);
}

TEST(Verify, DirectIntegrationMatchesFlow) {
    FlowConfig c;
    c.n_steps = 3;
    const auto t = run_flow(c);
    // identical nodes: one block of the direct run is one RG step
    const auto same = direct_integrate(c, 2.0, 1);
    EXPECT_LT(bq_norm(same.rescaled(1, 2.0, 1.0, 2.0, c.grid) - t.f[1], 2), 1e-8);
    const auto r = check_direct_vs_flow(c, t);
    EXPECT_TRUE(r.pass);
    EXPECT_LT(find(r, "diff_n1"), 1e-8);
    EXPECT_LT(find(r, "diff_n3"), 1e-7);
}

TEST(Verify, SuiteFailsOnCoarseGrid) {
    FlowConfig c;
    c.grid.n_points = 256;
    c.n_steps = 2;
    const auto rep = run_suite(c, SuiteOptions{1, 2});
    EXPECT_FALSE(rep.all_pass());
    bool saw = false;
    for (const auto& chk : rep.checks)
        if (chk.name == "fixed_point") {
            saw = true;
            EXPECT_FALSE(chk.pass);
        }
    EXPECT_TRUE(saw);
}
