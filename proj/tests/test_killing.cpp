#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace ewlab;

namespace {

HopfJet seed(cplx q, cplx q1, double r) {
    HopfJet j;
    j.q = q;
    j.q1 = q1;
    j.r = r;
    return j;
}

// Real q with xi = 0: stationary genus-1 flow with c = C - lambda/4.
Trajectory genus1_run(double lambda, double C, double q0 = 0.6, double length = 6.0) {
    return integrate_el(seed(q0, 0, 0), {{lambda, 0}, C}, length, 1e-3);
}

// Hopf data q = kappa/4 + i/2, xi = i kappa/8, C = -1/4, real lambda.
Trajectory hopf_run(double lambda, double k0 = 1.2, double length = 6.0) {
    return integrate_el(seed({k0 / 4, 0.5}, 0, k0 / 8), {{lambda, 0}, -0.25}, length, 1e-3);
}

Trajectory generic_run(double length = 6.0) {
    return integrate_el(seed({0.4, 0.2}, {0.1, -0.3}, 0.15), {{0.6, 0}, 0.2}, length, 1e-3);
}

}  // namespace

TEST(KillingField, GenusZeroIsLaxMatrix) {
    const cplx q{0.3, -0.2};
    HopfJet j;
    j.q = q;
    const KillingField f = build_killing_field(j, {}, 0);
    ASSERT_EQ(f.X.size(), 2u);
    EXPECT_LT(max_abs_entry(f.X[1] - mat2(-I, 0.0, 0.0, I)), 1e-15);
    for (cplx a : lax_probe_points()) EXPECT_LT(max_abs_entry(f(a) - lax_matrix(q, a)), 1e-15);
    EXPECT_LT(lax_residual(oracle::constant_trajectory(q, 1.0, 1e-2), {}, 0), 1e-12);
}

TEST(KillingField, LevelsAreTraceFreeSkewHermitian) {
    const auto c = oracle::random_el_case();
    HopfJet j = complete_jet(c.jet, c.params);
    const GenusConstants k{0.3, -0.2, 0.7, 0};
    for (int g = 0; g <= 3; ++g) {
        const KillingField f = build_killing_field(j, k, g);
        ASSERT_EQ(f.X.size(), static_cast<std::size_t>(g + 2));
        for (const Mat2C& X : f.X) {
            EXPECT_LT(std::abs(X.trace()), 1e-14);
            EXPECT_LT(max_abs_entry(X + X.adjoint()), 1e-14);
        }
        EXPECT_LT(max_abs_entry(f.X.back() - mat2(-I, 0.0, 0.0, I)), 1e-15);
    }
}

TEST(LaxEquation, GenusOne) {
    const Trajectory t = genus1_run(0.4, 0.4);
    EXPECT_LT(lax_residual(t, {0.3, 0, 0, 0}, 1), 1e-7);
    EXPECT_GT(lax_residual(t, {0.35, 0, 0, 0}, 1), 1e-3);
}

TEST(LaxEquation, GenusTwoHopf) {
    const double lam = 0.5;
    const Trajectory t = hopf_run(lam);
    EXPECT_LT(lax_residual(t, {(-4.0 - 2.0 * lam) / 8.0, 0, 0, 0}, 2), 1e-7);
}

TEST(LaxEquation, GenusThreeFromELConstants) {
    for (int n = 0; n < 5; ++n) {
        const auto c = oracle::random_el_case();
        const Trajectory t = integrate_el(c.jet, c.params, 3.0, 1e-3);
        const GenusConstants k = constants_from_el(c.params, first_integral(t.front(), c.params));
        EXPECT_LT(lax_residual(t, k, 3), 1e-7);
    }
}

TEST(ConstantsFromEL, Examples) {
    const GenusConstants k = constants_from_el({{4, 0}, 1}, 2);
    EXPECT_DOUBLE_EQ(k.c, 1.0);
    EXPECT_DOUBLE_EQ(k.d, 0.0);
    EXPECT_DOUBLE_EQ(k.e, -1.0);
    EXPECT_DOUBLE_EQ(constants_from_el_literal({{4, 0}, 1}, 2).e, -9.0);
    // The two agree when C = 0.
    EXPECT_DOUBLE_EQ(constants_from_el({{0.7, 0}, 0}, 0.3).e, constants_from_el_literal({{0.7, 0}, 0}, 0.3).e);
    EXPECT_THROW(constants_from_el({{1, 1}, 0}, 0), Error);
}

TEST(FlowResiduals, CorrectedConstantsSolveGenusThree) {
    for (int n = 0; n < 10; ++n) {
        const auto c = oracle::random_el_case();
        const Trajectory t = integrate_el(c.jet, c.params, 4.0, 1e-3);
        const double dt = first_integral(t.front(), c.params);
        const GenusConstants k = constants_from_el(c.params, dt);
        double worst = 0, worst_sym = 0;
        for (const auto& j : t.jets) {
            const FlowResiduals r = flow_residuals(j, k);
            worst = std::max(worst, r.g3);
            worst_sym = std::max(worst_sym, r.sym3);
        }
        EXPECT_LT(worst, 1e-9);
        EXPECT_LT(worst_sym, 1e-9);
        if (std::abs(c.params.C) > 0.05) {
            const GenusConstants lit = constants_from_el_literal(c.params, dt);
            EXPECT_GT(flow_residual(t.front(), lit, 3), 1e-3);
        }
    }
}

TEST(FlowResiduals, Examples) {
    HopfJet j;
    j.q = 0.5;
    const FlowResiduals r = flow_residuals(j, {-0.25, 0, 0, 0});
    EXPECT_EQ(r.g0, 0.0);
    EXPECT_NEAR(r.g1, 0.0, 1e-15);
    EXPECT_EQ(r.sym1, 0.0);
    HopfJet h;
    h.q = {0.5, 0.5};
    h.q1 = {0.0, 1.0};
    EXPECT_DOUBLE_EQ(sym1(h), 0.5);
    EXPECT_THROW(flow_residual(h, {}, 4), Error);
}

TEST(FitConstants, RecoversGenusOneConstant) {
    const Trajectory t = genus1_run(0.4, 0.4);
    const ConstantFit fit = fit_constants(t, 1);
    EXPECT_NEAR(fit.constants.c, 0.3, 1e-8);
    EXPECT_LT(fit.max_residual, 1e-9);
}

TEST(FitConstants, RecoversGenusThreeConstants) {
    const auto c = oracle::random_el_case();
    const Trajectory t = integrate_el(c.jet, c.params, 6.0, 1e-3);
    const ConstantFit fit = fit_constants(t, 3);
    const GenusConstants k = constants_from_el(c.params, first_integral(t.front(), c.params));
    EXPECT_NEAR(fit.constants.c, 2 * c.params.C - c.params.lambda.real() / 4, 1e-7);
    EXPECT_NEAR(fit.constants.d, 0.0, 1e-7);
    EXPECT_NEAR(fit.constants.e, k.e, 1e-7);
}

TEST(FitConstants, Unidentifiable) {
    const Trajectory cst = oracle::constant_trajectory({0.3, 0.1}, 2.0, 1e-2);
    EXPECT_THROW(fit_constants(cst, 2), Error);
    EXPECT_NO_THROW(fit_constants(cst, 1));
    EXPECT_NEAR(fit_constants(cst, 1).constants.c, -0.1, 1e-12);
    EXPECT_THROW(fit_constants(oracle::constant_trajectory(0.3, 0.5, 1e-2), 1), Error);  // too few samples
}

TEST(Classify, TruthTable) {
    EXPECT_EQ(genus_classify(oracle::constant_trajectory({0.3, 0.2}, 2.0, 1e-2)).genus, 0);
    EXPECT_EQ(genus_classify(genus1_run(0.4, 0.4)).genus, 1);
    EXPECT_EQ(genus_classify(hopf_run(0.5)).genus, 2);
    EXPECT_EQ(genus_classify(generic_run()).genus, 3);
    const Trajectory wild = oracle::analytic_trajectory(
        [](double y) {
            HopfJet j;
            const double w = 2.3;
            j.q = {std::cos(y), 0.3 * std::sin(w * y)};
            j.q1 = {-std::sin(y), 0.3 * w * std::cos(w * y)};
            j.q2 = {-std::cos(y), -0.3 * w * w * std::sin(w * y)};
            j.q3 = {std::sin(y), -0.3 * w * w * w * std::cos(w * y)};
            j.q4 = {std::cos(y), 0.3 * w * w * w * w * std::sin(w * y)};
            j.y = y;
            return j;
        },
        6.0, 1e-2);
    EXPECT_EQ(genus_classify(wild).genus, kGenusAbove3);
    EXPECT_EQ(genus_label(kGenusAbove3), "above3");
    EXPECT_THROW(genus_classify(oracle::constant_trajectory(0.0, 2.0, 1e-2)), Error);
}

TEST(Classify, GenusTwoNeverReportsThree) {
    for (double lam : {-1.0, -0.3, 0.2, 0.9}) {
        const Classification c = genus_classify(hopf_run(lam, oracle::uniform(0.8, 1.6)));
        EXPECT_EQ(c.genus, 2) << lam;
        EXPECT_TRUE(c.evidence[2].passed);
    }
}

TEST(Classify, IsothermicFlag) {
    EXPECT_TRUE(genus_classify(genus1_run(0.4, 0.4)).isothermic());
    EXPECT_FALSE(genus_classify(generic_run()).isothermic());
}
