#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace ewlab;

namespace {

std::string error_text(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.what();
    }
    return "";
}

// A random unit tangent vector at g that is orthogonal to the fiber.
Quaternion random_horizontal(const Quaternion& g, const SeifertType& st) {
    Quaternion v = oracle::random_unit();
    v -= dot(v, g) * g;
    const Quaternion B = fiber_direction(g, st);
    v -= dot(v, B) * B;
    return v.normalized();
}

}  // namespace

TEST(SeifertType, ValidatesGcd) {
    EXPECT_NO_THROW(SeifertType(1, 0));
    EXPECT_NO_THROW(SeifertType(0, 1));
    EXPECT_NO_THROW(SeifertType(3, 2));
    EXPECT_EQ(error_text([] { SeifertType(2, 4); }), "gcd(m,n) must be 1");
    const SeifertType st(3, 2);
    EXPECT_DOUBLE_EQ(st.l1() + st.l2(), 3.0);
    EXPECT_DOUBLE_EQ(st.l1() - st.l2(), 2.0);
}

TEST(FiberSpeed, Examples) {
    EXPECT_DOUBLE_EQ(fiber_speed(Quaternion::real(1), {1, 1}), 1.0);
    const double s = 1.0 / std::sqrt(2.0);
    EXPECT_NEAR(fiber_speed({s, 0, s, 0}, {2, 1}), 2.5, 1e-15);
    EXPECT_EQ(error_text([] { fiber_speed(Quaternion::unit_j(), {1, 0}); }), "singular fiber");
}

TEST(FiberSpeed, MatchesGeneratorNorm) {
    for (auto [m, n] : std::vector<std::pair<int, int>>{{1, 1}, {2, 1}, {3, 2}, {1, 0}, {5, 3}}) {
        const SeifertType st(m, n);
        for (int t = 0; t < 30; ++t) {
            const Quaternion g = oracle::random_unit();
            EXPECT_NEAR(fiber_speed(g, st), fiber_generator(g, st).norm2(), 1e-10);
        }
    }
}

TEST(FiberSpeed, HopfFiberLengthConstant) {
    for (int t = 0; t < 50; ++t) EXPECT_NEAR(fiber_speed(oracle::random_unit(), {1, 1}), 1.0, 1e-14);
}

TEST(FiberDirection, Examples) {
    const Quaternion b1 = fiber_direction(Quaternion::real(1), {1, 1});
    EXPECT_NEAR(distance(b1, Quaternion::unit_i()), 0, 1e-15);
    const Quaternion b2 = fiber_direction(Quaternion::unit_j(), {1, 1});
    EXPECT_NEAR(distance(b2, Quaternion::unit_k()), 0, 1e-15);
    const SeifertType st(3, 2);
    for (int t = 0; t < 50; ++t) {
        const Quaternion g = oracle::random_unit();
        const Quaternion B = fiber_direction(g, st);
        EXPECT_NEAR(B.norm(), 1.0, 1e-12);
        EXPECT_NEAR(dot(B, g), 0.0, 1e-12);
    }
}

TEST(SurfaceNormal, Examples) {
    const Quaternion n1 = surface_normal({Quaternion::real(1), Quaternion::unit_j(), 0}, {1, 1});
    EXPECT_NEAR(distance(n1, Quaternion::unit_k()), 0, 1e-15);
    const Quaternion n2 = surface_normal({Quaternion::real(1), Quaternion::unit_k(), 0}, {1, 1});
    EXPECT_NEAR(distance(n2, -Quaternion::unit_j()), 0, 1e-15);
    EXPECT_EQ(error_text([] { surface_normal({Quaternion::real(1), 2.0 * Quaternion::unit_j(), 0}, {1, 1}); }),
              "non-conformal sample");
}

TEST(SurfaceNormal, FrameIsOrthonormalAndPositive) {
    for (auto [m, n] : std::vector<std::pair<int, int>>{{1, 1}, {2, 1}, {3, 2}, {1, 0}}) {
        const SeifertType st(m, n);
        for (int t = 0; t < 30; ++t) {
            const Quaternion g = oracle::random_unit();
            const double h = fiber_speed(g, st);
            const Quaternion v = std::sqrt(h) * random_horizontal(g, st);
            const Quaternion N = surface_normal({g, v, 0}, st);
            const Frame f = frame_at(g, v, st);
            EXPECT_NEAR(dot(N, g), 0, 1e-10);
            EXPECT_NEAR(dot(N, f.T), 0, 1e-10);
            EXPECT_NEAR(dot(N, f.B), 0, 1e-10);
            EXPECT_NEAR(N.norm(), 1, 1e-10);
            EXPECT_NEAR(frame_orientation(g, f), 1.0, 1e-8);
        }
    }
}

TEST(HopfDifferential, GreatCircleIsHalfI) {
    const auto curve = oracle::sample_great_circle(2 * kPi, 1e-3);
    const auto q = hopf_differential_from_curve(curve, {1, 1});
    for (cplx v : q) EXPECT_LT(std::abs(v - cplx(0, 0.5)), 5e-4);
}

TEST(HopfDifferential, RevolutionCircleHasRealQ) {
    // Circle of spherical radius r about 1 in the slice spanned by 1, j, k.
    const double r = 0.7, step = 1e-3;
    const double rate = std::cos(r) / std::sin(r);
    std::vector<CurveSampleS3> curve;
    for (int k = 0; k <= 2000; ++k) {
        const double y = k * step, phi = rate * y;
        curve.push_back({{std::cos(r), 0, std::sin(r) * std::cos(phi), std::sin(r) * std::sin(phi)},
                         {0, 0, -std::cos(r) * std::sin(phi), std::cos(r) * std::cos(phi)},
                         y});
    }
    const auto q = hopf_differential_from_curve(curve, {1, 0});
    for (cplx v : q) {
        EXPECT_LT(std::abs(v.imag()), 5e-4);
        EXPECT_NEAR(v.real(), q.front().real(), 5e-4);
    }
    EXPECT_GT(std::abs(q.front().real()), 1e-3);
}

TEST(HopfDifferential, TorusOrbitCoupling) {
    for (auto [m, n, theta] : std::vector<std::tuple<int, int, double>>{{2, 1, 0.6}, {3, 2, 0.9}, {1, 1, 0.4}, {3, 1, 1.1}}) {
        const SeifertType st(m, n);
        const auto curve = oracle::sample_orbit(m, n, theta, 1.0, 1e-3);
        const auto q = hopf_differential_from_curve(curve, st);
        for (std::size_t k = 0; k < q.size(); ++k) {
            const double sh = std::sqrt(fiber_speed(curve[k].gamma, st));
            EXPECT_NEAR(q[k].imag() * 2.0 * sh, st.mn(), 1e-9);
            EXPECT_NEAR(q[k].real(), q.front().real(), 1e-8);
            // pointwise value with the exact acceleration
            const auto p = oracle::torus_orbit(m, n, theta, curve[k].y);
            EXPECT_LT(std::abs(q[k] - hopf_q_pointwise(p.g, p.dg, p.ddg, st)), 1e-9);
        }
    }
}

TEST(HopfDifferential, RejectsBadInput) {
    auto curve = oracle::sample_great_circle(0.003, 1e-3);
    EXPECT_THROW(hopf_differential_from_curve(curve, {1, 1}), Error);
    curve = oracle::sample_great_circle(0.01, 1e-3);
    curve[3].y += 1e-4;
    EXPECT_THROW(hopf_differential_from_curve(curve, {1, 1}), Error);
    curve = oracle::sample_great_circle(0.01, 1e-3);
    curve[4].dgamma = 1.1 * curve[4].dgamma;
    EXPECT_EQ(error_text([&] { hopf_differential_from_curve(curve, {1, 1}); }), "non-conformal sample");
}
