#pragma once

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "ewlab/algebra.hpp"

namespace ewlab {

/// Seifert type (m, n) of the circle action a -> e^{i l1 t} a e^{i l2 t}.
struct SeifertType {
    int m = 1;
    int n = 1;

    SeifertType() = default;
    SeifertType(int m_, int n_) : m(m_), n(n_) { validate(); }

    double l1() const { return 0.5 * (m + n); }
    double l2() const { return 0.5 * (m - n); }
    int mn() const { return m * n; }

    void validate() const {
        if (m < 0 || n < 0) fail(ErrorKind::config, "Seifert type must have nonnegative m, n");
        if (std::gcd(m, n) != 1) fail(ErrorKind::config, "gcd(m,n) must be 1");
    }
};

/// Point of a profile curve together with its velocity.
struct CurveSampleS3 {
    Quaternion gamma;
    Quaternion dgamma;
    double y = 0;
};

inline constexpr double kSingularFiber = 1e-12;

/// Squared fiber length h = m^2 |g1|^2 + n^2 |g2|^2.
inline double fiber_speed(const Quaternion& g, const SeifertType& st) {
    const double h = st.m * st.m * std::norm(g.c1()) + st.n * st.n * std::norm(g.c2());
    if (h < kSingularFiber) fail(ErrorKind::numerical, "singular fiber");
    return h;
}

/// The unnormalized fiber generator l1 i g + l2 g i.
inline Quaternion fiber_generator(const Quaternion& g, const SeifertType& st) {
    const Quaternion i = Quaternion::unit_i();
    return st.l1() * (i * g) + st.l2() * (g * i);
}

inline Quaternion fiber_direction(const Quaternion& g, const SeifertType& st) {
    const double h = fiber_speed(g, st);
    return fiber_generator(g, st) / std::sqrt(h);
}

/// Derivative of h along a velocity v at g.
inline double fiber_speed_derivative(const Quaternion& g, const Quaternion& v, const SeifertType& st) {
    return 2.0 * (st.m * st.m * std::real(g.c1() * std::conj(v.c1())) +
                  st.n * st.n * std::real(g.c2() * std::conj(v.c2())));
}

struct Frame {
    Quaternion T, N, B;
};

inline Frame frame_at(const Quaternion& g, const Quaternion& dg, const SeifertType& st) {
    const double h = fiber_speed(g, st);
    Frame f;
    f.T = dg / std::sqrt(h);
    f.B = fiber_generator(g, st) / std::sqrt(h);
    f.N = f.B * g.conj() * f.T;
    return f;
}

/// Orientation determinant of (T g^-1, N g^-1, B g^-1) viewed in Im H.
inline double frame_orientation(const Quaternion& g, const Frame& f) {
    const Quaternion a = f.T * g.conj(), b = f.N * g.conj(), c = f.B * g.conj();
    return a.x * (b.y * c.z - b.z * c.y) - a.y * (b.x * c.z - b.z * c.x) + a.z * (b.x * c.y - b.y * c.x);
}

inline void check_sample(const CurveSampleS3& s) {
    if (std::abs(s.gamma.norm() - 1.0) > 1e-9) fail(ErrorKind::invariant, "curve sample is not unit length");
    if (std::abs(dot(s.gamma, s.dgamma)) > 1e-8) fail(ErrorKind::invariant, "curve velocity is not tangent to S3");
}

inline Quaternion surface_normal(const CurveSampleS3& s, const SeifertType& st) {
    check_sample(s);
    const double h = fiber_speed(s.gamma, st);
    if (std::abs(s.dgamma.norm2() - h) > 1e-6 * h) fail(ErrorKind::numerical, "non-conformal sample");
    return frame_at(s.gamma, s.dgamma, st).N;
}

/// q from position, velocity and acceleration of a horizontal conformal curve.
inline cplx hopf_q_pointwise(const Quaternion& g, const Quaternion& dg, const Quaternion& ddg, const SeifertType& st) {
    const double h = fiber_speed(g, st);
    const double sh = std::sqrt(h);
    const Frame f = frame_at(g, dg, st);
    const Quaternion i = Quaternion::unit_i();
    const double kappa_s3 = dot(ddg, f.N) / h;
    const double kappa = sh * kappa_s3 - (2.0 * st.l1() * st.l2() / sh) * dot(f.N, i * g * i);
    return 0.25 * cplx{kappa, 2.0 * st.mn() / sh};
}

namespace detail {

// Fourth-order first derivative of a uniformly sampled sequence.
template <class T>
std::vector<T> fd_first_derivative(const std::vector<T>& f, double h, bool periodic) {
    const std::size_t n = f.size();
    std::vector<T> d(n);
    auto at = [&](long k) -> const T& { return f[static_cast<std::size_t>((k % static_cast<long>(n) + static_cast<long>(n)) % static_cast<long>(n))]; };
    for (std::size_t k = 0; k < n; ++k) {
        const long i = static_cast<long>(k);
        const bool interior = periodic || (k >= 2 && k + 2 < n);
        if (interior) {
            d[k] = (at(i - 2) - 8.0 * at(i - 1) + 8.0 * at(i + 1) - at(i + 2)) / (12.0 * h);
        } else if (k == 0) {
            d[k] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h);
        } else if (k == 1) {
            d[k] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * h);
        } else if (k == n - 2) {
            d[k] = (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5]) / (12.0 * h);
        } else {
            d[k] = (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4] + 3.0 * f[n - 5]) / (12.0 * h);
        }
    }
    return d;
}

inline double uniform_step(const std::vector<CurveSampleS3>& curve) {
    const double h = curve[1].y - curve[0].y;
    if (!(h > 0)) fail(ErrorKind::config, "curve samples must have increasing y");
    for (std::size_t k = 1; k < curve.size(); ++k)
        if (std::abs((curve[k].y - curve[k - 1].y) - h) > 1e-9 * std::max(1.0, std::abs(curve[k].y)))
            fail(ErrorKind::config, "curve samples must be uniformly spaced");
    return h;
}

}  // namespace detail

/// Conformal Hopf differential along a sampled profile curve. The curve
/// curvature is read from finite differences of the stored velocities.
/// With `periodic` set, the samples are taken to cover [0, L) and wrap.
inline std::vector<cplx> hopf_differential_from_curve(const std::vector<CurveSampleS3>& curve, const SeifertType& st,
                                                      bool periodic = false) {
    if (curve.size() < 5) fail(ErrorKind::config, "need at least 5 curve samples");
    const double step = detail::uniform_step(curve);
    std::vector<Quaternion> vel(curve.size());
    for (std::size_t k = 0; k < curve.size(); ++k) {
        const double h = fiber_speed(curve[k].gamma, st);
        if (std::abs(curve[k].dgamma.norm2() - h) > 1e-5 * h) fail(ErrorKind::numerical, "non-conformal sample");
        vel[k] = curve[k].dgamma;
    }
    const std::vector<Quaternion> acc = detail::fd_first_derivative(vel, step, periodic);
    std::vector<cplx> q(curve.size());
    for (std::size_t k = 0; k < curve.size(); ++k) q[k] = hopf_q_pointwise(curve[k].gamma, vel[k], acc[k], st);
    return q;
}

}  // namespace ewlab
