#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "ewlab/error.hpp"

namespace ewlab {

using cplx = std::complex<double>;
inline constexpr cplx I{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Quaternions in the basis 1, i, j, k with ij = k.
// ---------------------------------------------------------------------------
struct Quaternion {
    double w = 0, x = 0, y = 0, z = 0;

    constexpr Quaternion() = default;
    constexpr Quaternion(double w_, double x_, double y_, double z_) : w(w_), x(x_), y(y_), z(z_) {}

    static constexpr Quaternion real(double s) { return {s, 0, 0, 0}; }
    static constexpr Quaternion unit_i() { return {0, 1, 0, 0}; }
    static constexpr Quaternion unit_j() { return {0, 0, 1, 0}; }
    static constexpr Quaternion unit_k() { return {0, 0, 0, 1}; }

    // p = p1 + j p2 with p1 = w + i x, p2 = y - i z.
    static Quaternion from_split(cplx p1, cplx p2) { return {p1.real(), p1.imag(), p2.real(), -p2.imag()}; }
    cplx c1() const { return {w, x}; }
    cplx c2() const { return {y, -z}; }

    // cos t + i sin t
    static Quaternion exp_i(double t) { return {std::cos(t), std::sin(t), 0, 0}; }

    Quaternion conj() const { return {w, -x, -y, -z}; }
    double norm2() const { return w * w + x * x + y * y + z * z; }
    double norm() const { return std::sqrt(norm2()); }
    Quaternion normalized() const {
        const double n = norm();
        return {w / n, x / n, y / n, z / n};
    }
    bool finite() const { return std::isfinite(w) && std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }

    Quaternion& operator+=(const Quaternion& o) { w += o.w; x += o.x; y += o.y; z += o.z; return *this; }
    Quaternion& operator-=(const Quaternion& o) { w -= o.w; x -= o.x; y -= o.y; z -= o.z; return *this; }
    Quaternion& operator*=(double s) { w *= s; x *= s; y *= s; z *= s; return *this; }
};

inline Quaternion operator+(Quaternion a, const Quaternion& b) { return a += b; }
inline Quaternion operator-(Quaternion a, const Quaternion& b) { return a -= b; }
inline Quaternion operator-(const Quaternion& a) { return {-a.w, -a.x, -a.y, -a.z}; }
inline Quaternion operator*(Quaternion a, double s) { return a *= s; }
inline Quaternion operator*(double s, Quaternion a) { return a *= s; }
inline Quaternion operator/(Quaternion a, double s) { return a *= (1.0 / s); }

inline Quaternion quat_mul(const Quaternion& p, const Quaternion& q) {
    return {p.w * q.w - p.x * q.x - p.y * q.y - p.z * q.z,
            p.w * q.x + p.x * q.w + p.y * q.z - p.z * q.y,
            p.w * q.y - p.x * q.z + p.y * q.w + p.z * q.x,
            p.w * q.z + p.x * q.y - p.y * q.x + p.z * q.w};
}
inline Quaternion operator*(const Quaternion& p, const Quaternion& q) { return quat_mul(p, q); }

// Euclidean inner product of R^4.
inline double dot(const Quaternion& a, const Quaternion& b) { return a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z; }
inline double distance(const Quaternion& a, const Quaternion& b) { return (a - b).norm(); }

// ---------------------------------------------------------------------------
// 2x2 complex matrices
// ---------------------------------------------------------------------------
using Mat2C = Eigen::Matrix2cd;

inline Mat2C mat2(cplx a, cplx b, cplx c, cplx d) {
    Mat2C m;
    m << a, b, c, d;
    return m;
}
inline Mat2C commutator(const Mat2C& a, const Mat2C& b) { return a * b - b * a; }
inline double max_abs_entry(const Mat2C& m) { return m.cwiseAbs().maxCoeff(); }

// ---------------------------------------------------------------------------
// Univariate complex polynomials, coefficients low degree first.
// ---------------------------------------------------------------------------
struct CPoly {
    static constexpr double kTruncation = 1e-10;

    std::vector<cplx> c;

    CPoly() = default;
    explicit CPoly(std::vector<cplx> coeffs) : c(std::move(coeffs)) {}
    CPoly(std::initializer_list<cplx> coeffs) : c(coeffs) {}

    static CPoly constant(cplx v) { return CPoly{std::vector<cplx>{v}}; }
    static CPoly monomial(cplx v, int k) {
        std::vector<cplx> out(static_cast<std::size_t>(k) + 1, cplx{});
        out.back() = v;
        return CPoly{std::move(out)};
    }

    double max_abs() const {
        double m = 0;
        for (cplx v : c) m = std::max(m, std::abs(v));
        return m;
    }

    // Index of the last coefficient above rel * max|c|; -1 for the zero polynomial.
    int degree(double rel = kTruncation) const {
        const double cut = rel * max_abs();
        for (int k = static_cast<int>(c.size()) - 1; k >= 0; --k)
            if (std::abs(c[static_cast<std::size_t>(k)]) > cut) return k;
        return -1;
    }

    cplx coeff(int k) const {
        return (k >= 0 && k < static_cast<int>(c.size())) ? c[static_cast<std::size_t>(k)] : cplx{};
    }

    cplx operator()(cplx a) const {
        cplx acc{};
        for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * a + *it;
        return acc;
    }

    CPoly derivative() const {
        if (c.size() <= 1) return constant(0.0);
        std::vector<cplx> d(c.size() - 1);
        for (std::size_t k = 1; k < c.size(); ++k) d[k - 1] = c[k] * static_cast<double>(k);
        return CPoly{std::move(d)};
    }

    CPoly trimmed(double rel = kTruncation) const {
        const int deg = degree(rel);
        if (deg < 0) return constant(0.0);
        return CPoly{std::vector<cplx>(c.begin(), c.begin() + deg + 1)};
    }

    CPoly monic() const {
        CPoly t = trimmed();
        const cplx lead = t.c.back();
        for (cplx& v : t.c) v /= lead;
        return t;
    }
};

inline CPoly operator+(const CPoly& a, const CPoly& b) {
    std::vector<cplx> out(std::max(a.c.size(), b.c.size()), cplx{});
    for (std::size_t k = 0; k < a.c.size(); ++k) out[k] += a.c[k];
    for (std::size_t k = 0; k < b.c.size(); ++k) out[k] += b.c[k];
    return CPoly{std::move(out)};
}
inline CPoly operator-(const CPoly& a) {
    CPoly out = a;
    for (cplx& v : out.c) v = -v;
    return out;
}
inline CPoly operator-(const CPoly& a, const CPoly& b) { return a + (-b); }
inline CPoly operator*(const CPoly& a, const CPoly& b) {
    if (a.c.empty() || b.c.empty()) return CPoly::constant(0.0);
    std::vector<cplx> out(a.c.size() + b.c.size() - 1, cplx{});
    for (std::size_t i = 0; i < a.c.size(); ++i)
        for (std::size_t j = 0; j < b.c.size(); ++j) out[i + j] += a.c[i] * b.c[j];
    return CPoly{std::move(out)};
}
inline CPoly operator*(cplx s, const CPoly& a) {
    CPoly out = a;
    for (cplx& v : out.c) v *= s;
    return out;
}

inline CPoly poly_from_roots(const std::vector<cplx>& roots) {
    CPoly p = CPoly::constant(1.0);
    for (cplx r : roots) p = p * CPoly{-r, 1.0};
    return p;
}

struct RootMultiplicity {
    cplx root;
    int multiplicity = 1;
};

namespace detail {

inline std::vector<cplx> companion_eigenvalues(const std::vector<cplx>& monic) {
    const int n = static_cast<int>(monic.size()) - 1;
    if (n == 1) return {-monic[0]};
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 1; i < n; ++i) m(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) m(i, n - 1) = -monic[static_cast<std::size_t>(i)];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, false);
    if (es.info() != Eigen::Success) fail(ErrorKind::numerical, "companion eigenvalue solver did not converge");
    std::vector<cplx> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
    return out;
}

inline cplx newton_polish(const CPoly& p, const CPoly& dp, cplx z) {
    double best = std::abs(p(z));
    for (int it = 0; it < 8 && best > 0; ++it) {
        const cplx d = dp(z);
        if (std::abs(d) == 0) break;
        const cplx trial = z - p(z) / d;
        const double val = std::abs(p(trial));
        if (!(val < best)) break;
        best = val;
        z = trial;
    }
    return z;
}

}  // namespace detail

// Cluster radius for a k-fold root candidate: tol^(1/k) * max(1, |centroid|).
inline double cluster_radius(double tol, int k, cplx centroid) {
    return std::pow(tol, 1.0 / k) * std::max(1.0, std::abs(centroid));
}

inline std::vector<RootMultiplicity> poly_roots(const CPoly& P, double tol) {
    const int n = P.degree();
    if (n < 1) fail(ErrorKind::numerical, "degenerate polynomial");
    const cplx lead = P.c[static_cast<std::size_t>(n)];
    if (std::abs(lead) <= tol * P.max_abs()) fail(ErrorKind::numerical, "degenerate polynomial");

    std::vector<cplx> monic(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) monic[static_cast<std::size_t>(k)] = P.c[static_cast<std::size_t>(k)] / lead;
    std::vector<cplx> raw = detail::companion_eigenvalues(monic);

    const CPoly trimmed = P.trimmed();
    const CPoly deriv = trimmed.derivative();
    for (cplx& z : raw) z = detail::newton_polish(trimmed, deriv, z);

    // Greedy clustering, largest multiplicity first.
    std::vector<bool> used(raw.size(), false);
    std::vector<RootMultiplicity> out;
    for (int k = n; k >= 2; --k) {
        for (std::size_t seed = 0; seed < raw.size(); ++seed) {
            if (used[seed]) continue;
            std::vector<std::pair<double, std::size_t>> near;
            for (std::size_t j = 0; j < raw.size(); ++j)
                if (!used[j]) near.emplace_back(std::abs(raw[j] - raw[seed]), j);
            if (static_cast<int>(near.size()) < k) continue;
            std::partial_sort(near.begin(), near.begin() + k, near.end());
            cplx centroid{};
            for (int t = 0; t < k; ++t) centroid += raw[near[static_cast<std::size_t>(t)].second];
            centroid /= static_cast<double>(k);
            const double rad = cluster_radius(tol, k, centroid);
            bool tight = true;
            for (int t = 0; t < k && tight; ++t)
                tight = std::abs(raw[near[static_cast<std::size_t>(t)].second] - centroid) <= rad;
            if (!tight) continue;
            for (int t = 0; t < k; ++t) used[near[static_cast<std::size_t>(t)].second] = true;
            out.push_back({centroid, k});
        }
    }
    for (std::size_t j = 0; j < raw.size(); ++j)
        if (!used[j]) out.push_back({raw[j], 1});

    std::sort(out.begin(), out.end(), [](const RootMultiplicity& a, const RootMultiplicity& b) {
        if (a.root.real() != b.root.real()) return a.root.real() < b.root.real();
        return a.root.imag() < b.root.imag();
    });
    return out;
}

inline std::vector<cplx> poly_odd_order_roots(const CPoly& P, double tol) {
    std::vector<cplx> out;
    for (const auto& r : poly_roots(P, tol))
        if (r.multiplicity % 2 == 1) out.push_back(r.root);
    return out;
}

// Largest distance from a point of `pts` to the image set under `map`.
template <class Map>
double set_symmetry_defect(const std::vector<cplx>& pts, Map map) {
    double worst = 0;
    for (cplx p : pts) {
        const cplx img = map(p);
        double best = std::numeric_limits<double>::infinity();
        for (cplx r : pts) best = std::min(best, std::abs(r - img));
        worst = std::max(worst, best);
    }
    return worst;
}

}  // namespace ewlab
