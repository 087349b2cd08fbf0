#pragma once

#include <array>
#include <cmath>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "ewlab/algebra.hpp"
#include "ewlab/elflow.hpp"
#include "ewlab/seifert.hpp"
#include "ewlab/stencil.hpp"

namespace ewlab {

enum class Branch { plus, minus };

// ---------------------------------------------------------------------------
// Initial data
// ---------------------------------------------------------------------------

/// Start point gamma0 = cos(theta) + j sin(theta) with h(gamma0) = h0, and a
/// tangent compatible with q0 and Im q0'. For mn = 0 the caller supplies h0.
inline CurveSampleS3 init_profile(const HopfJet& jet0, const SeifertType& st, Branch branch,
                                  std::optional<double> h0_supplied = std::nullopt) {
    const double m2 = st.m * st.m, n2 = st.n * st.n;
    const double lo = std::min(m2, n2), hi = std::max(m2, n2);
    double h0 = 0;
    if (st.mn() != 0) {
        if (!(jet0.q.imag() > 0)) fail(ErrorKind::config, "incompatible Im q for (m,n)");
        h0 = std::pow(st.mn() / (2.0 * jet0.q.imag()), 2);
        if (h0 < lo * (1 - 1e-9) || h0 > hi * (1 + 1e-9)) fail(ErrorKind::config, "incompatible Im q for (m,n)");
    } else {
        if (!h0_supplied) fail(ErrorKind::config, "h0 must be supplied when mn = 0");
        h0 = *h0_supplied;
        if (!(h0 > kSingularFiber) || h0 > hi * (1 + 1e-9)) fail(ErrorKind::config, "h0 out of range for (m,n)");
    }
    h0 = std::clamp(h0, lo, hi);

    double theta = 0;
    if (st.m != st.n) theta = std::acos(std::sqrt(std::clamp((h0 - n2) / (m2 - n2), 0.0, 1.0)));
    const double ct = std::cos(theta), s = std::sin(theta);
    const double sign = branch == Branch::plus ? 1.0 : -1.0;

    CurveSampleS3 out;
    out.y = jet0.y;
    out.gamma = {ct, 0, s, 0};
    const Quaternion u1{-s, 0, ct, 0};  // moves along theta, changes h
    const double w = std::sqrt(n2 * s * s + m2 * ct * ct);
    const Quaternion u2{0, st.n * s / w, 0, -st.m * ct / w};  // keeps h fixed to first order

    const double dh_dtheta = -2.0 * (m2 - n2) * s * ct;
    Quaternion T;
    if (st.mn() == 0 || std::abs(dh_dtheta) < 1e-12) {
        T = sign * u1;
    } else {
        // Im q = mn / (2 sqrt h) ties h' to Im q'.
        const double dh = -4.0 * std::pow(h0, 1.5) * jet0.q1.imag() / st.mn();
        const double cphi = dh / (std::sqrt(h0) * dh_dtheta);
        if (std::abs(cphi) > 1 + 1e-9) fail(ErrorKind::config, "incompatible Im q' for (m,n)");
        const double cp = std::clamp(cphi, -1.0, 1.0);
        T = cp * u1 + sign * std::sqrt(1 - cp * cp) * u2;
    }
    out.dgamma = std::sqrt(h0) * T;
    return out;
}

// ---------------------------------------------------------------------------
// Profile curve ODE
// ---------------------------------------------------------------------------

struct ProfileCurve {
    std::vector<CurveSampleS3> samples;
    SeifertType st;
    double step = 0.0;
    double length = 0.0;
};

namespace detail {

inline Quaternion profile_acceleration(const Quaternion& g, const Quaternion& v, double re_q, const SeifertType& st) {
    const double h = fiber_speed(g, st);
    const double sh = std::sqrt(h);
    const Frame f = frame_at(g, v, st);
    const Quaternion i = Quaternion::unit_i();
    const double ksh = (4.0 * re_q + (2.0 * st.l1() * st.l2() / sh) * dot(f.N, i * g * i)) / sh;
    const double dsh = fiber_speed_derivative(g, v, st) / (2.0 * sh);
    return dsh * f.T + (h * ksh) * f.N - h * g;
}

}  // namespace detail

inline ProfileCurve integrate_profile(const Trajectory& t, const SeifertType& st, const CurveSampleS3& init, double step) {
    check_sample(init);
    if (!(step > 0)) fail(ErrorKind::config, "step must be positive");
    const double L = t.length();
    const long n = std::max<long>(1, std::lround(L / step));
    const double dy = L / static_cast<double>(n);
    const double y0 = t.front().y;

    ProfileCurve out;
    out.st = st;
    out.step = dy;
    out.length = L;
    out.samples.reserve(static_cast<std::size_t>(n) + 1);
    out.samples.push_back({init.gamma, init.dgamma, y0});

    Quaternion g = init.gamma, v = init.dgamma;
    double qs = t.front().q.real();
    for (long k = 0; k < n; ++k) {
        const double y = y0 + dy * static_cast<double>(k);
        const double qm = t.q_at(y + 0.5 * dy).real();
        const double qe = (k + 1 == n) ? t.back().q.real() : t.q_at(y + dy).real();
        const Quaternion a1 = detail::profile_acceleration(g, v, qs, st);
        const Quaternion g2 = g + 0.5 * dy * v, v2 = v + 0.5 * dy * a1;
        const Quaternion a2 = detail::profile_acceleration(g2, v2, qm, st);
        const Quaternion g3 = g + 0.5 * dy * v2, v3 = v + 0.5 * dy * a2;
        const Quaternion a3 = detail::profile_acceleration(g3, v3, qm, st);
        const Quaternion g4 = g + dy * v3, v4 = v + dy * a3;
        const Quaternion a4 = detail::profile_acceleration(g4, v4, qe, st);
        g += dy / 6.0 * (v + 2.0 * v2 + 2.0 * v3 + v4);
        v += dy / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        qs = qe;

        const double h = fiber_speed(g, st);
        if (!g.finite() || !v.finite() || std::abs(g.norm() - 1.0) > 1e-4 || std::abs(v.norm2() - h) > 1e-4 * h)
            fail(ErrorKind::numerical, "reconstruction diverged");
        g = g.normalized();
        v -= dot(v, g) * g;
        const Quaternion B = fiber_direction(g, st);
        v -= dot(v, B) * B;
        v *= std::sqrt(fiber_speed(g, st)) / v.norm();
        out.samples.push_back({g, v, y + dy});
    }
    return out;
}

struct ProfileInvariants {
    double unit = 0.0;        // max | |gamma| - 1 |
    double conformal = 0.0;   // max | |gamma'|^2 - h | / h
    double coupling = 0.0;    // max | sqrt h - mn / (2 Im q) | / sqrt h, mn != 0
    double horizontal = 0.0;  // max |<gamma', B>| / sqrt h
};

inline ProfileInvariants profile_invariants(const ProfileCurve& c, const Trajectory& t) {
    ProfileInvariants r;
    for (const auto& s : c.samples) {
        const double h = fiber_speed(s.gamma, c.st);
        r.unit = std::max(r.unit, std::abs(s.gamma.norm() - 1.0));
        r.conformal = std::max(r.conformal, std::abs(s.dgamma.norm2() - h) / h);
        r.horizontal = std::max(r.horizontal, std::abs(dot(s.dgamma, fiber_direction(s.gamma, c.st))) / std::sqrt(h));
        if (c.st.mn() != 0) {
            const double imq = t.q_at(s.y).imag();
            r.coupling = std::max(r.coupling, std::abs(std::sqrt(h) - c.st.mn() / (2.0 * imq)) / std::sqrt(h));
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Monodromy
// ---------------------------------------------------------------------------

enum class PeriodMapKind { fiber_rotation, torus_rotation, isometry, non_isometric };

inline const char* period_map_name(PeriodMapKind k) {
    switch (k) {
        case PeriodMapKind::fiber_rotation: return "fiber_rotation";
        case PeriodMapKind::torus_rotation: return "torus_rotation";
        case PeriodMapKind::isometry: return "isometry";
        case PeriodMapKind::non_isometric: return "non_isometric";
    }
    return "unknown";
}

struct Monodromy {
    double theta = 0.0;           // best fiber rotation angle in [0, 2 pi)
    double residual = 0.0;        // sqrt of the minimized sum of squares
    double torus_residual = 0.0;  // same for independent phases of gamma_1, gamma_2
    double phase1 = 0.0;          // torus fit: gamma_1 -> e^{i phase1} gamma_1
    double phase2 = 0.0;          // torus fit: gamma_2 -> e^{i phase2} gamma_2
    double rotation_number = 0.0; // theta / 2 pi
    std::vector<std::pair<long, long>> convergents;

    // The rotation of R^4 carrying the frame (gamma, T, N, B) at y = 0 to the
    // frame at y = L. When the period map is an isometry it is this matrix.
    Eigen::Matrix4d frame_map = Eigen::Matrix4d::Identity();
    double commutation_defect = 0.0;  // |[M, J]| / |J| for the fiber generator J
    std::array<double, 2> frame_angles{};
    PeriodMapKind kind = PeriodMapKind::non_isometric;
};

/// Generator of the fiber action as a 4x4 matrix on (w, x, y, z).
inline Eigen::Matrix4d fiber_generator_matrix(const SeifertType& st) {
    Eigen::Matrix4d J = Eigen::Matrix4d::Zero();
    J(0, 1) = -st.m;
    J(1, 0) = st.m;
    J(2, 3) = -st.n;
    J(3, 2) = st.n;
    return J;
}

inline Eigen::Matrix4d frame_matrix(const CurveSampleS3& s, const SeifertType& st) {
    const Frame f = frame_at(s.gamma, s.dgamma, st);
    Eigen::Matrix4d F;
    const std::array<Quaternion, 4> cols{s.gamma, f.T, f.N, f.B};
    for (int k = 0; k < 4; ++k) F.col(k) << cols[static_cast<std::size_t>(k)].w, cols[static_cast<std::size_t>(k)].x,
        cols[static_cast<std::size_t>(k)].y, cols[static_cast<std::size_t>(k)].z;
    return F;
}

inline std::vector<std::pair<long, long>> continued_fraction_convergents(double x, int max_terms = 10, double tol = 1e-9) {
    std::vector<std::pair<long, long>> out;
    long p0 = 1, q0 = 0, p1 = 0, q1 = 1;
    double r = x;
    for (int k = 0; k < max_terms; ++k) {
        const double a = std::floor(r);
        const long ai = static_cast<long>(a);
        const long p = ai * p0 + p1, q = ai * q0 + q1;
        out.emplace_back(p, q);
        p1 = p0;
        q1 = q0;
        p0 = p;
        q0 = q;
        const double frac = r - a;
        if (frac < tol || std::abs(static_cast<double>(p) / static_cast<double>(q) - x) < tol) break;
        r = 1.0 / frac;
        if (r > 1e12) break;
    }
    return out;
}

/// Fit of the period map gamma(0) -> gamma(L) by the fiber action.
/// In split coordinates the action multiplies gamma_1 by e^{i m theta} and
/// gamma_2 by e^{-i n theta}, so both fits reduce to phase problems.
inline Monodromy profile_monodromy(const ProfileCurve& c, bool strict = true) {
    const auto& a = c.samples.back();
    const auto& b = c.samples.front();
    const cplx S1 = a.gamma.c1() * std::conj(b.gamma.c1()) + a.dgamma.c1() * std::conj(b.dgamma.c1());
    const cplx S2 = a.gamma.c2() * std::conj(b.gamma.c2()) + a.dgamma.c2() * std::conj(b.dgamma.c2());
    const double m = c.st.m, n = c.st.n;

    auto residual = [&](double u, double w) {
        const cplx e1 = std::polar(1.0, u), e2 = std::polar(1.0, w);
        const double r = std::norm(a.gamma.c1() - e1 * b.gamma.c1()) + std::norm(a.dgamma.c1() - e1 * b.dgamma.c1()) +
                         std::norm(a.gamma.c2() - e2 * b.gamma.c2()) + std::norm(a.dgamma.c2() - e2 * b.dgamma.c2());
        return std::sqrt(r);
    };
    auto F = [&](double th) { return -2.0 * std::real(std::polar(1.0, -m * th) * S1) - 2.0 * std::real(std::polar(1.0, n * th) * S2); };

    Monodromy out;
    out.phase1 = std::arg(S1);
    out.phase2 = std::arg(S2);
    out.torus_residual = residual(out.phase1, out.phase2);

    const int grid = 4096;
    double best = 0, fbest = std::numeric_limits<double>::infinity();
    for (int k = 0; k < grid; ++k) {
        const double th = 2.0 * kPi * k / grid;
        const double f = F(th);
        if (f < fbest) {
            fbest = f;
            best = th;
        }
    }
    for (int it = 0; it < 30; ++it) {
        const cplx e1 = std::polar(1.0, -m * best) * S1, e2 = std::polar(1.0, n * best) * S2;
        const double d1 = 2.0 * std::real(I * m * e1) - 2.0 * std::real(I * n * e2);
        const double d2 = 2.0 * m * m * std::real(e1) + 2.0 * n * n * std::real(e2);
        if (!(d2 > 0)) break;
        const double step = d1 / d2;
        best -= step;
        if (std::abs(step) < 1e-15) break;
    }
    best = std::fmod(best, 2.0 * kPi);
    if (best < 0) best += 2.0 * kPi;
    if (2.0 * kPi - best < 1e-12) best = 0.0;
    out.theta = best;
    out.residual = residual(m * best, -n * best);
    out.rotation_number = best / (2.0 * kPi);
    out.convergents = continued_fraction_convergents(out.rotation_number);

    out.frame_map = frame_matrix(a, c.st) * frame_matrix(b, c.st).transpose();
    const Eigen::Matrix4d J = fiber_generator_matrix(c.st);
    out.commutation_defect = (out.frame_map * J - J * out.frame_map).norm() / J.norm();
    Eigen::EigenSolver<Eigen::Matrix4d> es(out.frame_map, false);
    std::vector<double> ang;
    for (int k = 0; k < 4; ++k) ang.push_back(std::abs(std::arg(es.eigenvalues()(k))));
    std::sort(ang.begin(), ang.end());
    out.frame_angles = {ang[0], ang[2]};
    if (out.residual <= 1e-3)
        out.kind = PeriodMapKind::fiber_rotation;
    else if (out.torus_residual <= 1e-3)
        out.kind = PeriodMapKind::torus_rotation;
    else if (out.commutation_defect <= 1e-6)
        out.kind = PeriodMapKind::isometry;
    else
        out.kind = PeriodMapKind::non_isometric;

    if (strict && out.residual > 1e-3) fail(ErrorKind::numerical, "monodromy not a fiber rotation");
    return out;
}

/// Apply the fiber action by angle s.
inline Quaternion fiber_rotate(const Quaternion& g, const SeifertType& st, double s) {
    return Quaternion::from_split(std::polar(1.0, st.m * s) * g.c1(), std::polar(1.0, -st.n * s) * g.c2());
}

// ---------------------------------------------------------------------------
// Torus mesh
// ---------------------------------------------------------------------------

struct TorusMesh {
    int nx = 0;
    int ny = 0;
    bool wrap_y = false;
    double dy = 0.0;
    std::vector<double> y;
    std::vector<Quaternion> vertices;  // index j * nx + i
    std::vector<std::array<int, 4>> faces;
    SeifertType st;

    const Quaternion& at(int i, int j) const { return vertices[static_cast<std::size_t>(j * nx + i)]; }
};

inline bool profile_closes(const ProfileCurve& c, double tol = 1e-8) {
    const auto& a = c.samples.front();
    const auto& b = c.samples.back();
    return c.samples.size() > 2 && distance(a.gamma, b.gamma) < tol && distance(a.dgamma, b.dgamma) < tol * (1.0 + a.dgamma.norm());
}

/// Vertices f(x_i, y_j) = e^{i l1 x} gamma(y_j) e^{i l2 x}, x_i = 2 pi i / n_x.
/// Rows use every `stride`-th profile sample; trailing samples past the last
/// full stride are dropped. The y direction wraps only when the profile
/// curve closes.
inline TorusMesh build_torus_mesh(const ProfileCurve& c, int n_x, int stride = 1) {
    if (n_x < 8) fail(ErrorKind::config, "n_x must be at least 8");
    if (stride < 1) fail(ErrorKind::config, "mesh stride must be positive");
    TorusMesh mesh;
    mesh.nx = n_x;
    mesh.st = c.st;
    mesh.wrap_y = profile_closes(c);
    const std::size_t intervals = c.samples.size() - 1;
    const auto st = static_cast<std::size_t>(stride);
    // A closed curve needs the stride to divide the sample count so that
    // the wrap-around row spacing stays uniform.
    if (mesh.wrap_y && intervals % st != 0) mesh.wrap_y = false;
    const std::size_t last = mesh.wrap_y ? intervals : intervals + 1;
    std::vector<std::size_t> rows;
    for (std::size_t k = 0; k < last; k += st) rows.push_back(k);
    mesh.ny = static_cast<int>(rows.size());
    mesh.dy = c.step * stride;
    for (std::size_t r : rows) {
        mesh.y.push_back(c.samples[r].y);
        for (int i = 0; i < n_x; ++i) mesh.vertices.push_back(fiber_rotate(c.samples[r].gamma, c.st, 2.0 * kPi * i / n_x));
    }
    const int jmax = mesh.wrap_y ? mesh.ny : mesh.ny - 1;
    for (int j = 0; j < jmax; ++j) {
        const int jn = (j + 1) % mesh.ny;
        for (int i = 0; i < n_x; ++i) {
            const int in = (i + 1) % n_x;
            mesh.faces.push_back({j * n_x + i, j * n_x + in, jn * n_x + in, jn * n_x + i});
        }
    }
    return mesh;
}

// ---------------------------------------------------------------------------
// Willmore energy
// ---------------------------------------------------------------------------

namespace detail {

// Composite Simpson when the interval count is even, otherwise Simpson plus
// a closing 3/8 panel.
inline double integrate_uniform(const std::vector<double>& f, double h) {
    const std::size_t n = f.size();
    if (n < 2) return 0.0;
    if (n == 2) return 0.5 * h * (f[0] + f[1]);
    if (n == 3) return h / 3.0 * (f[0] + 4 * f[1] + f[2]);
    const std::size_t intervals = n - 1;
    std::size_t simpson_end = intervals % 2 == 0 ? intervals : intervals - 3;
    double s = 0;
    for (std::size_t k = 0; k + 2 <= simpson_end; k += 2) s += h / 3.0 * (f[k] + 4 * f[k + 1] + f[k + 2]);
    if (simpson_end != intervals) {
        const std::size_t k = simpson_end;
        s += 3.0 * h / 8.0 * (f[k] + 3 * f[k + 1] + 3 * f[k + 2] + f[k + 3]);
    }
    return s;
}

// Unit vector of R^4 orthogonal to a, b, c (generalized cross product).
inline Quaternion cross3(const Quaternion& a, const Quaternion& b, const Quaternion& c) {
    auto det3 = [](double a1, double a2, double a3, double b1, double b2, double b3, double c1, double c2, double c3) {
        return a1 * (b2 * c3 - b3 * c2) - a2 * (b1 * c3 - b3 * c1) + a3 * (b1 * c2 - b2 * c1);
    };
    Quaternion n{det3(a.x, a.y, a.z, b.x, b.y, b.z, c.x, c.y, c.z), -det3(a.w, a.y, a.z, b.w, b.y, b.z, c.w, c.y, c.z),
                 det3(a.w, a.x, a.z, b.w, b.x, b.z, c.w, c.x, c.z), -det3(a.w, a.x, a.y, b.w, b.x, b.y, c.w, c.x, c.y)};
    return n.normalized();
}

// Fourth-order weights for first and second derivatives at row j of n rows.
inline void row_weights(int j, int n, bool wrap, std::vector<int>& idx, std::vector<double>& w1, std::vector<double>& w2,
                        double h) {
    idx.clear();
    std::vector<double> nodes;
    if (wrap || (j >= 2 && j + 2 < n)) {
        for (int o = -2; o <= 2; ++o) {
            idx.push_back(((j + o) % n + n) % n);
            nodes.push_back(o * h);
        }
    } else {
        const int start = std::clamp(j - 2, 0, n - 6);
        for (int k = start; k < start + 6; ++k) {
            idx.push_back(k);
            nodes.push_back((k - j) * h);
        }
    }
    const auto wts = fd_weights(0.0, nodes, 2);
    w1.assign(nodes.size(), 0.0);
    w2.assign(nodes.size(), 0.0);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        w1[k] = wts[k][1];
        w2[k] = wts[k][2];
    }
}

}  // namespace detail

struct MeshEnergy {
    double willmore = 0.0;   // integral of (H^2 + 1) dA
    double conformal = 0.0;  // integral of (H^2 - det S) dA, equal to the above on closed tori
};

/// Energy integrals over the mesh, with H and det S from the discrete second
/// fundamental form (fourth-order differences in x and y).
inline MeshEnergy mesh_energy(const TorusMesh& mesh) {
    const int nx = mesh.nx, ny = mesh.ny;
    if (ny < (mesh.wrap_y ? 5 : 6)) fail(ErrorKind::config, "mesh needs more rows for curvature estimates");
    const double dx = 2.0 * kPi / nx;
    std::vector<int> xi, yi;
    std::vector<double> xw1, xw2, yw1, yw2;
    std::vector<Quaternion> fy(mesh.vertices.size());
    std::vector<Quaternion> fyy(mesh.vertices.size());
    for (int j = 0; j < ny; ++j) {
        detail::row_weights(j, ny, mesh.wrap_y, yi, yw1, yw2, mesh.dy);
        for (int i = 0; i < nx; ++i) {
            Quaternion d1, d2;
            for (std::size_t k = 0; k < yi.size(); ++k) {
                d1 += yw1[k] * mesh.at(i, yi[k]);
                d2 += yw2[k] * mesh.at(i, yi[k]);
            }
            fy[static_cast<std::size_t>(j * nx + i)] = d1;
            fyy[static_cast<std::size_t>(j * nx + i)] = d2;
        }
    }
    detail::row_weights(0, nx, true, xi, xw1, xw2, dx);
    std::vector<double> row_integral(static_cast<std::size_t>(ny), 0.0), row_conformal(static_cast<std::size_t>(ny), 0.0);
    for (int j = 0; j < ny; ++j) {
        double acc = 0, acc_c = 0;
        for (int i = 0; i < nx; ++i) {
            Quaternion fx, fxx, fxy;
            for (std::size_t k = 0; k < xi.size(); ++k) {
                const int ii = ((i + xi[k]) % nx + nx) % nx;
                fx += xw1[k] * mesh.at(ii, j);
                fxx += xw2[k] * mesh.at(ii, j);
                fxy += xw1[k] * fy[static_cast<std::size_t>(j * nx + ii)];
            }
            const Quaternion& f = mesh.at(i, j);
            const Quaternion& fyv = fy[static_cast<std::size_t>(j * nx + i)];
            const Quaternion nu = detail::cross3(f, fx, fyv);
            const double E = dot(fx, fx), F = dot(fx, fyv), G = dot(fyv, fyv);
            const double Lc = dot(fxx, nu), Mc = dot(fxy, nu), Nc = dot(fyy[static_cast<std::size_t>(j * nx + i)], nu);
            const double det = E * G - F * F;
            const double H = (Lc * G - 2.0 * Mc * F + Nc * E) / (2.0 * det);
            const double Ke = (Lc * Nc - Mc * Mc) / det;
            acc += (H * H + 1.0) * std::sqrt(det);
            acc_c += (H * H - Ke) * std::sqrt(det);
        }
        row_integral[static_cast<std::size_t>(j)] = acc * dx;
        row_conformal[static_cast<std::size_t>(j)] = acc_c * dx;
    }
    auto total = [&](const std::vector<double>& rows) {
        if (!mesh.wrap_y) return detail::integrate_uniform(rows, mesh.dy);
        double s = 0;
        for (double v : rows) s += v;
        return s * mesh.dy;
    };
    return {total(row_integral), total(row_conformal)};
}

inline double mesh_willmore(const TorusMesh& mesh) { return mesh_energy(mesh).willmore; }

struct WillmoreEnergy {
    double curve = 0.0;
    std::optional<double> mesh;
};

inline double willmore_curve(const Trajectory& t) {
    std::vector<double> f;
    f.reserve(t.jets.size());
    for (const auto& j : t.jets) f.push_back(std::norm(j.q));
    return 16.0 * kPi * detail::integrate_uniform(f, t.step);
}

inline WillmoreEnergy willmore_energy(const Trajectory& t, const TorusMesh* mesh = nullptr) {
    WillmoreEnergy w;
    w.curve = willmore_curve(t);
    if (mesh) w.mesh = mesh_willmore(*mesh);
    return w;
}

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

struct Stereographic {
    Quaternion pole{0, 0, 0, 1};
    std::array<Quaternion, 3> basis{Quaternion{1, 0, 0, 0}, Quaternion{0, 1, 0, 0}, Quaternion{0, 0, 1, 0}};
    bool rotated = false;

    std::array<double, 3> operator()(const Quaternion& v) const {
        const double s = 1.0 - dot(v, pole);
        return {dot(v, basis[0]) / s, dot(v, basis[1]) / s, dot(v, basis[2]) / s};
    }
};

inline Stereographic make_stereographic(const Quaternion& pole) {
    Stereographic s;
    s.pole = pole.normalized();
    const std::array<Quaternion, 4> std_basis{Quaternion{1, 0, 0, 0}, Quaternion{0, 1, 0, 0}, Quaternion{0, 0, 1, 0},
                                              Quaternion{0, 0, 0, 1}};
    int filled = 0;
    for (const auto& e : std_basis) {
        if (filled == 3) break;
        Quaternion v = e - dot(e, s.pole) * s.pole;
        for (int k = 0; k < filled; ++k) v -= dot(v, s.basis[static_cast<std::size_t>(k)]) * s.basis[static_cast<std::size_t>(k)];
        if (v.norm() > 1e-6) s.basis[static_cast<std::size_t>(filled++)] = v.normalized();
    }
    return s;
}

/// Projection from (0,0,0,1) unless a vertex lies within 1e-3 of it; then
/// the candidate pole farthest from all vertices is used.
inline Stereographic choose_projection(const std::vector<Quaternion>& vertices) {
    auto clearance = [&](const Quaternion& p) {
        double d = std::numeric_limits<double>::infinity();
        for (const auto& v : vertices) d = std::min(d, distance(v, p));
        return d;
    };
    const Quaternion k{0, 0, 0, 1};
    if (clearance(k) >= 1e-3) return make_stereographic(k);
    std::vector<Quaternion> candidates;
    const double r = 0.5;
    for (int a = -1; a <= 1; a += 2)
        for (int b = -1; b <= 1; b += 2)
            for (int c = -1; c <= 1; c += 2)
                for (int d = -1; d <= 1; d += 2) candidates.push_back({r * a, r * b, r * c, r * d});
    for (int s = -1; s <= 1; s += 2) {
        candidates.push_back({1.0 * s, 0, 0, 0});
        candidates.push_back({0, 1.0 * s, 0, 0});
        candidates.push_back({0, 0, 1.0 * s, 0});
        candidates.push_back({0, 0, 0, 1.0 * s});
    }
    Quaternion best = candidates.front();
    double bestd = -1;
    for (const auto& p : candidates) {
        const double d = clearance(p);
        if (d > bestd) {
            bestd = d;
            best = p;
        }
    }
    Stereographic s = make_stereographic(best);
    s.rotated = true;
    return s;
}

struct ObjHeader {
    double period = 0.0;
    std::optional<double> theta;
};

inline void write_obj(std::ostream& os, const TorusMesh& mesh, const ObjHeader& hdr) {
    const Stereographic proj = choose_projection(mesh.vertices);
    os << std::setprecision(17);
    os << "# ewlab torus mesh\n";
    os << "# seifert m=" << mesh.st.m << " n=" << mesh.st.n << "\n";
    os << "# period " << hdr.period << "\n";
    os << "# pole " << proj.pole.w << " " << proj.pole.x << " " << proj.pole.y << " " << proj.pole.z
       << (proj.rotated ? " (rotated)" : "") << "\n";
    if (hdr.theta) os << "# monodromy_theta " << *hdr.theta << "\n";
    os << "# grid " << mesh.nx << " x " << mesh.ny << (mesh.wrap_y ? " closed" : " open") << "\n";
    for (const auto& v : mesh.vertices) {
        const auto p = proj(v);
        os << "v " << p[0] << " " << p[1] << " " << p[2] << "\n";
    }
    for (const auto& f : mesh.faces) os << "f " << f[0] + 1 << " " << f[1] + 1 << " " << f[2] + 1 << " " << f[3] + 1 << "\n";
}

inline void write_curve_csv(std::ostream& os, const ProfileCurve& c, const Trajectory& t) {
    os << std::setprecision(17);
    os << "y,gamma_w,gamma_x,gamma_y,gamma_z,re_q,im_q,h\n";
    for (const auto& s : c.samples) {
        const cplx q = t.q_at(s.y);
        os << s.y << "," << s.gamma.w << "," << s.gamma.x << "," << s.gamma.y << "," << s.gamma.z << "," << q.real() << ","
           << q.imag() << "," << fiber_speed(s.gamma, c.st) << "\n";
    }
}

}  // namespace ewlab
