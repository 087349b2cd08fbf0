#pragma once

#include <array>
#include <cmath>
#include <vector>

#include <Eigen/SVD>

#include "ewlab/algebra.hpp"
#include "ewlab/elflow.hpp"

namespace ewlab {

struct GenusConstants {
    double c = 0.0;
    double d = 0.0;
    double e = 0.0;
    double dtilde = 0.0;
};

/// X(a) = sum_i X[i] a^i, normalized so that X[p+1] = diag(-i, i).
struct KillingField {
    int genus = 0;
    std::vector<Mat2C> X;
    GenusConstants constants;
    double y = 0.0;

    Mat2C operator()(cplx a) const {
        Mat2C acc = Mat2C::Zero();
        for (auto it = X.rbegin(); it != X.rend(); ++it) acc = acc * a + *it;
        return acc;
    }
};

/// The Lax matrix L(a) = [[-ia, 2i conj q], [2iq, ia]].
inline Mat2C lax_matrix(cplx q, cplx a) { return mat2(-I * a, 2.0 * I * std::conj(q), 2.0 * I * q, I * a); }

namespace detail {

// Coefficient [[-i b, 2i conj p], [2i p, i b]].
inline Mat2C bp_block(double b, cplx p) { return mat2(-I * b, 2.0 * I * std::conj(p), 2.0 * I * p, I * b); }

// Level k of the recursion counted from the top (level 0 = diag(-i, i)).
inline Mat2C killing_level(int level, const HopfJet& j, const GenusConstants& k) {
    const cplx q = j.q, q1 = j.q1, q2 = j.q2, q3 = j.q3;
    const double n = std::norm(q);
    switch (level) {
        case 0:
            return mat2(-I, 0.0, 0.0, I);
        case 1:
            return bp_block(0.0, q);
        case 2: {
            const double b0 = -2.0 * (n + k.c);
            const cplx p0 = 0.5 * I * q1;
            return bp_block(b0, p0);
        }
        case 3: {
            const double b1 = -2.0 * std::imag(std::conj(q1) * q) + k.d;
            const cplx p1 = -2.0 * (n + k.c) * q - 0.25 * q2;
            return bp_block(b1, p1);
        }
        case 4: {
            const double b2 = 6.0 * n * n + 4.0 * k.c * n + std::real(q2 * std::conj(q)) - 0.5 * std::norm(q1) + k.e;
            const cplx p2 = -0.5 * I * (2.0 * k.c * q1 + 2.0 * I * k.d * q + 6.0 * n * q1 + 0.25 * q3);
            return bp_block(b2, p2);
        }
        default:
            fail(ErrorKind::config, "Killing field level out of range");
    }
}

}  // namespace detail

inline KillingField build_killing_field(const HopfJet& jet, const GenusConstants& constants, int genus) {
    if (genus < 0 || genus > 3) fail(ErrorKind::config, "genus must be in {0,1,2,3}");
    KillingField f;
    f.genus = genus;
    f.constants = constants;
    f.y = jet.y;
    f.X.resize(static_cast<std::size_t>(genus) + 2);
    for (int level = 0; level <= genus + 1; ++level)
        f.X[static_cast<std::size_t>(genus + 1 - level)] = detail::killing_level(level, jet, constants);
    return f;
}

inline const std::array<cplx, 7>& lax_probe_points() {
    static const std::array<cplx, 7> pts{cplx{0, 0}, cplx{1, 0}, cplx{-1, 0}, cplx{0, 1}, cplx{0, -1}, cplx{2, 0}, cplx{-2, 0}};
    return pts;
}

/// max |dX/dy - [X, L]| over samples and probe points, with dX/dy from
/// five-point central differences along the trajectory.
inline double lax_residual(const Trajectory& t, const GenusConstants& constants, int genus) {
    const auto& J = t.jets;
    if (J.size() < 5) fail(ErrorKind::config, "need at least 5 jets for the Lax residual");
    std::vector<KillingField> fields;
    fields.reserve(J.size());
    for (const auto& j : J) fields.push_back(build_killing_field(j, constants, genus));
    double worst = 0;
    for (std::size_t k = 2; k + 2 < J.size(); ++k) {
        for (cplx a : lax_probe_points()) {
            const Mat2C dX = (fields[k - 2](a) - 8.0 * fields[k - 1](a) + 8.0 * fields[k + 1](a) - fields[k + 2](a)) / (12.0 * t.step);
            const Mat2C X = fields[k](a);
            worst = std::max(worst, max_abs_entry(dX - commutator(X, lax_matrix(J[k].q, a))));
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Stationary flow equations
// ---------------------------------------------------------------------------

inline cplx flow1(const HopfJet& j, double c) { return j.q2 + 8.0 * (std::norm(j.q) + c) * j.q; }

inline cplx flow2(const HopfJet& j, double c, double d) {
    return j.q3 + 24.0 * std::norm(j.q) * j.q1 + 8.0 * c * j.q1 + 8.0 * I * d * j.q;
}

inline cplx flow3(const HopfJet& j, double c, double d, double e) {
    const cplx q = j.q, q1 = j.q1, q2 = j.q2;
    const double n = std::norm(q);
    return j.q4 + 96.0 * n * n * q + 16.0 * std::norm(q1) * q + 24.0 * q1 * q1 * std::conj(q) +
           8.0 * std::conj(q2) * q * q + 32.0 * n * q2 + 8.0 * c * (q2 + 8.0 * n * q) + 16.0 * e * q + 8.0 * I * d * q1;
}

inline double sym1(const HopfJet& j) { return std::abs(std::imag(j.q1 * std::conj(j.q))); }
inline double sym2(const HopfJet& j) { return 0.25 * std::abs(std::imag(j.q2 * std::conj(j.q1))); }
inline double sym3(const HopfJet& j, double c) {
    const cplx q = j.q, qb = std::conj(j.q);
    return std::abs(std::imag(j.q3 * qb + 24.0 * std::norm(q) * qb * j.q1 + 8.0 * c * qb * j.q1 + std::conj(j.q2) * j.q1));
}

struct FlowResiduals {
    double g0 = 0, g1 = 0, g2 = 0, g3 = 0;
    double sym1 = 0, sym2 = 0, sym3 = 0;
};

inline FlowResiduals flow_residuals(const HopfJet& j, const GenusConstants& k) {
    FlowResiduals r;
    r.g0 = std::abs(j.q1);
    r.g1 = std::abs(flow1(j, k.c));
    r.g2 = std::abs(flow2(j, k.c, k.d));
    r.g3 = std::abs(flow3(j, k.c, k.d, k.e));
    r.sym1 = sym1(j);
    r.sym2 = sym2(j);
    r.sym3 = sym3(j, k.c);
    return r;
}

inline double flow_residual(const HopfJet& j, const GenusConstants& k, int genus) {
    switch (genus) {
        case 0: return std::abs(j.q1);
        case 1: return std::abs(flow1(j, k.c));
        case 2: return std::abs(flow2(j, k.c, k.d));
        case 3: return std::abs(flow3(j, k.c, k.d, k.e));
        default: fail(ErrorKind::config, "genus must be in {0,1,2,3}");
    }
}

// ---------------------------------------------------------------------------
// Least-squares constants
// ---------------------------------------------------------------------------

struct ConstantFit {
    GenusConstants constants;
    double max_residual = 0.0;
    double rms_residual = 0.0;
};

namespace detail {

// flow = base + sum_u cols[u] * unknown_u, unknowns ordered (c, d, e).
struct FlowRow {
    cplx base;
    std::array<cplx, 3> cols{};
};

inline FlowRow flow_row(const HopfJet& j, int genus) {
    const cplx q = j.q, q1 = j.q1, q2 = j.q2;
    const double n = std::norm(q);
    FlowRow row;
    switch (genus) {
        case 1:
            row.base = j.q2 + 8.0 * n * q;
            row.cols[0] = 8.0 * q;
            break;
        case 2:
            row.base = j.q3 + 24.0 * n * q1;
            row.cols[0] = 8.0 * q1;
            row.cols[1] = 8.0 * I * q;
            break;
        case 3:
            row.base = flow3(j, 0.0, 0.0, 0.0);
            row.cols[0] = 8.0 * (q2 + 8.0 * n * q);
            row.cols[1] = 8.0 * I * q1;
            row.cols[2] = 16.0 * q;
            break;
        default:
            break;
    }
    return row;
}

}  // namespace detail

inline ConstantFit fit_constants(const Trajectory& t, int genus) {
    if (genus < 0 || genus > 3) fail(ErrorKind::config, "genus must be in {0,1,2,3}");
    if (t.jets.size() < 100) fail(ErrorKind::config, "fit_constants needs at least 100 samples");
    ConstantFit fit;
    if (t.params.lambda_is_real()) fit.constants.dtilde = first_integral(t.front(), t.params);

    if (genus > 0) {
        const int nu = genus;
        const Eigen::Index rows = static_cast<Eigen::Index>(2 * t.jets.size());
        Eigen::MatrixXd A(rows, nu);
        Eigen::VectorXd b(rows);
        for (std::size_t k = 0; k < t.jets.size(); ++k) {
            const detail::FlowRow row = detail::flow_row(t.jets[k], genus);
            const Eigen::Index r = static_cast<Eigen::Index>(2 * k);
            for (int u = 0; u < nu; ++u) {
                A(r, u) = row.cols[static_cast<std::size_t>(u)].real();
                A(r + 1, u) = row.cols[static_cast<std::size_t>(u)].imag();
            }
            b(r) = -row.base.real();
            b(r + 1) = -row.base.imag();
        }
        Eigen::VectorXd scale(nu);
        for (int u = 0; u < nu; ++u) {
            scale(u) = A.col(u).norm();
            if (!(scale(u) > 1e-12 * std::sqrt(static_cast<double>(rows)))) fail(ErrorKind::numerical, "constants unidentifiable");
            A.col(u) /= scale(u);
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();
        if (sv(nu - 1) < 1e-9 * sv(0)) fail(ErrorKind::numerical, "constants unidentifiable");
        const Eigen::VectorXd x = svd.solve(b);
        fit.constants.c = x(0) / scale(0);
        if (nu > 1) fit.constants.d = x(1) / scale(1);
        if (nu > 2) fit.constants.e = x(2) / scale(2);
    }
    double sum = 0;
    for (const auto& j : t.jets) {
        const double r = flow_residual(j, fit.constants, genus);
        fit.max_residual = std::max(fit.max_residual, r);
        sum += r * r;
    }
    fit.rms_residual = std::sqrt(sum / static_cast<double>(t.jets.size()));
    return fit;
}

/// Genus-3 constants of an EL solution with real lambda:
/// c = 2C - lambda/4 and e = 4C^2 - C lambda - d~/2.
inline GenusConstants constants_from_el(const ELParams& p, double dtilde) {
    if (!p.lambda_is_real()) fail(ErrorKind::numerical, "rotate λ first");
    const double lam = p.lambda.real();
    GenusConstants k;
    k.c = (8.0 * p.C - lam) / 4.0;
    k.e = -(dtilde + 8.0 * p.C * p.C - 8.0 * k.c * p.C) / 2.0;
    k.dtilde = dtilde;
    return k;
}

/// The same constants with e = -(d~ + 8C^2 + 8cC)/2, which only matches
/// the genus-3 flow when C = 0 or lambda = 8C. Kept for comparison runs.
inline GenusConstants constants_from_el_literal(const ELParams& p, double dtilde) {
    GenusConstants k = constants_from_el(p, dtilde);
    k.e = -(dtilde + 8.0 * p.C * p.C + 8.0 * k.c * p.C) / 2.0;
    return k;
}

}  // namespace ewlab
