#pragma once

#include <cmath>
#include <vector>

#include "ewlab/algebra.hpp"
#include "ewlab/killing.hpp"

namespace ewlab {

inline CPoly det_killing(const KillingField& f) {
    std::vector<cplx> a, b, c, d;
    for (const Mat2C& X : f.X) {
        a.push_back(X(0, 0));
        b.push_back(X(0, 1));
        c.push_back(X(1, 0));
        d.push_back(X(1, 1));
    }
    return CPoly{a} * CPoly{d} - CPoly{b} * CPoly{c};
}

struct SymmetryResiduals {
    double evenness = 0.0;
    double reality = 0.0;
};

inline SymmetryResiduals check_symmetries(const CPoly& P) {
    const double m = P.max_abs();
    if (!(m > 0)) fail(ErrorKind::numerical, "zero polynomial");
    SymmetryResiduals s;
    for (std::size_t k = 0; k < P.c.size(); ++k) {
        if (k % 2 == 1) s.evenness = std::max(s.evenness, std::abs(P.c[k]) / m);
        s.reality = std::max(s.reality, std::abs(P.c[k].imag()) / m);
    }
    return s;
}

struct SpectralCurveData {
    CPoly P;
    std::vector<RootMultiplicity> roots;          // all finite roots
    std::vector<RootMultiplicity> branch_points;  // odd multiplicity only
    int genus = -1;
    bool singular = false;   // some root of even multiplicity
    bool reducible = false;  // P is a perfect square
    double evenness_residual = 0.0;
    double reality_residual = 0.0;

    std::vector<cplx> branch_values() const {
        std::vector<cplx> out;
        for (const auto& r : branch_points) out.push_back(r.root);
        return out;
    }
};

inline SpectralCurveData curve_from_polynomial(const CPoly& P, double tol) {
    SpectralCurveData s;
    s.P = P;
    const SymmetryResiduals sym = check_symmetries(P);
    s.evenness_residual = sym.evenness;
    s.reality_residual = sym.reality;
    s.roots = poly_roots(P, tol);
    for (const auto& r : s.roots) {
        if (r.multiplicity % 2 == 1)
            s.branch_points.push_back(r);
        else
            s.singular = true;
    }
    if (s.branch_points.empty()) {
        s.reducible = true;
        s.genus = -1;
    } else {
        s.genus = static_cast<int>(s.branch_points.size()) / 2 - 1;
    }
    return s;
}

inline SpectralCurveData curve_from_field(const KillingField& f, double tol = 1e-8) {
    const CPoly P = det_killing(f);
    const SymmetryResiduals sym = check_symmetries(P);
    if (sym.evenness > 1e-6 || sym.reality > 1e-6) fail(ErrorKind::invariant, "symmetry residuals exceed 1e-6");
    return curve_from_polynomial(P, tol);
}

struct InvolutionDefects {
    double sigma = 0.0;  // a -> -a
    double rho = 0.0;    // a -> conj(a)
};

inline InvolutionDefects involution_defects(const std::vector<cplx>& pts) {
    return {set_symmetry_defect(pts, [](cplx a) { return -a; }),
            set_symmetry_defect(pts, [](cplx a) { return std::conj(a); })};
}

/// Largest coefficient deviation of det X along the trajectory, relative to
/// the largest coefficient at the first sample.
inline double spectral_invariance(const Trajectory& t, const GenusConstants& k, int genus) {
    const CPoly P0 = det_killing(build_killing_field(t.front(), k, genus));
    const double scale = P0.max_abs();
    double worst = 0;
    for (const auto& j : t.jets) {
        const CPoly P = det_killing(build_killing_field(j, k, genus));
        for (std::size_t i = 0; i < P.c.size(); ++i) worst = std::max(worst, std::abs(P.c[i] - P0.coeff(static_cast<int>(i))));
    }
    return worst / scale;
}

}  // namespace ewlab
