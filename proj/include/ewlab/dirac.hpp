#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <vector>

#include "ewlab/algebra.hpp"
#include "ewlab/elflow.hpp"
#include "ewlab/killing.hpp"
#include "ewlab/spectral.hpp"

namespace ewlab {

/// Transfer matrix H(a) = Phi(L) of Phi' = -L(a, y) Phi, Phi(0) = 1.
struct TransferSample {
    cplx a;
    Mat2C H = Mat2C::Identity();
    cplx delta;               // trace H
    cplx ddelta{0.0, 0.0};    // d(trace H)/da, when requested
};

inline void check_periodic_potential(const Trajectory& t, double tol = 1e-6) {
    const double s = std::max(1.0, t.max_abs_q());
    if (std::abs(t.back().q - t.front().q) > tol * s || std::abs(t.back().q1 - t.front().q1) > tol * s)
        fail(ErrorKind::numerical, "aperiodic potential");
}

namespace detail {

inline std::pair<Mat2C, Mat2C> transfer_rhs(cplx q, cplx a, const Mat2C& phi, const Mat2C& psi, bool variational) {
    const Mat2C L = lax_matrix(q, a);
    Mat2C dphi = -L * phi;
    Mat2C dpsi = Mat2C::Zero();
    if (variational) {
        const Mat2C La = mat2(-I, 0.0, 0.0, I);
        dpsi = -L * psi - La * phi;
    }
    return {dphi, dpsi};
}

}  // namespace detail

inline TransferSample transfer_matrix(const Trajectory& t, cplx a, double step, bool with_derivative = false) {
    check_periodic_potential(t);
    const double L = t.length();
    const long n = std::max<long>(200, static_cast<long>(std::ceil(L / step - 1e-9)));
    const double h = L / static_cast<double>(n);
    const double y0 = t.front().y;

    Mat2C phi = Mat2C::Identity();
    Mat2C psi = Mat2C::Zero();
    cplx q_start = t.front().q;
    for (long k = 0; k < n; ++k) {
        const double y = y0 + h * static_cast<double>(k);
        const cplx q_mid = t.q_at(y + 0.5 * h);
        const cplx q_end = (k + 1 == n) ? t.back().q : t.q_at(y + h);
        const auto k1 = detail::transfer_rhs(q_start, a, phi, psi, with_derivative);
        const auto k2 = detail::transfer_rhs(q_mid, a, phi + 0.5 * h * k1.first, psi + 0.5 * h * k1.second, with_derivative);
        const auto k3 = detail::transfer_rhs(q_mid, a, phi + 0.5 * h * k2.first, psi + 0.5 * h * k2.second, with_derivative);
        const auto k4 = detail::transfer_rhs(q_end, a, phi + h * k3.first, psi + h * k3.second, with_derivative);
        phi += h / 6.0 * (k1.first + 2.0 * k2.first + 2.0 * k3.first + k4.first);
        if (with_derivative) psi += h / 6.0 * (k1.second + 2.0 * k2.second + 2.0 * k3.second + k4.second);
        q_start = q_end;
    }
    TransferSample s;
    s.a = a;
    s.H = phi;
    s.delta = phi.trace();
    if (with_derivative) s.ddelta = psi.trace();
    return s;
}

inline unsigned resolve_threads(unsigned requested) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    return requested == 0 ? hw : requested;
}

/// Transfer samples over a grid, computed in parallel; output order matches
/// the input order.
inline std::vector<TransferSample> discriminant_scan(const Trajectory& t, const std::vector<cplx>& grid, double step,
                                                     unsigned threads = 0) {
    check_periodic_potential(t);
    std::vector<TransferSample> out(grid.size());
    const unsigned nt = std::min<unsigned>(resolve_threads(threads), static_cast<unsigned>(std::max<std::size_t>(1, grid.size())));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < grid.size(); i = next++) out[i] = transfer_matrix(t, grid[i], step);
    };
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < nt; ++k) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    return out;
}

/// ||[X, H]||_F / (||X||_F ||H||_F).
inline double commutator_defect(const Mat2C& X, const Mat2C& H) {
    return commutator(X, H).norm() / (X.norm() * H.norm());
}

struct SearchBox {
    double re_min = -3, re_max = 3, im_min = -3, im_max = 3;
    bool contains(cplx a) const {
        return a.real() >= re_min && a.real() <= re_max && a.imag() >= im_min && a.imag() <= im_max;
    }
};

struct BranchMatch {
    cplx branch_point;
    cplx zero;
    double distance = 0.0;
    int order = 0;
    bool matched = false;
};

struct BranchMatchReport {
    std::vector<BranchMatch> matches;
    bool all_matched = true;
    double tol = 0.0;
};

/// Winding number of Delta^2 - 4 around a small circle.
inline int discriminant_zero_order(const Trajectory& t, cplx center, double radius, double step, int samples = 32) {
    double total = 0;
    cplx prev{};
    for (int k = 0; k <= samples; ++k) {
        const cplx a = center + radius * std::polar(1.0, 2.0 * kPi * k / samples);
        const cplx d = transfer_matrix(t, a, step).delta;
        const cplx g = d * d - 4.0;
        if (k > 0) total += std::arg(g / prev);
        prev = g;
    }
    return static_cast<int>(std::lround(std::abs(total) / (2.0 * kPi)));
}

/// Newton refinement of Delta^2 - 4 = 0 from each branch point of det X,
/// followed by an order check. Fails with "refine grid" when the refinement
/// does not settle near the branch point.
inline BranchMatchReport branch_match(const SpectralCurveData& curve, const Trajectory& t, const SearchBox& box,
                                      double tol, double step) {
    BranchMatchReport rep;
    rep.tol = tol;
    const std::vector<cplx> bps = curve.branch_values();
    for (cplx bp : bps) {
        if (!box.contains(bp)) continue;
        cplx a = bp;
        bool converged = false;
        for (int it = 0; it < 40; ++it) {
            const TransferSample s = transfer_matrix(t, a, step, true);
            const cplx g = s.delta * s.delta - 4.0;
            const cplx dg = 2.0 * s.delta * s.ddelta;
            if (std::abs(g) == 0.0) {
                converged = true;
                break;
            }
            if (std::abs(dg) == 0.0) break;
            const cplx delta = g / dg;
            a -= delta;
            if (std::abs(a - bp) > 0.1 * (1.0 + std::abs(bp))) break;
            if (std::abs(delta) < 1e-13 * (1.0 + std::abs(a))) {
                converged = true;
                break;
            }
        }
        if (!converged) fail(ErrorKind::numerical, "refine grid");
        double sep = 1e-3;
        for (cplx other : bps)
            if (other != bp) sep = std::min(sep, 0.3 * std::abs(other - bp));
        BranchMatch m;
        m.branch_point = bp;
        m.zero = a;
        m.distance = std::abs(a - bp);
        m.order = discriminant_zero_order(t, a, std::max(sep, 1e-6), step);
        m.matched = m.distance < tol && (m.order % 2 == 1);
        rep.all_matched = rep.all_matched && m.matched;
        rep.matches.push_back(m);
    }
    return rep;
}

}  // namespace ewlab
