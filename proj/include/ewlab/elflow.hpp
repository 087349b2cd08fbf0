#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

#include "ewlab/algebra.hpp"

namespace ewlab {

/// Multiplier lambda and constant C of the Euler-Lagrange system.
struct ELParams {
    cplx lambda{0.0, 0.0};
    double C = 0.0;

    bool lambda_is_real(double tol = 1e-12) const { return std::abs(lambda.imag()) <= tol * std::max(1.0, std::abs(lambda)); }
};

/// q and four derivatives plus xi = i r at parameter y.
struct HopfJet {
    cplx q, q1, q2, q3, q4;
    double r = 0.0;
    double y = 0.0;

    cplx xi() const { return {0.0, r}; }
};

struct ELDerivative {
    cplx dq;    // q'
    cplx dq1;   // q''
    double dr;  // xi' / i
};

/// Right-hand side of q'' = 2 Re(lambda q) - 8(|q|^2 + C) q + 8 xi q, xi' = (conj(q') q - q' conj(q)) / 2.
inline ELDerivative el_rhs(cplx q, cplx q1, double r, const ELParams& p) {
    const cplx q2 = 2.0 * std::real(p.lambda * q) - 8.0 * (std::norm(q) + p.C) * q + 8.0 * I * r * q;
    return {q1, q2, std::imag(std::conj(q1) * q)};
}
inline ELDerivative el_rhs(const HopfJet& j, const ELParams& p) { return el_rhs(j.q, j.q1, j.r, p); }

/// Fill q'', q''', q'''' from (q, q', r) by differentiating the flow.
inline HopfJet complete_jet(cplx q, cplx q1, double r, double y, const ELParams& p) {
    HopfJet j;
    j.q = q;
    j.q1 = q1;
    j.r = r;
    j.y = y;
    const double n = std::norm(q);
    const double n1 = 2.0 * std::real(std::conj(q) * q1);
    const double r1 = std::imag(std::conj(q1) * q);
    j.q2 = el_rhs(q, q1, r, p).dq1;
    const cplx q2 = j.q2;
    j.q3 = 2.0 * std::real(p.lambda * q1) - 8.0 * (n1 * q + (n + p.C) * q1) + 8.0 * I * (r1 * q + r * q1);
    const double n2 = 2.0 * (std::norm(q1) + std::real(std::conj(q) * q2));
    const double r2 = std::imag(std::conj(q2) * q);
    j.q4 = 2.0 * std::real(p.lambda * q2) - 8.0 * (n2 * q + 2.0 * n1 * q1 + (n + p.C) * q2) +
           8.0 * I * (r2 * q + 2.0 * r1 * q1 + r * q2);
    return j;
}
inline HopfJet complete_jet(const HopfJet& seed, const ELParams& p) { return complete_jet(seed.q, seed.q1, seed.r, seed.y, p); }

/// Uniformly sampled solution of a q-flow.
struct Trajectory {
    std::vector<HopfJet> jets;
    double step = 0.0;
    ELParams params;

    std::size_t size() const { return jets.size(); }
    double length() const { return jets.empty() ? 0.0 : step * static_cast<double>(jets.size() - 1); }
    const HopfJet& front() const { return jets.front(); }
    const HopfJet& back() const { return jets.back(); }

    double max_abs_q() const {
        double m = 0;
        for (const auto& j : jets) m = std::max(m, std::abs(j.q));
        return m;
    }

    /// q at arbitrary y in [0, length] by quintic Hermite interpolation of (q, q', q'').
    cplx q_at(double y) const {
        const double s = (y - jets.front().y) / step;
        long k = static_cast<long>(std::floor(s));
        k = std::clamp<long>(k, 0, static_cast<long>(jets.size()) - 2);
        const double t = s - static_cast<double>(k);
        const HopfJet& a = jets[static_cast<std::size_t>(k)];
        const HopfJet& b = jets[static_cast<std::size_t>(k) + 1];
        const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
        const double h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
        const double h1 = t - 6 * t3 + 8 * t4 - 3 * t5;
        const double h2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
        const double h3 = 0.5 * t3 - t4 + 0.5 * t5;
        const double h4 = -4 * t3 + 7 * t4 - 3 * t5;
        const double h5 = 10 * t3 - 15 * t4 + 6 * t5;
        const double d = step;
        return h0 * a.q + d * h1 * a.q1 + d * d * h2 * a.q2 + d * d * h3 * b.q2 + d * h4 * b.q1 + h5 * b.q;
    }

    /// Uniform spacing and agreement of stored q' with central differences of q.
    void validate() const {
        if (jets.size() < 3) fail(ErrorKind::invariant, "trajectory needs at least 3 jets");
        for (std::size_t k = 1; k < jets.size(); ++k)
            if (std::abs(jets[k].y - jets[k - 1].y - step) > 1e-9 * std::max(1.0, std::abs(jets[k].y)))
                fail(ErrorKind::invariant, "trajectory spacing is not uniform");
        for (std::size_t k = 1; k + 1 < jets.size(); ++k) {
            const cplx fd = (jets[k + 1].q - jets[k - 1].q) / (2.0 * step);
            const double tol = 10.0 * step * step * std::max(1.0, std::abs(jets[k].q3));
            if (std::abs(fd - jets[k].q1) > tol) {
                std::ostringstream os;
                os << "jet consistency violated at y=" << jets[k].y << " (stored q' disagrees with finite differences)";
                fail(ErrorKind::invariant, os.str());
            }
        }
    }
};

namespace detail {

struct ELState {
    cplx q, q1;
    double r;
};

inline ELState el_rk4_step(const ELState& s, const ELParams& p, double h) {
    auto f = [&](const ELState& z) { return el_rhs(z.q, z.q1, z.r, p); };
    auto add = [](const ELState& z, const ELDerivative& d, double c) {
        return ELState{z.q + c * d.dq, z.q1 + c * d.dq1, z.r + c * d.dr};
    };
    const ELDerivative k1 = f(s);
    const ELDerivative k2 = f(add(s, k1, 0.5 * h));
    const ELDerivative k3 = f(add(s, k2, 0.5 * h));
    const ELDerivative k4 = f(add(s, k3, h));
    return {s.q + h / 6.0 * (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq),
            s.q1 + h / 6.0 * (k1.dq1 + 2.0 * k2.dq1 + 2.0 * k3.dq1 + k4.dq1),
            s.r + h / 6.0 * (k1.dr + 2.0 * k2.dr + 2.0 * k3.dr + k4.dr)};
}

inline bool el_state_finite(const ELState& s) {
    const double bound = 1e150;
    return std::isfinite(s.q.real()) && std::isfinite(s.q.imag()) && std::isfinite(s.q1.real()) &&
           std::isfinite(s.q1.imag()) && std::isfinite(s.r) && std::abs(s.q) < bound && std::abs(s.q1) < bound &&
           std::abs(s.r) < bound;
}

}  // namespace detail

/// Classical RK4 over [0, length]; the step is adjusted so it divides the length.
inline Trajectory integrate_el(const HopfJet& initial, const ELParams& params, double length, double step) {
    if (!(step > 0) || !(length > 0)) fail(ErrorKind::config, "step and length must be positive");
    if (step > length / 100.0 * (1 + 1e-12)) fail(ErrorKind::config, "step must be at most length/100");
    const long n = std::max<long>(1, std::lround(length / step));
    const double h = length / static_cast<double>(n);

    Trajectory t;
    t.step = h;
    t.params = params;
    t.jets.reserve(static_cast<std::size_t>(n) + 1);
    detail::ELState s{initial.q, initial.q1, initial.r};
    const double y0 = initial.y;
    t.jets.push_back(complete_jet(s.q, s.q1, s.r, y0, params));
    for (long k = 1; k <= n; ++k) {
        s = detail::el_rk4_step(s, params, h);
        const double y = y0 + h * static_cast<double>(k);
        if (!detail::el_state_finite(s)) {
            std::ostringstream os;
            os << "blow-up at y=" << y;
            fail(ErrorKind::numerical, os.str());
        }
        t.jets.push_back(complete_jet(s.q, s.q1, s.r, y, params));
    }
    return t;
}

/// Pointwise EL residual |q'' - rhs| using the stored q''.
inline double el_residual(const HopfJet& j, const ELParams& p) { return std::abs(j.q2 - el_rhs(j, p).dq1); }

/// Max EL residual along a trajectory, including the xi equation checked by
/// fourth-order differences of r.
inline double el_residual(const Trajectory& t, const ELParams& p) {
    double worst = 0;
    for (const auto& j : t.jets) worst = std::max(worst, el_residual(j, p));
    const auto& J = t.jets;
    for (std::size_t k = 2; k + 2 < J.size(); ++k) {
        const double dr = (J[k - 2].r - 8.0 * J[k - 1].r + 8.0 * J[k + 1].r - J[k + 2].r) / (12.0 * t.step);
        worst = std::max(worst, std::abs(dr - el_rhs(J[k], p).dr));
    }
    return worst;
}

/// The conserved quantity d~ (requires real lambda).
inline double first_integral(const HopfJet& j, const ELParams& p) {
    if (!p.lambda_is_real()) fail(ErrorKind::numerical, "rotate λ first");
    const double n = std::norm(j.q);
    const double re = j.q.real();
    return -std::norm(j.q1) - 4.0 * n * n - 8.0 * j.r * j.r - 8.0 * p.C * n + 2.0 * p.lambda.real() * re * re;
}

inline double first_integral_drift(const Trajectory& t) {
    const double d0 = first_integral(t.front(), t.params);
    double worst = 0;
    for (const auto& j : t.jets) worst = std::max(worst, std::abs(first_integral(j, t.params) - d0));
    return worst;
}

// ---------------------------------------------------------------------------
// Associated family q -> q mu
// ---------------------------------------------------------------------------

inline ELParams associated_params(const ELParams& p, cplx mu) {
    const cplx shift = (mu * mu - 1.0) * std::conj(p.lambda) / 8.0;
    return {std::conj(mu) * std::conj(mu) * p.lambda, p.C + shift.real()};
}

inline void check_unit(cplx mu) {
    if (std::abs(std::abs(mu) - 1.0) > 1e-12) fail(ErrorKind::config, "associated family parameter must satisfy |mu| = 1");
}

struct AssociatedJet {
    HopfJet jet;
    ELParams params;
};

inline AssociatedJet associated_family(const HopfJet& j, const ELParams& p, cplx mu) {
    check_unit(mu);
    const cplx shift = (mu * mu - 1.0) * std::conj(p.lambda) / 8.0;
    HopfJet out = j;
    out.q *= mu;
    out.q1 *= mu;
    out.q2 *= mu;
    out.q3 *= mu;
    out.q4 *= mu;
    out.r += shift.imag();
    return {out, associated_params(p, mu)};
}

inline Trajectory associated_family(const Trajectory& t, cplx mu) {
    check_unit(mu);
    Trajectory out = t;
    out.params = associated_params(t.params, mu);
    for (auto& j : out.jets) j = associated_family(j, t.params, mu).jet;
    return out;
}

/// Rotate so that lambda becomes real and nonnegative.
inline Trajectory canonicalize(const Trajectory& t) {
    if (std::abs(t.params.lambda) == 0.0) return t;
    const cplx mu = std::sqrt(t.params.lambda / std::abs(t.params.lambda));
    Trajectory out = associated_family(t, mu);
    out.params.lambda = {out.params.lambda.real(), 0.0};
    return out;
}

// ---------------------------------------------------------------------------
// Isothermic and CMC helpers
// ---------------------------------------------------------------------------

inline std::optional<cplx> isothermic_detect(const Trajectory& t, double tol) {
    if (t.jets.empty()) fail(ErrorKind::config, "empty trajectory");
    std::size_t arg = 0;
    double best = -1;
    for (std::size_t k = 0; k < t.jets.size(); ++k) {
        const double a = std::abs(t.jets[k].q);
        if (a > best) {
            best = a;
            arg = k;
        }
    }
    if (best < std::max(tol, 1e-10)) fail(ErrorKind::numerical, "degenerate (totally umbilic)");
    const cplx mu = std::conj(t.jets[arg].q) / best;
    for (const auto& j : t.jets)
        if (std::abs(std::imag(j.q * mu)) >= tol) return std::nullopt;
    return mu;
}

struct CMCConstants {
    double C = 0.0;
    double H = 0.0;
};

inline CMCConstants cmc_family_shift(const CMCConstants& k, double r) { return {k.C + r, k.H + r}; }

/// Residual of q'' + 8 q^3 + C q = H q for real q.
inline double cmc_residual(double q, double q2, const CMCConstants& k) { return std::abs(q2 + 8.0 * q * q * q + k.C * q - k.H * q); }

/// Shift r that moves C to -1/4.
inline double revolution_shift(double C) { return -0.25 - C; }
inline CMCConstants normalize_to_revolution(const CMCConstants& k) { return cmc_family_shift(k, revolution_shift(k.C)); }

// ---------------------------------------------------------------------------
// Elastic curve equations
// ---------------------------------------------------------------------------

enum class ElasticKind { hyperbolic, sphere };

/// Max over interior samples of the elastic equation residual:
/// hyperbolic  k'' + k^3/2 - k = l1 k
/// sphere      k'' + k^3/2 + 2k = l1 k + l2
inline double elastic_residual(ElasticKind kind, const std::vector<double>& kappa, double dy, double lambda1,
                               double lambda2) {
    if (kappa.size() < 5) fail(ErrorKind::config, "need at least 5 curvature samples");
    double worst = 0;
    for (std::size_t k = 2; k + 2 < kappa.size(); ++k) {
        const double kk = kappa[k];
        const double k2 = (-kappa[k - 2] + 16.0 * kappa[k - 1] - 30.0 * kk + 16.0 * kappa[k + 1] - kappa[k + 2]) / (12.0 * dy * dy);
        double res = 0;
        if (kind == ElasticKind::hyperbolic)
            res = k2 + 0.5 * kk * kk * kk - kk - lambda1 * kk;
        else
            res = k2 + 0.5 * kk * kk * kk + 2.0 * kk - lambda1 * kk - lambda2;
        worst = std::max(worst, std::abs(res));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Period detection
// ---------------------------------------------------------------------------

/// Smallest L > 0 at which the EL state (q, q', r) returns to its initial
/// value. A Poincare section through the start, transverse to the initial
/// velocity, is crossed in the same direction and the crossing refined.
inline double find_period(const HopfJet& initial, const ELParams& params, double step, double max_length,
                          double closure_tol = 1e-6) {
    using detail::ELState;
    auto vec = [](const ELState& s) {
        return std::array<double, 5>{s.q.real(), s.q.imag(), s.q1.real(), s.q1.imag(), s.r};
    };
    const ELState s0{initial.q, initial.q1, initial.r};
    const ELDerivative d0 = el_rhs(s0.q, s0.q1, s0.r, params);
    const std::array<double, 5> z0 = vec(s0);
    const std::array<double, 5> v0{d0.dq.real(), d0.dq.imag(), d0.dq1.real(), d0.dq1.imag(), d0.dr};
    double vnorm = 0, scale = 1;
    for (int i = 0; i < 5; ++i) {
        vnorm += v0[static_cast<std::size_t>(i)] * v0[static_cast<std::size_t>(i)];
        scale = std::max(scale, std::abs(z0[static_cast<std::size_t>(i)]));
    }
    if (vnorm < 1e-24) fail(ErrorKind::numerical, "no period: initial state is an equilibrium");

    auto section = [&](const ELState& s) {
        const auto z = vec(s);
        double g = 0;
        for (std::size_t i = 0; i < 5; ++i) g += (z[i] - z0[i]) * v0[i];
        return g;
    };
    auto dist = [&](const ELState& s) {
        const auto z = vec(s);
        double d = 0;
        for (std::size_t i = 0; i < 5; ++i) d += (z[i] - z0[i]) * (z[i] - z0[i]);
        return std::sqrt(d);
    };

    ELState s = s0;
    double g = section(s);
    const long nmax = static_cast<long>(std::ceil(max_length / step));
    for (long k = 0; k < nmax; ++k) {
        const ELState next = detail::el_rk4_step(s, params, step);
        if (!detail::el_state_finite(next)) fail(ErrorKind::numerical, "blow-up during period search");
        const double gn = section(next);
        if (k > 0 && g < 0 && gn >= 0 && dist(next) < 0.05 * scale) {
            double lo = 0, hi = step, glo = g, ghi = gn;
            for (int it = 0; it < 80 && hi - lo > 1e-15 * step; ++it) {
                double mid = lo - glo * (hi - lo) / (ghi - glo);
                if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
                const double gm = section(detail::el_rk4_step(s, params, mid));
                if (gm < 0) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                    ghi = gm;
                }
                if (gm == 0) break;
            }
            const double tau = std::abs(glo) < std::abs(ghi) ? lo : hi;
            if (dist(detail::el_rk4_step(s, params, tau)) < closure_tol * scale)
                return step * static_cast<double>(k) + tau;
        }
        s = next;
        g = gn;
    }
    fail(ErrorKind::numerical, "no period found within the search length");
}

/// Trajectory sampled over exactly one period.
inline Trajectory integrate_period(const HopfJet& initial, const ELParams& params, double step, double max_length) {
    const double L = find_period(initial, params, step, max_length);
    return integrate_el(initial, params, L, std::min(step, L / 100.0));
}

}  // namespace ewlab
