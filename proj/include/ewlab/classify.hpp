#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ewlab/killing.hpp"
#include "ewlab/spectral.hpp"

namespace ewlab {

inline constexpr int kGenusAbove3 = 4;

struct ClassifyOptions {
    double tol_flow = 1e-6;  // absolute, scaled by max(1, |q|^4)
    double tol_sym = 1e-8;   // absolute, scaled by max(1, |q|^4); det X odd part is relative
    std::size_t det_probes = 64;
};

struct GenusEvidence {
    int genus = 0;
    bool identifiable = true;
    std::string note;
    GenusConstants constants;
    double flow_residual = 0.0;
    double sym_residual = 0.0;
    double det_odd_residual = 0.0;
    bool passed = false;
};

struct Classification {
    int genus = kGenusAbove3;
    std::vector<GenusEvidence> evidence;
    std::optional<cplx> isothermic_mu;

    bool isothermic() const { return isothermic_mu.has_value(); }
};

inline std::string genus_label(int g) { return g >= kGenusAbove3 ? std::string("above3") : std::to_string(g); }

inline GenusEvidence genus_evidence(const Trajectory& t, int genus, const ClassifyOptions& opt) {
    GenusEvidence ev;
    ev.genus = genus;
    const double qmax = t.max_abs_q();
    const double scale = std::max(1.0, qmax * qmax * qmax * qmax);
    try {
        const ConstantFit fit = fit_constants(t, genus);
        ev.constants = fit.constants;
        ev.flow_residual = fit.max_residual;
    } catch (const Error& e) {
        ev.identifiable = false;
        ev.note = e.what();
        return ev;
    }
    const GenusConstants& k = ev.constants;
    double sym = 0;
    for (const auto& j : t.jets) {
        switch (genus) {
            case 1: sym = std::max(sym, sym1(j)); break;
            case 2: sym = std::max({sym, std::abs(k.d), sym2(j)}); break;
            case 3: sym = std::max({sym, std::abs(k.d), sym3(j, k.c)}); break;
            default: break;
        }
    }
    ev.sym_residual = sym;
    const std::size_t stride = std::max<std::size_t>(1, t.jets.size() / std::max<std::size_t>(1, opt.det_probes));
    for (std::size_t i = 0; i < t.jets.size(); i += stride)
        ev.det_odd_residual = std::max(ev.det_odd_residual, check_symmetries(det_killing(build_killing_field(t.jets[i], k, genus))).evenness);
    ev.passed = ev.flow_residual < opt.tol_flow * scale && ev.sym_residual < opt.tol_sym * scale &&
                ev.det_odd_residual < opt.tol_sym;
    return ev;
}

/// Smallest genus whose stationary flow and sigma-symmetry conditions hold
/// along the trajectory. Evidence is collected for every genus 0..3.
inline Classification genus_classify(const Trajectory& t, const ClassifyOptions& opt = {}) {
    const double qmax = t.max_abs_q();
    if (qmax < 1e-10) fail(ErrorKind::numerical, "degenerate (totally umbilic)");
    Classification out;
    for (int g = 0; g <= 3; ++g) {
        out.evidence.push_back(genus_evidence(t, g, opt));
        if (out.evidence.back().passed && out.genus == kGenusAbove3) out.genus = g;
    }
    out.isothermic_mu = isothermic_detect(t, opt.tol_flow * std::max(1.0, qmax));
    return out;
}

}  // namespace ewlab
