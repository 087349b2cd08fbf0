#pragma once

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <openssl/evp.h>

#include "ewlab/config.hpp"
#include "ewlab/ewlab.hpp"
#include "ewlab/io.hpp"

namespace ewlab {

using nlohmann::json;

inline std::string sha256_hex(const std::string& text) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        fail(ErrorKind::numerical, "sha256 failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    return os.str();
}

/// Scan worker count: hardware concurrency, capped by EWLAB_THREADS.
inline unsigned scan_threads() {
    unsigned n = resolve_threads(0);
    if (const char* env = std::getenv("EWLAB_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || cap < 1) fail(ErrorKind::config, "EWLAB_THREADS must be a positive integer");
        n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    }
    return n;
}

struct RunResult {
    int exit_code = 0;
    std::vector<std::string> artifacts;
    std::vector<std::string> messages;
};

namespace pipeline {

inline json cplx_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline json constants_json(const GenusConstants& k) { return {{"c", k.c}, {"d", k.d}, {"e", k.e}, {"dtilde", k.dtilde}}; }

inline json poly_json(const CPoly& P) {
    json a = json::array();
    for (cplx c : P.c) a.push_back(cplx_json(c));
    return a;
}

inline json axis_json(const AxisSpec& a) { return {{"start", a.start}, {"stop", a.stop}, {"count", a.count}}; }

struct Context {
    const RunConfig& cfg;
    std::string hash;
    std::filesystem::path dir;
    RunResult result;

    json report() const { return {{"version", kVersion}, {"config_sha256", hash}, {"mode", mode_name(cfg.mode)}}; }

    void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
        const auto path = dir / name;
        std::ofstream os(path);
        if (!os) fail(ErrorKind::config, "cannot write " + path.string());
        body(os);
        if (!os) fail(ErrorKind::config, "write failed for " + path.string());
        result.artifacts.push_back(path.string());
    }

    void write_json(const std::string& name, const json& j) {
        write(name, [&](std::ostream& os) { os << j.dump(2) << "\n"; });
    }
};

inline ELParams params_of(const RunConfig& c) { return {c.lambda, c.C}; }

inline Trajectory trajectory_of(const RunConfig& c) {
    if (c.trajectory_path) {
        std::ifstream is(*c.trajectory_path);
        if (!is) fail(ErrorKind::config, "cannot open trajectory " + *c.trajectory_path);
        return read_trajectory_csv(is, params_of(c));
    }
    HopfJet seed;
    seed.q = c.q0;
    seed.q1 = c.dq0;
    seed.r = c.xi0;
    const HopfJet j0 = complete_jet(seed, params_of(c));
    if (c.length) return integrate_el(j0, params_of(c), *c.length, c.step);
    return integrate_period(j0, params_of(c), c.step, c.max_length);
}

/// Trajectory with real lambda, plus the unit mu that produced it.
struct Canonical {
    Trajectory traj;
    cplx mu{1.0, 0.0};
};

inline Canonical canonical_of(const Trajectory& t) {
    Canonical out{t, 1.0};
    if (!t.params.lambda_is_real()) {
        out.mu = std::sqrt(t.params.lambda / std::abs(t.params.lambda));
        out.traj = canonicalize(t);
    }
    return out;
}

inline json classification_json(const Classification& c, cplx mu) {
    json ev = json::array();
    for (const auto& e : c.evidence) {
        json item{{"genus", e.genus}, {"identifiable", e.identifiable}, {"passed", e.passed}};
        if (e.identifiable) {
            item["constants"] = constants_json(e.constants);
            item["flow_residual"] = e.flow_residual;
            item["sym_residual"] = e.sym_residual;
            item["det_odd_residual"] = e.det_odd_residual;
        } else {
            item["note"] = e.note;
        }
        ev.push_back(item);
    }
    json iso{{"isothermic", c.isothermic()}};
    if (c.isothermic_mu) iso["mu"] = cplx_json(*c.isothermic_mu);
    return {{"genus", genus_label(c.genus)}, {"evidence", ev}, {"isothermic", iso}, {"canonical_mu", cplx_json(mu)}};
}

/// Genus, constants and Killing field at the start of the canonical trajectory.
struct SpectralSetup {
    Canonical canon;
    Classification cls;
    GenusConstants constants;
    KillingField field;
    SpectralCurveData curve;
};

inline SpectralSetup spectral_setup(const Trajectory& t) {
    SpectralSetup s;
    s.canon = canonical_of(t);
    s.cls = genus_classify(s.canon.traj);
    if (s.cls.genus > 3) fail(ErrorKind::invariant, "no polynomial Killing field of genus <= 3 fits the trajectory");
    s.constants = s.cls.evidence[static_cast<std::size_t>(s.cls.genus)].constants;
    s.field = build_killing_field(s.canon.traj.front(), s.constants, s.cls.genus);
    s.curve = curve_from_field(s.field);
    return s;
}

inline json curve_json(const SpectralCurveData& c) {
    json roots = json::array(), bps = json::array();
    for (const auto& r : c.roots) roots.push_back({{"root", cplx_json(r.root)}, {"multiplicity", r.multiplicity}});
    for (const auto& r : c.branch_points) bps.push_back(cplx_json(r.root));
    return {{"coefficients", poly_json(c.P)},
            {"roots", roots},
            {"branch_points", bps},
            {"spectral_genus", c.genus},
            {"singular", c.singular},
            {"reducible", c.reducible},
            {"evenness_residual", c.evenness_residual},
            {"reality_residual", c.reality_residual}};
}

inline double profile_step_of(const RunConfig& c) { return c.profile_step.value_or(c.step); }

inline ProfileCurve profile_of(const RunConfig& c, const Trajectory& t) {
    const SeifertType st(c.m, c.n);
    const CurveSampleS3 init = init_profile(t.front(), st, c.branch_plus ? Branch::plus : Branch::minus, c.h0);
    return integrate_profile(t, st, init, profile_step_of(c));
}

/// Configured stride, or the smallest divisor of the interval count that
/// keeps the mesh at or below 512 rows.
inline int mesh_stride_of(const RunConfig& c, const ProfileCurve& p) {
    if (c.mesh_stride > 0) return c.mesh_stride;
    const std::size_t intervals = p.samples.size() - 1;
    std::size_t s = 1;
    while (intervals / s > 512) {
        ++s;
        while (intervals % s != 0 && intervals / s > 512) ++s;
    }
    return static_cast<int>(s);
}

// ---------------------------------------------------------------------------
// Modes
// ---------------------------------------------------------------------------

inline void run_simulate(Context& ctx) {
    const Trajectory t = trajectory_of(ctx.cfg);
    ctx.write("trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(os, t); });
    json r = ctx.report();
    r["length"] = t.length();
    r["samples"] = t.size();
    r["step"] = t.step;
    r["max_abs_q"] = t.max_abs_q();
    r["el_residual"] = el_residual(t, t.params);
    if (t.params.lambda_is_real()) {
        r["first_integral"] = first_integral(t.front(), t.params);
        r["first_integral_drift"] = first_integral_drift(t);
    }
    ctx.write_json("simulate.json", r);
}

inline void run_classify(Context& ctx) {
    const Canonical c = canonical_of(trajectory_of(ctx.cfg));
    const Classification cls = genus_classify(c.traj);
    json r = ctx.report();
    r.update(classification_json(cls, c.mu));
    ctx.write_json("classify.json", r);
    ctx.result.messages.push_back("genus " + genus_label(cls.genus));
}

inline void run_spectral(Context& ctx) {
    const SpectralSetup s = spectral_setup(trajectory_of(ctx.cfg));
    json r = ctx.report();
    r["genus"] = s.cls.genus;
    r["constants"] = constants_json(s.constants);
    r["canonical_mu"] = cplx_json(s.canon.mu);
    r["curve"] = curve_json(s.curve);
    r["invariance_drift"] = spectral_invariance(s.canon.traj, s.constants, s.cls.genus);
    const InvolutionDefects d = involution_defects(s.curve.branch_values());
    r["involution_defects"] = {{"sigma", d.sigma}, {"rho", d.rho}};
    ctx.write_json("spectral.json", r);
    ctx.result.messages.push_back("spectral genus " + std::to_string(s.curve.genus));
}

inline SearchBox box_of(const std::vector<cplx>& values) {
    SearchBox b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
                std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (cplx a : values) {
        b.re_min = std::min(b.re_min, a.real());
        b.re_max = std::max(b.re_max, a.real());
        b.im_min = std::min(b.im_min, a.imag());
        b.im_max = std::max(b.im_max, a.imag());
    }
    return b;
}

inline void run_scan(Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const SpectralSetup s = spectral_setup(trajectory_of(cfg));
    const Trajectory& t = s.canon.traj;
    std::vector<cplx> grid = cfg.grid.values();
    std::sort(grid.begin(), grid.end(), [](cplx a, cplx b) { return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag(); });
    const std::vector<TransferSample> samples = discriminant_scan(t, grid, cfg.step, scan_threads());

    ctx.write("discriminant.csv", [&](std::ostream& os) {
        os << std::setprecision(17);
        os << "re_a,im_a,re_delta,im_delta,re_disc,im_disc,abs_disc,commutator_defect\n";
        for (const auto& smp : samples) {
            const cplx disc = smp.delta * smp.delta - 4.0;
            os << smp.a.real() << "," << smp.a.imag() << "," << smp.delta.real() << "," << smp.delta.imag() << "," << disc.real()
               << "," << disc.imag() << "," << std::abs(disc) << "," << commutator_defect(s.field(smp.a), smp.H) << "\n";
        }
    });

    const BranchMatchReport rep = branch_match(s.curve, t, box_of(grid), cfg.grid.match_tol, cfg.step);
    json matches = json::array();
    for (const auto& m : rep.matches)
        matches.push_back({{"branch_point", cplx_json(m.branch_point)},
                           {"zero", cplx_json(m.zero)},
                           {"distance", m.distance},
                           {"order", m.order},
                           {"matched", m.matched}});
    json gj;
    if (cfg.grid.points.empty()) {
        gj["re"] = axis_json(cfg.grid.re);
        gj["im"] = axis_json(cfg.grid.im);
    }
    json vals = json::array();
    for (cplx a : grid) vals.push_back(cplx_json(a));
    gj["values"] = vals;

    json r = ctx.report();
    r["genus"] = s.cls.genus;
    r["constants"] = constants_json(s.constants);
    r["branch_points"] = curve_json(s.curve)["branch_points"];
    r["matches"] = matches;
    r["all_matched"] = rep.all_matched;
    r["match_tol"] = rep.tol;
    r["grid"] = gj;
    ctx.write_json("branch_match.json", r);
    ctx.result.messages.push_back(std::to_string(rep.matches.size()) + " branch points, all matched: " + (rep.all_matched ? "yes" : "no"));
}

inline json invariants_json(const ProfileInvariants& v) {
    return {{"unit", v.unit}, {"conformal", v.conformal}, {"coupling", v.coupling}, {"horizontal", v.horizontal}};
}

inline void run_reconstruct(Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const Trajectory t = trajectory_of(cfg);
    const ProfileCurve p = profile_of(cfg, t);
    const Monodromy mono = profile_monodromy(p, false);
    const bool fiber = mono.kind == PeriodMapKind::fiber_rotation;
    const TorusMesh mesh = build_torus_mesh(p, cfg.mesh_nx, mesh_stride_of(cfg, p));

    ObjHeader hdr;
    hdr.period = t.length();
    if (fiber) hdr.theta = mono.theta;
    ctx.write("mesh.obj", [&](std::ostream& os) { write_obj(os, mesh, hdr); });
    ctx.write("curve.csv", [&](std::ostream& os) { write_curve_csv(os, p, t); });

    json conv = json::array();
    for (const auto& c : mono.convergents) conv.push_back(json::array({c.first, c.second}));
    json r = ctx.report();
    r["seifert"] = {{"m", cfg.m}, {"n", cfg.n}};
    r["period"] = t.length();
    r["profile_step"] = p.step;
    r["period_map"] = period_map_name(mono.kind);
    r["fiber_rotation"] = fiber;
    r["commutation_defect"] = mono.commutation_defect;
    r["frame_angles"] = json::array({mono.frame_angles[0], mono.frame_angles[1]});
    r["theta"] = mono.theta;
    r["residual"] = mono.residual;
    r["torus_residual"] = mono.torus_residual;
    r["phases"] = json::array({mono.phase1, mono.phase2});
    r["rotation_number"] = mono.rotation_number;
    r["convergents"] = conv;
    r["closes"] = mesh.wrap_y;
    r["invariants"] = invariants_json(profile_invariants(p, t));
    r["mesh"] = {{"nx", mesh.nx}, {"ny", mesh.ny}, {"faces", mesh.faces.size()}};
    ctx.write_json("monodromy.json", r);
}

inline constexpr double kKappaFix = 0.5;

inline void run_energy(Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const Trajectory t = trajectory_of(cfg);
    json r = ctx.report();
    const double wc = willmore_curve(t);
    r["W_curve"] = wc;
    r["kappa_fix"] = kKappaFix;
    try {
        const ProfileCurve p = profile_of(cfg, t);
        const TorusMesh mesh = build_torus_mesh(p, cfg.mesh_nx, mesh_stride_of(cfg, p));
        const MeshEnergy me = mesh_energy(mesh);
        r["W_mesh"] = me.willmore;
        r["W_mesh_conformal"] = me.conformal;
        r["closed"] = mesh.wrap_y;
        r["relative_discrepancy"] = std::abs(me.willmore - kKappaFix * wc) / me.willmore;
        r["relative_discrepancy_conformal"] = std::abs(me.conformal - kKappaFix * wc) / me.conformal;
        r["consistent"] = std::abs(me.willmore - kKappaFix * wc) / me.willmore < 0.01;
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::config) throw;
        r["W_mesh"] = nullptr;
        r["note"] = e.what();
    }
    ctx.write_json("energy.json", r);
}

struct CheckItem {
    std::string name;
    bool passed = false;
    bool skipped = false;
    std::string detail;
    json values = json::object();
};

inline CheckItem check_one(const std::string& name, const std::function<void(CheckItem&)>& body) {
    CheckItem c;
    c.name = name;
    try {
        body(c);
    } catch (const Error& e) {
        c.passed = false;
        c.detail = e.what();
    }
    return c;
}

inline void run_check(Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const Trajectory t = trajectory_of(cfg);
    const double tol = cfg.tol;
    std::vector<CheckItem> items;

    items.push_back(check_one("jet_consistency", [&](CheckItem& c) {
        t.validate();
        c.passed = true;
    }));
    items.push_back(check_one("el_equation", [&](CheckItem& c) {
        const double scale = std::max(1.0, std::pow(t.max_abs_q(), 3));
        const double res = el_residual(t, t.params);
        c.values["residual"] = res;
        c.passed = res < tol * scale;
        if (!c.passed) c.detail = "EL residual exceeds tolerance";
    }));
    const Canonical canon = canonical_of(t);
    items.push_back(check_one("first_integral", [&](CheckItem& c) {
        const double drift = first_integral_drift(canon.traj);
        c.values["drift"] = drift;
        c.passed = drift < 1e-8 * std::max(1.0, std::abs(first_integral(canon.traj.front(), canon.traj.params)));
        if (!c.passed) c.detail = "first integral drifts";
    }));
    std::optional<SpectralSetup> setup;
    items.push_back(check_one("genus_bound", [&](CheckItem& c) {
        setup = spectral_setup(t);
        c.values["genus"] = setup->cls.genus;
        c.passed = true;
    }));
    items.push_back(check_one("lax_invariance", [&](CheckItem& c) {
        if (!setup) fail(ErrorKind::invariant, "no Killing field available");
        const double drift = spectral_invariance(setup->canon.traj, setup->constants, setup->cls.genus);
        c.values["drift"] = drift;
        c.passed = drift < 1e-6;
        if (!c.passed) c.detail = "det X drifts along the trajectory";
    }));
    items.push_back(check_one("det_symmetry", [&](CheckItem& c) {
        if (!setup) fail(ErrorKind::invariant, "no Killing field available");
        c.values["evenness"] = setup->curve.evenness_residual;
        c.values["reality"] = setup->curve.reality_residual;
        c.passed = setup->curve.evenness_residual < 1e-8 && setup->curve.reality_residual < 1e-8;
        if (!c.passed) c.detail = "det X is not even with real coefficients";
    }));
    items.push_back(check_one("reconstruction", [&](CheckItem& c) {
        ProfileCurve p;
        try {
            p = profile_of(cfg, t);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::config) throw;
            c.skipped = true;
            c.passed = true;
            c.detail = e.what();
            return;
        }
        const ProfileInvariants v = profile_invariants(p, t);
        c.values = invariants_json(v);
        c.passed = v.unit < 1e-8 && v.conformal < 1e-8 && v.horizontal < 1e-8 && v.coupling < 1e-6;
        if (!c.passed) c.detail = "profile curve invariants violated";
    }));

    json list = json::array();
    bool all = true;
    for (const auto& c : items) {
        json j{{"name", c.name}, {"passed", c.passed}, {"skipped", c.skipped}, {"values", c.values}};
        if (!c.detail.empty()) j["detail"] = c.detail;
        list.push_back(j);
        all = all && c.passed;
        if (!c.passed) ctx.result.messages.push_back("invariant violated: " + c.name + " (" + c.detail + ")");
    }
    json r = ctx.report();
    r["properties"] = list;
    r["passed"] = all;
    ctx.write_json("check.json", r);
    if (!all) ctx.result.exit_code = static_cast<int>(ErrorKind::invariant);
}

}  // namespace pipeline

/// Execute one run. Module errors propagate as ewlab::Error.
inline RunResult run(const RunConfig& cfg, const std::string& config_text) {
    pipeline::Context ctx{cfg, sha256_hex(config_text), cfg.out_dir, {}};
    std::error_code ec;
    std::filesystem::create_directories(ctx.dir, ec);
    if (ec) fail(ErrorKind::config, "cannot create output directory " + cfg.out_dir + ": " + ec.message());
    switch (cfg.mode) {
        case Mode::simulate: pipeline::run_simulate(ctx); break;
        case Mode::classify: pipeline::run_classify(ctx); break;
        case Mode::spectral: pipeline::run_spectral(ctx); break;
        case Mode::scan: pipeline::run_scan(ctx); break;
        case Mode::reconstruct: pipeline::run_reconstruct(ctx); break;
        case Mode::energy: pipeline::run_energy(ctx); break;
        case Mode::check: pipeline::run_check(ctx); break;
    }
    return ctx.result;
}

}  // namespace ewlab
