#pragma once

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ewlab/elflow.hpp"
#include "ewlab/error.hpp"

namespace ewlab {

inline constexpr const char* kTrajectoryHeader = "y,re_q,im_q,re_dq,im_dq,re_d2q,im_d2q,re_d3q,im_d3q,re_d4q,im_d4q,im_xi";

inline void write_trajectory_csv(std::ostream& os, const Trajectory& t) {
    os << std::setprecision(17);
    os << kTrajectoryHeader << "\n";
    for (const auto& j : t.jets) {
        os << j.y;
        for (cplx v : {j.q, j.q1, j.q2, j.q3, j.q4}) os << "," << v.real() << "," << v.imag();
        os << "," << j.r << "\n";
    }
}

/// Reads a trajectory written by write_trajectory_csv. The step is taken
/// from the first two rows; uniformity is left to Trajectory::validate.
inline Trajectory read_trajectory_csv(std::istream& is, const ELParams& params) {
    std::string line;
    int lineno = 0;
    auto err = [&](const std::string& what) { fail(ErrorKind::config, "trajectory line " + std::to_string(lineno) + ": " + what); };
    if (!std::getline(is, line)) fail(ErrorKind::config, "trajectory file is empty");
    ++lineno;
    if (line != kTrajectoryHeader) err("unexpected header");
    Trajectory t;
    t.params = params;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> v;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            std::size_t used = 0;
            double x = 0;
            try {
                x = std::stod(cell, &used);
            } catch (const std::exception&) {
                err("invalid number '" + cell + "'");
            }
            if (used != cell.size() || !std::isfinite(x)) err("invalid number '" + cell + "'");
            v.push_back(x);
        }
        if (v.size() != 12) err("expected 12 columns");
        HopfJet j;
        j.y = v[0];
        j.q = {v[1], v[2]};
        j.q1 = {v[3], v[4]};
        j.q2 = {v[5], v[6]};
        j.q3 = {v[7], v[8]};
        j.q4 = {v[9], v[10]};
        j.r = v[11];
        t.jets.push_back(j);
    }
    if (t.jets.size() < 2) fail(ErrorKind::config, "trajectory needs at least two rows");
    t.step = t.jets[1].y - t.jets[0].y;
    if (!(t.step > 0)) fail(ErrorKind::config, "trajectory y values must increase");
    return t;
}

}  // namespace ewlab
