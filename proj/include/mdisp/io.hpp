#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdisp/grid.hpp"
#include "mdisp/ladder.hpp"
#include "mdisp/transport.hpp"

namespace mdisp {

namespace detail {

inline std::string fmt17(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

inline std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
    return out;
}

}  // namespace detail

inline void write_series_csv(const std::string& path,
                             const std::vector<TimeSeriesRow>& series)
{
    std::ofstream out = detail::open_out(path);
    out << "step,t,mass_in,mass_out,storage,balance_residual,overshoot,"
           "min_c,max_c,energy_increment\n";
    for (const TimeSeriesRow& r : series) {
        out << r.step << ',' << detail::fmt17(r.t) << ','
            << detail::fmt17(r.mass_in) << ',' << detail::fmt17(r.mass_out)
            << ',' << detail::fmt17(r.storage) << ','
            << detail::fmt17(r.balance_residual) << ','
            << detail::fmt17(r.overshoot) << ',' << detail::fmt17(r.min_c)
            << ',' << detail::fmt17(r.max_c) << ','
            << detail::fmt17(r.energy_increment) << '\n';
    }
}

/// Snapshot format: header "nx ny Lx Ly t", then ny lines of nx values,
/// bottom row first.
inline void write_grid_snapshot(const std::string& path,
                                const ScalarField& field, const Grid& g,
                                double t)
{
    std::ofstream out = detail::open_out(path);
    out << g.nx << ' ' << g.ny << ' ' << detail::fmt17(g.Lx) << ' '
        << detail::fmt17(g.Ly) << ' ' << detail::fmt17(t) << '\n';
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            if (i) out << ' ';
            out << detail::fmt17(field[g.cell_index(i, j)]);
        }
        out << '\n';
    }
}

/// Binary 8-bit PGM with [0,1] mapped linearly onto [0,255] (values
/// clamped); raster is written top row first.
inline void write_pgm(const std::string& path, const ScalarField& field,
                      const Grid& g)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
    out << "P5\n" << g.nx << ' ' << g.ny << "\n255\n";
    std::vector<unsigned char> row(static_cast<size_t>(g.nx));
    for (int j = g.ny - 1; j >= 0; --j) {
        for (int i = 0; i < g.nx; ++i) {
            double v = field[g.cell_index(i, j)];
            v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
            row[static_cast<size_t>(i)] =
                static_cast<unsigned char>(v * 255.0 + 0.5);
        }
        out.write(reinterpret_cast<const char*>(row.data()), g.nx);
    }
}

inline void write_ladder_csv(const std::string& path,
                             const ConvergenceReport& report)
{
    std::ofstream out = detail::open_out(path);
    out << "axis,label,c_increment,c_increment_vs_finest,u_increment_theta,"
           "weighted_c_vs_finest,energy,bv_mu,bv_inv_mu,theta_p_h1";
    for (double q : report.q_list) out << ",gradp_L" << q;
    out << ",overshoot_max,mass_residual_max\n";
    for (const LadderPointRecord& p : report.points) {
        out << p.axis << ',' << detail::fmt17(p.label) << ','
            << detail::fmt17(p.c_increment) << ','
            << detail::fmt17(p.c_increment_vs_finest) << ','
            << detail::fmt17(p.u_increment_theta) << ','
            << detail::fmt17(p.weighted_c_vs_finest) << ','
            << detail::fmt17(p.energy) << ',' << detail::fmt17(p.bv_mu) << ','
            << detail::fmt17(p.bv_inv_mu) << ','
            << detail::fmt17(p.theta_p_h1);
        for (double v : p.gradp_lq) out << ',' << detail::fmt17(v);
        out << ',' << detail::fmt17(p.overshoot_max) << ','
            << detail::fmt17(p.mass_residual_max) << '\n';
    }
}

inline void write_ladder_summary(const std::string& path,
                                 const ConvergenceReport& report)
{
    std::ofstream out = detail::open_out(path);
    out << "ladder summary (" << report.code_version << ", config "
        << report.config_hash << ")\n";
    if (report.aborted) out << "ABORTED: " << report.abort_message << "\n";
    for (const LadderVerdict& v : report.verdicts)
        out << (v.pass ? "[pass] " : "[FAIL] ") << v.name << " -- " << v.detail
            << "\n";
}

}  // namespace mdisp
