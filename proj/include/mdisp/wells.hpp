#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdisp/grid.hpp"

namespace mdisp {

enum class WellKind { injector, producer };

struct ScheduleStep {
    double t_from = 0.0;
    double factor = 1.0;
};

struct Well {
    Vec2 pos;
    WellKind kind = WellKind::injector;
    double rate = 0.0;            // total volumetric rate carried by the well
    double chat = -1.0;           // injected concentration; < 0 inherits the set default
    std::vector<ScheduleStep> schedule;  // piecewise-constant multiplier, default 1

    double factor_at(double t) const
    {
        double f = 1.0;
        for (const auto& s : schedule)
            if (t >= s.t_from) f = s.factor;
        return f;
    }
};

/// The measure sources q^I = a nu, q^P = b nu: a Dirac comb over the well
/// locations with nonnegative rates balancing injectors against producers.
struct WellSet {
    std::vector<Well> wells;
    double chat_default = 1.0;

    double chat_of(const Well& w) const
    {
        return w.chat >= 0.0 ? w.chat : chat_default;
    }
};

struct WellViolation {
    std::string label;
    std::string message;
    double magnitude = 0.0;
};

/// Checks nonnegativity, distinct in-domain locations and per-interval
/// rate balance. Returns the list of violations (empty means ok).
inline std::vector<WellViolation> validate_wells(const WellSet& ws, double Lx,
                                                 double Ly)
{
    std::vector<WellViolation> out;
    auto add = [&out](const std::string& label, const std::string& msg,
                      double mag) { out.push_back({label, msg, mag}); };

    for (size_t i = 0; i < ws.wells.size(); ++i) {
        const Well& w = ws.wells[i];
        if (w.rate < 0.0)
            add("hyp:source", "well rates must be nonnegative", -w.rate);
        if (!(w.pos.x > 0.0 && w.pos.x < Lx && w.pos.y > 0.0 && w.pos.y < Ly))
            add("hyp:source", "well location must lie in the open domain", 0.0);
        for (size_t j = i + 1; j < ws.wells.size(); ++j)
            if (w.pos.x == ws.wells[j].pos.x && w.pos.y == ws.wells[j].pos.y)
                add("hyp:source", "well locations must be pairwise distinct", 0.0);
    }

    // Balance must hold on every schedule interval.
    std::set<double> breaks{0.0};
    for (const Well& w : ws.wells)
        for (const auto& s : w.schedule) breaks.insert(s.t_from);
    for (double t : breaks) {
        double in = 0.0, outr = 0.0;
        for (const Well& w : ws.wells) {
            const double r = w.rate * w.factor_at(t);
            (w.kind == WellKind::injector ? in : outr) += r;
        }
        const double imbalance = std::abs(in - outr);
        const double scale = std::max({in, outr, 1e-300});
        if (imbalance > 1e-12 * scale) {
            std::ostringstream msg;
            msg << "imbalance " << imbalance << " at t >= " << t;
            add("hyp:compatibility", msg.str(), imbalance);
        }
    }
    return out;
}

/// Cell-supported source densities obtained by mollifying the Dirac comb.
/// Volume-weighted sums of qI and qP agree to 1e-14 relative.
struct MollifiedSources {
    ScalarField qI;       // injector density
    ScalarField qP;       // producer density
    ScalarField qI_chat;  // chat-weighted injector density (feeds transport)
    double radius = 0.0;  // 0 marks grid-Dirac (point-source) mode
};

namespace detail {

// Mass of the normalized hat bump psi_r(x) = 3/(pi r^2) max(0, 1-|x-xw|/r)
// over one cell, by 4x4 tensor Gauss; cells crossed by the bump boundary
// are split 2x2 first.
inline double hat_cell_mass(const Grid& g, int cell, Vec2 xw, double r)
{
    static const double gp[4] = {-0.8611363115940526, -0.3399810435848563,
                                 0.3399810435848563, 0.8611363115940526};
    static const double gw[4] = {0.3478548451374538, 0.6521451548625461,
                                 0.6521451548625461, 0.3478548451374538};

    const double hx = g.hx(), hy = g.hy();
    const double x0 = g.cell_i(cell) * hx, y0 = g.cell_j(cell) * hy;

    auto bump = [&](double x, double y) {
        const double d = std::hypot(x - xw.x, y - xw.y);
        return std::max(0.0, 1.0 - d / r);
    };
    auto gauss = [&](double ax, double ay, double wx, double wy) {
        double s = 0.0;
        for (int p = 0; p < 4; ++p)
            for (int q = 0; q < 4; ++q)
                s += gw[p] * gw[q] *
                     bump(ax + 0.5 * wx * (1.0 + gp[p]),
                          ay + 0.5 * wy * (1.0 + gp[q]));
        return s * 0.25 * wx * wy;
    };

    // Does the circle |x - xw| = r cross this cell?
    double dmin_x = std::max({x0 - xw.x, xw.x - (x0 + hx), 0.0});
    double dmin_y = std::max({y0 - xw.y, xw.y - (y0 + hy), 0.0});
    const double dmin = std::hypot(dmin_x, dmin_y);
    const double dmax =
        std::hypot(std::max(xw.x - x0, x0 + hx - xw.x),
                   std::max(xw.y - y0, y0 + hy - xw.y));
    if (dmin >= r) return 0.0;

    double mass = 0.0;
    if (dmax > r) {
        for (int sj = 0; sj < 2; ++sj)
            for (int si = 0; si < 2; ++si)
                mass += gauss(x0 + si * 0.5 * hx, y0 + sj * 0.5 * hy,
                              0.5 * hx, 0.5 * hy);
    } else {
        mass = gauss(x0, y0, hx, hy);
    }
    return mass * 3.0 / (kPi * r * r);
}

}  // namespace detail

/// Replaces each Dirac by the normalized hat bump of radius r integrated
/// cellwise; each well's discrete mass is normalized to its exact rate,
/// then producers are rescaled by one global factor so that discrete
/// compatibility holds to round-off.
inline MollifiedSources mollify(const WellSet& ws, const Grid& g, double r)
{
    if (!(r > 0.0)) throw std::invalid_argument("mollify: radius must be > 0");
    for (const Well& w : ws.wells)
        if (w.pos.x - r < 0.0 || w.pos.x + r > g.Lx || w.pos.y - r < 0.0 ||
            w.pos.y + r > g.Ly)
            throw std::invalid_argument(
                "mollify: mollification ball exits the domain");

    MollifiedSources src;
    src.qI = make_cell_field(g);
    src.qP = make_cell_field(g);
    src.qI_chat = make_cell_field(g);
    src.radius = r;

    const double vol = g.cell_volume();
    std::vector<double> mass(static_cast<size_t>(g.num_cells()));
    for (const Well& w : ws.wells) {
        // Only cells whose box meets the ball can carry mass.
        const int i0 = std::max(0, static_cast<int>((w.pos.x - r) / g.hx()) - 1);
        const int i1 = std::min(g.nx - 1, static_cast<int>((w.pos.x + r) / g.hx()) + 1);
        const int j0 = std::max(0, static_cast<int>((w.pos.y - r) / g.hy()) - 1);
        const int j1 = std::min(g.ny - 1, static_cast<int>((w.pos.y + r) / g.hy()) + 1);

        double total = 0.0;
        std::fill(mass.begin(), mass.end(), 0.0);
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i) {
                const int c = g.cell_index(i, j);
                const double m = detail::hat_cell_mass(g, c, w.pos, r) * vol;
                mass[static_cast<size_t>(c)] = m;
                total += m;
            }
        if (!(total > 0.0))
            throw std::runtime_error("mollify: bump carries no discrete mass");

        const double chat = ws.chat_of(w);
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i) {
                const int c = g.cell_index(i, j);
                const double dens =
                    w.rate * mass[static_cast<size_t>(c)] / total / vol;
                if (w.kind == WellKind::injector) {
                    src.qI[c] += dens;
                    src.qI_chat[c] += chat * dens;
                } else {
                    src.qP[c] += dens;
                }
            }
    }

    // Restore exact discrete compatibility with one global factor.
    double in = 0.0, out = 0.0;
    for (int c = 0; c < g.num_cells(); ++c) {
        in += src.qI[c] * vol;
        out += src.qP[c] * vol;
    }
    if (out > 0.0) {
        const double f = in / out;
        for (int c = 0; c < g.num_cells(); ++c) src.qP[c] *= f;
    }
    return src;
}

/// Grid-Dirac limit: the full rate of each well lands in the containing cell.
inline MollifiedSources point_source_mode(const WellSet& ws, const Grid& g)
{
    MollifiedSources src;
    src.qI = make_cell_field(g);
    src.qP = make_cell_field(g);
    src.qI_chat = make_cell_field(g);
    src.radius = 0.0;

    const double vol = g.cell_volume();
    for (const Well& w : ws.wells) {
        const int c = locate_cell(g, w.pos);
        const double dens = w.rate / vol;
        if (w.kind == WellKind::injector) {
            src.qI[c] += dens;
            src.qI_chat[c] += ws.chat_of(w) * dens;
        } else {
            src.qP[c] += dens;
        }
    }
    return src;
}

/// Total injected volume rate (volume-weighted sum of qI).
inline double total_injection(const MollifiedSources& src, const Grid& g)
{
    double s = 0.0;
    for (int c = 0; c < g.num_cells(); ++c) s += src.qI[c];
    return s * g.cell_volume();
}

}  // namespace mdisp
