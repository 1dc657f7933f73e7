#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdisp/grid.hpp"
#include "mdisp/tensor.hpp"

namespace mdisp {

/// Fluid description: Koval viscosity parameters, dispersion lengths,
/// molecular diffusion eps (the vanishing parameter) and the injected
/// concentration.
struct FluidModel {
    double mu0 = 1.0;     // viscosity at c = 0
    double M = 1.0;       // mobility ratio mu(0)/mu(1), >= 1
    double d_l = 1.0;     // longitudinal dispersion length
    double d_t = 1.0;     // transverse dispersion length
    double eps = 0.0;     // molecular diffusion coefficient, >= 0
    double chat = 1.0;    // injected concentration in [0,1]

    double mu_min() const { return mu0 / M; }
    double mu_max() const { return mu0; }
};

struct ClampStats {
    long count = 0;
    double worst = 0.0;  // largest distance outside [0,1]

    void record(double c)
    {
        ++count;
        worst = std::max(worst, std::max(-c, c - 1.0));
    }
};

/// Koval viscosity mu(c) = mu0 (1 + (M^{1/4} - 1) c)^{-4}. Inputs outside
/// [0,1] are clamped first; clamping is recorded when a log is supplied.
inline double koval_viscosity(double c, const FluidModel& f,
                              ClampStats* log = nullptr)
{
    if (c < 0.0 || c > 1.0) {
        if (log) log->record(c);
        c = std::clamp(c, 0.0, 1.0);
    }
    const double base = 1.0 + (std::pow(f.M, 0.25) - 1.0) * c;
    return f.mu0 / (base * base * base * base);
}

struct ViscosityHypothesesReport {
    bool pass = false;
    bool degenerate = false;       // vanishing second differences
    double margin_mu = 0.0;        // min second difference of mu
    double margin_inv_mu = 0.0;    // min second difference of 1/mu
    double worst_c_mu = 0.0;       // sample where margin_mu occurs
    double worst_c_inv_mu = 0.0;
};

/// Checks mu'' > 0 and (1/mu)'' > 0 via second differences of a tabulated
/// viscosity on a uniform grid of `samples` points over [0,1].
inline ViscosityHypothesesReport check_viscosity_hypotheses(
    const std::function<double(double)>& mu, int samples)
{
    if (samples < 3)
        throw std::invalid_argument(
            "check_viscosity_hypotheses: need at least 3 samples");

    std::vector<double> m(static_cast<size_t>(samples));
    for (int i = 0; i < samples; ++i)
        m[static_cast<size_t>(i)] = mu(static_cast<double>(i) / (samples - 1));

    ViscosityHypothesesReport r;
    r.margin_mu = std::numeric_limits<double>::infinity();
    r.margin_inv_mu = std::numeric_limits<double>::infinity();
    for (int i = 1; i + 1 < samples; ++i) {
        const size_t k = static_cast<size_t>(i);
        const double d2 = m[k + 1] - 2.0 * m[k] + m[k - 1];
        const double d2inv =
            1.0 / m[k + 1] - 2.0 / m[k] + 1.0 / m[k - 1];
        const double c = static_cast<double>(i) / (samples - 1);
        if (d2 < r.margin_mu) {
            r.margin_mu = d2;
            r.worst_c_mu = c;
        }
        if (d2inv < r.margin_inv_mu) {
            r.margin_inv_mu = d2inv;
            r.worst_c_inv_mu = c;
        }
    }
    r.pass = r.margin_mu > 0.0 && r.margin_inv_mu > 0.0;
    r.degenerate = !r.pass && r.margin_mu >= 0.0 && r.margin_inv_mu >= 0.0;
    return r;
}

inline ViscosityHypothesesReport check_viscosity_hypotheses(
    const FluidModel& f, int samples)
{
    return check_viscosity_hypotheses(
        [&f](double c) { return koval_viscosity(c, f); }, samples);
}

/// Axis-aligned rectangle [x0,x1] x [y0,y1] with uniform rock properties.
struct RockRegion {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
    double phi = 0.0;
    double kx = 0.0;
    double ky = 0.0;

    bool contains(Vec2 p) const
    {
        return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
    }
};

struct Segment {
    Vec2 a, b;
};

/// Per-cell porosity and diagonal permeability, assembled from a region
/// map. The internal region edges form the declared discontinuity set.
struct RockModel {
    ScalarField phi;
    ScalarField kx;
    ScalarField ky;
    double phi_star = 0.0;  // declared porosity bound: phi_star <= phi <= 1/phi_star
    std::vector<RockRegion> regions;
    std::vector<Segment> discontinuities;
};

inline RockModel build_rock(const Grid& g, double phi_star,
                            const std::vector<RockRegion>& regions)
{
    RockModel rock;
    rock.phi_star = phi_star;
    rock.regions = regions;
    rock.phi = make_cell_field(g);
    rock.kx = make_cell_field(g);
    rock.ky = make_cell_field(g);

    for (int c = 0; c < g.num_cells(); ++c) {
        const Vec2 x = g.cell_center(c);
        int hit = -1;
        for (int r = 0; r < static_cast<int>(regions.size()); ++r)
            if (regions[static_cast<size_t>(r)].contains(x)) hit = r;
        if (hit < 0)
            throw std::invalid_argument(
                "build_rock: cell center not covered by any region");
        const RockRegion& reg = regions[static_cast<size_t>(hit)];
        rock.phi[c] = reg.phi;
        rock.kx[c] = reg.kx;
        rock.ky[c] = reg.ky;
    }

    // Region edges strictly inside the domain.
    const double tol = 1e-12 * std::max(g.Lx, g.Ly);
    auto interior_x = [&](double x) { return x > tol && x < g.Lx - tol; };
    auto interior_y = [&](double y) { return y > tol && y < g.Ly - tol; };
    for (const RockRegion& reg : regions) {
        if (interior_x(reg.x0))
            rock.discontinuities.push_back({{reg.x0, reg.y0}, {reg.x0, reg.y1}});
        if (interior_x(reg.x1))
            rock.discontinuities.push_back({{reg.x1, reg.y0}, {reg.x1, reg.y1}});
        if (interior_y(reg.y0))
            rock.discontinuities.push_back({{reg.x0, reg.y0}, {reg.x1, reg.y0}});
        if (interior_y(reg.y1))
            rock.discontinuities.push_back({{reg.x0, reg.y1}, {reg.x1, reg.y1}});
    }
    return rock;
}

/// Velocity clamped to magnitude k; composing dispersion_tensor with this
/// clamp yields the truncated tensor family.
inline Vec2 truncate_velocity(Vec2 u, double k)
{
    if (!(k > 0.0))
        throw std::invalid_argument("truncate_velocity: level must be > 0");
    const double n = u.norm();
    if (n <= k) return u;
    return (k / n) * u;
}

/// Diffusion-dispersion tensor with molecular diffusion `eps`:
/// D(x,u) = Phi(x) (eps I + |u| (d_l E(u) + d_t (I - E(u)))).
/// At u = 0 this reduces to Phi eps I.
inline SymTensor2 dispersion_tensor_eps(int cell, Vec2 u,
                                        const RockModel& rock,
                                        const FluidModel& f, double eps)
{
    const double phi = rock.phi[cell];
    const double n = u.norm();
    if (n == 0.0) return (phi * eps) * SymTensor2::identity();
    const SymTensor2 e = flow_projection(u);
    SymTensor2 d = (eps + f.d_t * n) * SymTensor2::identity();
    d = d + (n * (f.d_l - f.d_t)) * e;
    return phi * d;
}

inline SymTensor2 dispersion_tensor(int cell, Vec2 u, const RockModel& rock,
                                    const FluidModel& f)
{
    return dispersion_tensor_eps(cell, u, rock, f, f.eps);
}

/// Mechanical dispersion: the eps = 0 member of the family.
inline SymTensor2 mechanical_dispersion(int cell, Vec2 u,
                                        const RockModel& rock,
                                        const FluidModel& f)
{
    return dispersion_tensor_eps(cell, u, rock, f, 0.0);
}

}  // namespace mdisp
