#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdisp/coefficients.hpp"
#include "mdisp/grid.hpp"
#include "mdisp/wells.hpp"

namespace mdisp {

struct SolveFailure : std::runtime_error {
    std::vector<double> residual_history;

    SolveFailure(const std::string& what, std::vector<double> history)
        : std::runtime_error(what), residual_history(std::move(history))
    {
    }
};

struct SolveInfo {
    int iterations = 0;
    double relative_residual = 0.0;
};

/// TPFA face transmissibilities: harmonic mean of the two cells'
/// directional mobility K_dir / mu(c), times face area over center
/// distance. The mobility is averaged as a single face coefficient, which
/// keeps fluxes continuous across permeability jumps.
inline FaceField face_transmissibilities(const Grid& g, const RockModel& rock,
                                         const ScalarField& c,
                                         const FluidModel& f,
                                         ClampStats* clamp = nullptr)
{
    FaceField trans = make_face_field(g);
    for (int fi = 0; fi < g.num_faces(); ++fi) {
        const Face& face = g.faces[static_cast<size_t>(fi)];
        const bool xdir = face.normal.x != 0.0;
        const double kl = xdir ? rock.kx[face.left] : rock.ky[face.left];
        const double kr = xdir ? rock.kx[face.right] : rock.ky[face.right];
        const double ml = kl / koval_viscosity(c[face.left], f, clamp);
        const double mr = kr / koval_viscosity(c[face.right], f, clamp);
        const double harm = (ml + mr > 0.0) ? 2.0 * ml * mr / (ml + mr) : 0.0;
        trans[fi] = harm * face.area / face.dist;
    }
    return trans;
}

/// Singular Neumann system for the pressure: 5-point stencil in face form.
/// A = sum_f t_f (e_L - e_R)(e_L - e_R)^T, so rows sum to zero by
/// construction and the nullspace is the constant vector.
struct PressureSystem {
    const Grid* grid = nullptr;
    FaceField trans;
    std::vector<double> rhs;
    double tol = 1e-10;
    bool jacobi = false;
    int max_iterations = 0;  // 0 means 20 * ncells
};

inline PressureSystem assemble_pressure(const Grid& g, const RockModel& rock,
                                        const ScalarField& c,
                                        const FluidModel& f,
                                        const MollifiedSources& src,
                                        double tol = 1e-10,
                                        ClampStats* clamp = nullptr)
{
    PressureSystem sys;
    sys.grid = &g;
    sys.trans = face_transmissibilities(g, rock, c, f, clamp);
    sys.tol = tol;
    sys.rhs.assign(static_cast<size_t>(g.num_cells()), 0.0);
    const double vol = g.cell_volume();
    for (int i = 0; i < g.num_cells(); ++i)
        sys.rhs[static_cast<size_t>(i)] = (src.qI[i] - src.qP[i]) * vol;
    return sys;
}

namespace detail {

inline void pressure_matvec(const Grid& g, const FaceField& trans,
                            const std::vector<double>& x,
                            std::vector<double>& y)
{
    std::fill(y.begin(), y.end(), 0.0);
    for (int fi = 0; fi < g.num_faces(); ++fi) {
        const Face& face = g.faces[static_cast<size_t>(fi)];
        const double flux =
            trans[fi] * (x[static_cast<size_t>(face.left)] -
                         x[static_cast<size_t>(face.right)]);
        y[static_cast<size_t>(face.left)] += flux;
        y[static_cast<size_t>(face.right)] -= flux;
    }
}

inline void remove_mean(std::vector<double>& x)
{
    double s = 0.0;
    for (double v : x) s += v;
    const double mean = s / static_cast<double>(x.size());
    for (double& v : x) v -= mean;
}

}  // namespace detail

/// Conjugate gradients on the singular Neumann system. The right-hand
/// side is projected onto the zero-sum subspace and the iterate is
/// re-projected to zero mean every iteration and at exit. Deterministic:
/// zero initial guess, fixed summation order.
inline ScalarField solve_pressure(const PressureSystem& sys,
                                  SolveInfo* info = nullptr)
{
    const Grid& g = *sys.grid;
    const int n = g.num_cells();
    std::vector<double> b = sys.rhs;
    detail::remove_mean(b);

    ScalarField p(n, 0.0);
    double bnorm = 0.0;
    for (double v : b) bnorm += v * v;
    bnorm = std::sqrt(bnorm);
    if (bnorm == 0.0) {
        if (info) *info = {0, 0.0};
        return p;
    }

    std::vector<double> diag;
    if (sys.jacobi) {
        diag.assign(static_cast<size_t>(n), 0.0);
        for (int fi = 0; fi < g.num_faces(); ++fi) {
            const Face& face = g.faces[static_cast<size_t>(fi)];
            diag[static_cast<size_t>(face.left)] += sys.trans[fi];
            diag[static_cast<size_t>(face.right)] += sys.trans[fi];
        }
    }
    auto precond = [&](const std::vector<double>& r, std::vector<double>& z) {
        if (sys.jacobi) {
            for (size_t i = 0; i < r.size(); ++i)
                z[i] = diag[i] > 0.0 ? r[i] / diag[i] : r[i];
        } else {
            z = r;
        }
    };

    std::vector<double> r = b, z(b.size()), q(b.size()), d(b.size());
    precond(r, z);
    d = z;
    double rz = 0.0;
    for (size_t i = 0; i < r.size(); ++i) rz += r[i] * z[i];

    const int max_iter = sys.max_iterations > 0 ? sys.max_iterations : 20 * n;
    std::vector<double> history;
    history.reserve(64);

    for (int it = 0; it < max_iter; ++it) {
        detail::pressure_matvec(g, sys.trans, d, q);
        double dq = 0.0;
        for (size_t i = 0; i < d.size(); ++i) dq += d[i] * q[i];
        if (dq <= 0.0)
            throw SolveFailure("solve_pressure: curvature breakdown", history);
        const double alpha = rz / dq;
        for (size_t i = 0; i < r.size(); ++i) {
            p.v[i] += alpha * d[i];
            r[i] -= alpha * q[i];
        }
        detail::remove_mean(p.v);
        detail::remove_mean(r);

        double rnorm = 0.0;
        for (double v : r) rnorm += v * v;
        rnorm = std::sqrt(rnorm);
        history.push_back(rnorm / bnorm);
        if (rnorm <= sys.tol * bnorm) {
            if (info) *info = {it + 1, rnorm / bnorm};
            return p;
        }

        precond(r, z);
        double rz_new = 0.0;
        for (size_t i = 0; i < r.size(); ++i) rz_new += r[i] * z[i];
        const double beta = rz_new / rz;
        rz = rz_new;
        for (size_t i = 0; i < d.size(); ++i) d[i] = z[i] + beta * d[i];
    }
    throw SolveFailure("solve_pressure: no convergence within max iterations",
                       history);
}

/// Integrated Darcy flux per interior face, t_f (p_L - p_R). Positive
/// values flow from left to right.
inline FaceField darcy_flux(const Grid& g, const RockModel& rock,
                            const ScalarField& c, const FluidModel& f,
                            const ScalarField& p)
{
    const FaceField trans = face_transmissibilities(g, rock, c, f);
    FaceField flux = make_face_field(g);
    for (int fi = 0; fi < g.num_faces(); ++fi) {
        const Face& face = g.faces[static_cast<size_t>(fi)];
        flux[fi] = trans[fi] * (p[face.left] - p[face.right]);
    }
    return flux;
}

/// Cell velocities: per component, the mean of the two opposing face
/// fluxes divided by face area; boundary faces contribute zero.
inline VectorField reconstruct_velocity(const Grid& g, const FaceField& flux)
{
    VectorField u(g.num_cells());
    for (int c = 0; c < g.num_cells(); ++c) {
        const auto& cf = g.cell_faces[static_cast<size_t>(c)];
        const double fw = cf[0] >= 0 ? flux[cf[0]] : 0.0;
        const double fe = cf[1] >= 0 ? flux[cf[1]] : 0.0;
        const double fs = cf[2] >= 0 ? flux[cf[2]] : 0.0;
        const double fn = cf[3] >= 0 ? flux[cf[3]] : 0.0;
        u[c] = {0.5 * (fw + fe) / g.hy(), 0.5 * (fs + fn) / g.hx()};
    }
    return u;
}

struct FlowState {
    ScalarField p;
    FaceField flux;
    VectorField u;
    SolveInfo info;
};

inline FlowState solve_flow(const Grid& g, const RockModel& rock,
                            const ScalarField& c, const FluidModel& f,
                            const MollifiedSources& src, double tol = 1e-10,
                            bool jacobi = false, ClampStats* clamp = nullptr)
{
    PressureSystem sys = assemble_pressure(g, rock, c, f, src, tol, clamp);
    sys.jacobi = jacobi;
    FlowState flow;
    flow.p = solve_pressure(sys, &flow.info);
    flow.flux = darcy_flux(g, rock, c, f, flow.p);
    flow.u = reconstruct_velocity(g, flow.flux);
    return flow;
}

/// Largest per-cell imbalance between net face flux and the source
/// integral, relative to the total injection scale.
inline double flux_balance_residual(const Grid& g, const FaceField& flux,
                                    const MollifiedSources& src)
{
    std::vector<double> net(static_cast<size_t>(g.num_cells()), 0.0);
    for (int fi = 0; fi < g.num_faces(); ++fi) {
        const Face& face = g.faces[static_cast<size_t>(fi)];
        net[static_cast<size_t>(face.left)] += flux[fi];
        net[static_cast<size_t>(face.right)] -= flux[fi];
    }
    const double vol = g.cell_volume();
    double worst = 0.0, scale = 0.0;
    for (int c = 0; c < g.num_cells(); ++c) {
        scale += src.qI[c] * vol;
        worst = std::max(
            worst, std::abs(net[static_cast<size_t>(c)] -
                            (src.qI[c] - src.qP[c]) * vol));
    }
    return scale > 0.0 ? worst / scale : worst;
}

}  // namespace mdisp
