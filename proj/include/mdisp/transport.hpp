#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "mdisp/analysis.hpp"
#include "mdisp/coefficients.hpp"
#include "mdisp/grid.hpp"
#include "mdisp/pressure.hpp"
#include "mdisp/scenario.hpp"
#include "mdisp/wells.hpp"

namespace mdisp {

struct TransportStepOptions {
    double linear_tol = 1e-12;
    double cfl_safety = 0.9;
    double truncation_k = std::numeric_limits<double>::infinity();
    int max_iterations = 0;  // 0 means 10 * ncells + 100
};

struct StepDiagnostics {
    double mass_residual = 0.0;
    double overshoot = 0.0;
    double min_c = 0.0;
    double max_c = 0.0;
    double energy_increment = 0.0;
    int iterations = 0;
};

struct TransportState {
    ScalarField c;
    double t = 0.0;
    int step = 0;
    // Mass ledger: cumulative injected/produced tracer mass and stored mass.
    double injected = 0.0;
    double produced = 0.0;
    double storage = 0.0;
    double prev_storage = 0.0;
    double injected_step = 0.0;
    double produced_step = 0.0;
    double overshoot = 0.0;
};

inline double storage_integral(const ScalarField& c, const Grid& g,
                               const RockModel& rock)
{
    double s = 0.0;
    for (int i = 0; i < g.num_cells(); ++i) s += rock.phi[i] * c[i];
    return s * g.cell_volume();
}

inline TransportState make_transport_state(const ScalarField& c0,
                                           const Grid& g,
                                           const RockModel& rock)
{
    TransportState st;
    st.c = c0;
    st.storage = storage_integral(c0, g, rock);
    st.prev_storage = st.storage;
    return st;
}

namespace detail {

// Implicit transport operator in face form. For a face with Darcy flux F
// (positive from left to right), the upwind advective outflow of the left
// cell is max(F,0) c_L + min(F,0) c_R, and the two-point dispersive term
// uses the arithmetic face average of the normal-normal tensor entry.
struct TransportMatrix {
    const Grid* grid = nullptr;
    std::vector<double> cell_term;  // Phi vol / dt + qP vol
    std::vector<double> adv_pos;    // max(F, 0) per face
    std::vector<double> adv_neg;    // min(F, 0) per face
    std::vector<double> t_diff;     // D_nn face transmissibility

    void apply(const std::vector<double>& x, std::vector<double>& y) const
    {
        const Grid& g = *grid;
        for (size_t i = 0; i < x.size(); ++i) y[i] = cell_term[i] * x[i];
        for (int fi = 0; fi < g.num_faces(); ++fi) {
            const Face& face = g.faces[static_cast<size_t>(fi)];
            const size_t l = static_cast<size_t>(face.left);
            const size_t r = static_cast<size_t>(face.right);
            const size_t f = static_cast<size_t>(fi);
            const double out =
                adv_pos[f] * x[l] + adv_neg[f] * x[r] + t_diff[f] * (x[l] - x[r]);
            y[l] += out;
            y[r] -= out;
        }
    }

    std::vector<double> diagonal() const
    {
        const Grid& g = *grid;
        std::vector<double> d = cell_term;
        for (int fi = 0; fi < g.num_faces(); ++fi) {
            const Face& face = g.faces[static_cast<size_t>(fi)];
            const size_t f = static_cast<size_t>(fi);
            d[static_cast<size_t>(face.left)] += adv_pos[f] + t_diff[f];
            d[static_cast<size_t>(face.right)] += -adv_neg[f] + t_diff[f];
        }
        return d;
    }
};

inline int bicgstab(const TransportMatrix& A, const std::vector<double>& b,
                    std::vector<double>& x, double tol, int max_iter)
{
    const size_t n = b.size();
    const std::vector<double> diag = A.diagonal();
    auto precond = [&diag](std::vector<double>& z) {
        for (size_t i = 0; i < z.size(); ++i)
            if (diag[i] != 0.0) z[i] /= diag[i];
    };
    auto dot = [](const std::vector<double>& a, const std::vector<double>& c) {
        double s = 0.0;
        for (size_t i = 0; i < a.size(); ++i) s += a[i] * c[i];
        return s;
    };
    auto norm = [&dot](const std::vector<double>& a) {
        return std::sqrt(dot(a, a));
    };

    const double bnorm = norm(b);
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        return 0;
    }
    const double target = tol * bnorm;

    std::vector<double> r(n), rhat(n), p(n, 0.0), v(n, 0.0), s(n), t(n),
        phat(n), shat(n), ax(n);
    A.apply(x, ax);
    for (size_t i = 0; i < n; ++i) r[i] = b[i] - ax[i];
    if (norm(r) <= target) return 0;
    rhat = r;

    double rho = 1.0, alpha = 1.0, omega = 1.0;
    std::vector<double> history;
    for (int it = 1; it <= max_iter; ++it) {
        const double rho1 = dot(rhat, r);
        if (rho1 == 0.0) {
            // Breakdown: restart the shadow residual.
            A.apply(x, ax);
            for (size_t i = 0; i < n; ++i) r[i] = b[i] - ax[i];
            rhat = r;
            std::fill(p.begin(), p.end(), 0.0);
            std::fill(v.begin(), v.end(), 0.0);
            rho = alpha = omega = 1.0;
            continue;
        }
        const double beta = (rho1 / rho) * (alpha / omega);
        rho = rho1;
        for (size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
        phat = p;
        precond(phat);
        A.apply(phat, v);
        const double rv = dot(rhat, v);
        if (rv == 0.0)
            throw SolveFailure("transport solve: BiCGStab breakdown", history);
        alpha = rho / rv;
        for (size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
        if (norm(s) <= target) {
            for (size_t i = 0; i < n; ++i) x[i] += alpha * phat[i];
            A.apply(x, ax);
            for (size_t i = 0; i < n; ++i) r[i] = b[i] - ax[i];
            if (norm(r) <= target) return it;
            continue;
        }
        shat = s;
        precond(shat);
        A.apply(shat, t);
        const double tt = dot(t, t);
        if (tt == 0.0)
            throw SolveFailure("transport solve: BiCGStab stagnation", history);
        omega = dot(t, s) / tt;
        for (size_t i = 0; i < n; ++i) {
            x[i] += alpha * phat[i] + omega * shat[i];
            r[i] = s[i] - omega * t[i];
        }
        const double rn = norm(r);
        history.push_back(rn / bnorm);
        if (rn <= target) {
            A.apply(x, ax);
            for (size_t i = 0; i < n; ++i) r[i] = b[i] - ax[i];
            if (norm(r) <= target) return it;
        }
        if (omega == 0.0)
            throw SolveFailure("transport solve: omega breakdown", history);
    }
    throw SolveFailure("transport solve: no convergence within max iterations",
                       history);
}

}  // namespace detail

/// One backward-Euler step of the concentration equation: implicit upwind
/// advection, implicit diagonal dispersion, explicit off-diagonal
/// dispersion from least-squares cell gradients, implicit well sink and
/// explicit well source.
inline TransportState step_concentration(const TransportState& state,
                                         const FlowState& flow, const Grid& g,
                                         const RockModel& rock,
                                         const FluidModel& fluid,
                                         const MollifiedSources& src,
                                         double dt,
                                         const TransportStepOptions& opts = {},
                                         StepDiagnostics* diag_out = nullptr)
{
    if (!(dt > 0.0)) throw std::invalid_argument("step_concentration: dt <= 0");
    const int n = g.num_cells();
    const double vol = g.cell_volume();

    // Dispersion tensors at (possibly truncated) cell velocities.
    std::vector<SymTensor2> d(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        d[static_cast<size_t>(i)] = dispersion_tensor(
            i, truncate_velocity(flow.u[i], opts.truncation_k), rock, fluid);

    detail::TransportMatrix A;
    A.grid = &g;
    A.cell_term.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        A.cell_term[static_cast<size_t>(i)] =
            rock.phi[i] * vol / dt + src.qP[i] * vol;

    A.adv_pos.resize(static_cast<size_t>(g.num_faces()));
    A.adv_neg.resize(static_cast<size_t>(g.num_faces()));
    A.t_diff.resize(static_cast<size_t>(g.num_faces()));
    std::vector<double> d_cross(static_cast<size_t>(g.num_faces()));
    double cfl_rate_max = 0.0;
    std::vector<double> cfl_rate(static_cast<size_t>(n), 0.0);
    for (int fi = 0; fi < g.num_faces(); ++fi) {
        const Face& face = g.faces[static_cast<size_t>(fi)];
        const size_t f = static_cast<size_t>(fi);
        const double flux = flow.flux[fi];
        A.adv_pos[f] = std::max(flux, 0.0);
        A.adv_neg[f] = std::min(flux, 0.0);
        const bool xdir = face.normal.x != 0.0;
        const SymTensor2& dl = d[static_cast<size_t>(face.left)];
        const SymTensor2& dr = d[static_cast<size_t>(face.right)];
        const double dnn = 0.5 * (xdir ? dl.a11 + dr.a11 : dl.a22 + dr.a22);
        A.t_diff[f] = dnn * face.area / face.dist;
        d_cross[f] = 0.5 * (dl.a12 + dr.a12);
        const double h_tan = xdir ? g.hy() : g.hx();
        const double rate = std::abs(d_cross[f]) * face.area / h_tan;
        cfl_rate[static_cast<size_t>(face.left)] += rate;
        cfl_rate[static_cast<size_t>(face.right)] += rate;
    }
    for (int i = 0; i < n; ++i)
        cfl_rate_max = std::max(
            cfl_rate_max, cfl_rate[static_cast<size_t>(i)] / (rock.phi[i] * vol));
    if (cfl_rate_max > 0.0 && dt > opts.cfl_safety / cfl_rate_max) {
        std::ostringstream os;
        os << "step_concentration: explicit off-diagonal dispersion CFL "
              "violated; require dt <= "
           << opts.cfl_safety / cfl_rate_max << " (got " << dt << ")";
        throw std::invalid_argument(os.str());
    }

    // Explicit cross-derivative dispersive fluxes from cell gradients.
    const VectorField grad = least_squares_gradient(state.c, g);
    std::vector<double> b(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        b[static_cast<size_t>(i)] =
            rock.phi[i] * vol / dt * state.c[i] + src.qI_chat[i] * vol;
    for (int fi = 0; fi < g.num_faces(); ++fi) {
        const Face& face = g.faces[static_cast<size_t>(fi)];
        const size_t f = static_cast<size_t>(fi);
        if (d_cross[f] == 0.0) continue;
        const bool xdir = face.normal.x != 0.0;
        const double tgrad =
            0.5 * (xdir ? grad[face.left].y + grad[face.right].y
                        : grad[face.left].x + grad[face.right].x);
        const double q_cross = -d_cross[f] * tgrad * face.area;
        b[static_cast<size_t>(face.left)] -= q_cross;
        b[static_cast<size_t>(face.right)] += q_cross;
    }

    std::vector<double> c_new(state.c.v);
    const int max_iter =
        opts.max_iterations > 0 ? opts.max_iterations : 10 * n + 100;
    const int iters = detail::bicgstab(A, b, c_new, opts.linear_tol, max_iter);

    TransportState next;
    next.c.v = std::move(c_new);
    next.t = state.t + dt;
    next.step = state.step + 1;
    next.prev_storage = state.storage;
    next.storage = storage_integral(next.c, g, rock);

    double qi = 0.0, qp = 0.0;
    for (int i = 0; i < n; ++i) {
        qi += src.qI_chat[i] * vol;
        qp += src.qP[i] * next.c[i] * vol;
    }
    next.injected_step = dt * qi;
    next.produced_step = dt * qp;
    next.injected = state.injected + next.injected_step;
    next.produced = state.produced + next.produced_step;

    double cmin = next.c[0], cmax = next.c[0];
    for (int i = 1; i < n; ++i) {
        cmin = std::min(cmin, next.c[i]);
        cmax = std::max(cmax, next.c[i]);
    }
    next.overshoot = std::max({0.0, cmax - 1.0, -cmin});

    if (diag_out) {
        diag_out->min_c = cmin;
        diag_out->max_c = cmax;
        diag_out->overshoot = next.overshoot;
        diag_out->iterations = iters;
        const double num = std::abs((next.storage - next.prev_storage) +
                                    next.produced_step - next.injected_step);
        // Relative to the injected mass; absolute when nothing is injected.
        diag_out->mass_residual =
            next.injected_step > 0.0 ? num / next.injected_step : num;
        const VectorField grad_new = least_squares_gradient(next.c, g);
        double energy = 0.0;
        for (int i = 0; i < n; ++i)
            energy +=
                d[static_cast<size_t>(i)].apply(grad_new[i]).dot(grad_new[i]) *
                vol;
        diag_out->energy_increment = dt * energy;
    }
    return next;
}

/// Mass balance of the last completed step, relative to the injected mass.
inline double mass_balance_residual(const TransportState& state,
                                    double /*dt*/)
{
    const double num = std::abs((state.storage - state.prev_storage) +
                                state.produced_step - state.injected_step);
    return state.injected_step > 0.0 ? num / state.injected_step : num;
}

struct TimeSeriesRow {
    int step = 0;
    double t = 0.0;
    double mass_in = 0.0;
    double mass_out = 0.0;
    double storage = 0.0;
    double balance_residual = 0.0;
    double overshoot = 0.0;
    double min_c = 0.0;
    double max_c = 0.0;
    double energy_increment = 0.0;
};

struct SimulationResult {
    Grid grid;
    RockModel rock;
    FluidModel fluid;
    MollifiedSources sources;
    double dt = 0.0;
    std::vector<ScalarField> c_history;   // nt + 1 entries, c0 first
    std::vector<ScalarField> p_history;   // nt entries
    std::vector<VectorField> u_history;   // nt entries
    std::vector<TimeSeriesRow> series;    // nt entries
    long clamp_events = 0;
    double max_speed = 0.0;
};

/// Sequential pressure-transport loop: per step solve the Neumann pressure
/// system with the current concentration, reconstruct fluxes and cell
/// velocities, then advance the concentration implicitly.
inline SimulationResult run_simulation(const Scenario& sc)
{
    const auto violations = validate_scenario(sc);
    if (!violations.empty())
        throw std::invalid_argument("run_simulation: invalid scenario: " +
                                    violations.front().str());
    if (!(sc.fluid.eps > 0.0))
        throw std::invalid_argument(
            "run_simulation: eps must be > 0 (the eps = 0 problem is the "
            "ladder limit, not a simulation)");

    SimulationResult res;
    res.grid = scenario_grid(sc);
    res.rock = scenario_rock(sc, res.grid);
    res.fluid = sc.fluid;
    res.sources = scenario_sources(sc, res.grid);
    res.dt = sc.T / sc.nt;

    ClampStats clamp;
    TransportState state =
        make_transport_state(scenario_c0(sc, res.grid), res.grid, res.rock);
    res.c_history.push_back(state.c);

    TransportStepOptions opts;
    opts.linear_tol = sc.transport_tol;
    opts.cfl_safety = sc.cfl_safety;
    opts.truncation_k = sc.truncation_k;

    for (int m = 0; m < sc.nt; ++m) {
        const FlowState flow =
            solve_flow(res.grid, res.rock, state.c, sc.fluid, res.sources,
                       sc.pressure_tol, sc.jacobi, &clamp);
        StepDiagnostics diag;
        state = step_concentration(state, flow, res.grid, res.rock, sc.fluid,
                                   res.sources, res.dt, opts, &diag);

        for (int i = 0; i < res.grid.num_cells(); ++i)
            res.max_speed = std::max(res.max_speed, flow.u[i].norm());

        res.p_history.push_back(flow.p);
        res.u_history.push_back(flow.u);
        res.c_history.push_back(state.c);
        res.series.push_back({state.step, state.t, state.injected,
                              state.produced, state.storage,
                              diag.mass_residual, diag.overshoot, diag.min_c,
                              diag.max_c, diag.energy_increment});
    }
    res.clamp_events = clamp.count;
    return res;
}

}  // namespace mdisp
