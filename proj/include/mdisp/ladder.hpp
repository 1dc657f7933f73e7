#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "mdisp/analysis.hpp"
#include "mdisp/scenario.hpp"
#include "mdisp/transport.hpp"

namespace mdisp {

inline constexpr const char* kCodeVersion = "mdisp 0.1.0";

/// One-axis-at-a-time sweep over truncation level k, mollification radius
/// r and molecular diffusion eps. Lists are ordered coarsest to finest
/// (k ascending, r and eps descending); the other axes sit at their
/// finest values.
struct LadderPlan {
    Scenario base;
    std::vector<double> k_list;
    std::vector<double> r_list;
    std::vector<double> eps_list;
    std::vector<double> q_list;
};

inline LadderPlan make_ladder_plan(const Scenario& sc)
{
    LadderPlan plan;
    plan.base = sc;
    plan.k_list = sc.k_list;
    plan.r_list = sc.r_list;
    plan.eps_list = sc.eps_list;
    plan.q_list = sc.q_list;
    if (!plan.base.has_ladder() && plan.k_list.empty() && plan.r_list.empty() &&
        plan.eps_list.empty())
        throw std::invalid_argument("make_ladder_plan: scenario has no ladder");
    return plan;
}

struct LadderPointRecord {
    std::string axis;  // "k", "r" or "eps"
    double label = 0.0;
    double energy = 0.0;
    double bv_mu = 0.0;
    double bv_inv_mu = 0.0;
    double theta_p_h1 = 0.0;
    std::vector<double> gradp_lq;  // aligned with the plan's q list
    double overshoot_max = 0.0;
    double mass_residual_max = 0.0;
    double c_increment = std::numeric_limits<double>::quiet_NaN();
    double c_increment_vs_finest = std::numeric_limits<double>::quiet_NaN();
    double u_increment_theta = std::numeric_limits<double>::quiet_NaN();
    double weighted_c_vs_finest = std::numeric_limits<double>::quiet_NaN();
};

struct LadderVerdict {
    std::string name;
    bool pass = false;
    double value = 0.0;
    std::string detail;
};

struct ConvergenceReport {
    std::vector<double> q_list;
    std::vector<LadderPointRecord> points;
    std::vector<LadderVerdict> verdicts;
    std::string config_hash;
    std::string code_version = kCodeVersion;
    bool aborted = false;
    std::string abort_message;
};

struct CauchyRate {
    std::vector<double> ratios;
    bool contracting = false;
};

/// Ratios of consecutive Cauchy increments; "contracting" iff every ratio
/// is at most 1.1.
inline CauchyRate cauchy_rate(const std::vector<double>& increments)
{
    if (increments.size() < 2)
        throw std::invalid_argument("cauchy_rate: need at least 2 increments");
    CauchyRate out;
    out.contracting = true;
    for (size_t i = 0; i + 1 < increments.size(); ++i) {
        const double ratio =
            increments[i] > 0.0
                ? increments[i + 1] / increments[i]
                : (increments[i + 1] > 0.0
                       ? std::numeric_limits<double>::infinity()
                       : 0.0);
        out.ratios.push_back(ratio);
        if (!(ratio <= 1.1)) out.contracting = false;
    }
    return out;
}

namespace detail {

inline double spacetime_l2_increment(const SimulationResult& a,
                                     const SimulationResult& b)
{
    const Grid& g = a.grid;
    const double vol = g.cell_volume();
    double s = 0.0;
    for (size_t m = 0; m + 1 < a.c_history.size(); ++m) {
        const ScalarField& ca = a.c_history[m + 1];
        const ScalarField& cb = b.c_history[m + 1];
        double st = 0.0;
        for (int c = 0; c < g.num_cells(); ++c) {
            const double d = ca[c] - cb[c];
            st += d * d;
        }
        s += a.dt * st * vol;
    }
    return std::sqrt(s);
}

inline double velocity_increment_theta(const SimulationResult& a,
                                       const SimulationResult& b,
                                       const CutoffField& cut)
{
    const Grid& g = a.grid;
    const double vol = g.cell_volume();
    double s = 0.0;
    for (size_t m = 0; m < a.u_history.size(); ++m) {
        double st = 0.0;
        for (int c = 0; c < g.num_cells(); ++c) {
            const Vec2 d = a.u_history[m][c] - b.u_history[m][c];
            st += cut.theta[c] * d.dot(d) * vol;
        }
        s += a.dt * st;
    }
    return std::sqrt(s);
}

inline double weighted_concentration_gap(const SimulationResult& a,
                                         const SimulationResult& finest)
{
    const Grid& g = a.grid;
    const double vol = g.cell_volume();
    double s = 0.0;
    for (size_t m = 0; m + 1 < a.c_history.size(); ++m) {
        double st = 0.0;
        for (int c = 0; c < g.num_cells(); ++c) {
            const double d = a.c_history[m + 1][c] - finest.c_history[m + 1][c];
            st += d * d * finest.u_history[m][c].norm() * vol;
        }
        s += a.dt * st;
    }
    return s;
}

}  // namespace detail

/// Runs the full ladder: one simulation per point (the shared finest point
/// runs once), Cauchy increments on the common grid and every analysis
/// monitor per point. Any simulation failure aborts its axis; partial
/// results are retained and flagged.
inline ConvergenceReport run_ladder(const LadderPlan& plan)
{
    const Scenario& base = plan.base;
    ConvergenceReport report;
    report.q_list = plan.q_list;
    report.config_hash = scenario_config_hash(base);

    const double k_finest = plan.k_list.empty()
                                ? base.truncation_k
                                : plan.k_list.back();
    const double r_finest =
        plan.r_list.empty() ? base.mollify_radius : plan.r_list.back();
    const double eps_finest =
        plan.eps_list.empty() ? base.fluid.eps : plan.eps_list.back();

    auto point_scenario = [&base](double k, double r, double eps) {
        Scenario sc = base;
        sc.truncation_k = k;
        sc.mollify_radius = r;
        sc.point_source = false;
        sc.fluid.eps = eps;
        sc.k_list.clear();
        sc.r_list.clear();
        sc.eps_list.clear();
        return sc;
    };

    using Key = std::tuple<double, double, double>;
    std::vector<Key> keys;
    auto add_key = [&keys](Key k) {
        for (const Key& e : keys)
            if (e == k) return;
        keys.push_back(k);
    };
    add_key({k_finest, r_finest, eps_finest});
    for (double k : plan.k_list) add_key({k, r_finest, eps_finest});
    for (double r : plan.r_list) add_key({k_finest, r, eps_finest});
    for (double eps : plan.eps_list) add_key({k_finest, r_finest, eps});

    // Ladder points are independent jobs; results are folded in ladder
    // order regardless of completion order.
    std::map<Key, std::shared_future<SimulationResult>> jobs;
    for (const Key& key : keys)
        jobs.emplace(key, std::async(std::launch::async, [&point_scenario, key] {
                         return run_simulation(point_scenario(
                             std::get<0>(key), std::get<1>(key),
                             std::get<2>(key)));
                     }).share());

    const Grid grid = scenario_grid(base);
    std::vector<Vec2> well_points;
    for (const Well& w : base.wells) well_points.push_back(w.pos);
    const RockModel rock_for_cut = scenario_rock(base, grid);
    const double max_radius =
        std::max(plan.r_list.empty() ? base.mollify_radius : plan.r_list.front(),
                 0.0);
    double margin = std::max(2.5 * grid.cell_diagonal(), 1.2 * max_radius);
    margin = std::min(margin, std::min(grid.Lx, grid.Ly) / 6.0);
    margin = std::max(margin, 2.0 * grid.cell_diagonal() * (1.0 + 1e-9));
    const CutoffField cut =
        build_cutoff(grid, well_points, rock_for_cut.discontinuities, margin);
    const std::vector<ScalarField> bank = detail::test_function_bank(grid);

    auto monitors = [&](const SimulationResult& run, const std::string& axis,
                        double label) {
        LadderPointRecord rec;
        rec.axis = axis;
        rec.label = label;
        std::vector<ScalarField> c_end(run.c_history.begin() + 1,
                                       run.c_history.end());
        rec.energy = energy_functional(c_end, run.u_history, run.grid,
                                       run.rock, run.fluid, run.dt,
                                       axis == "k" ? label : k_finest);
        const ViscosityAverages va = viscosity_average_series(
            run.c_history, run.grid, run.rock, run.fluid, bank[0]);
        rec.bv_mu = bv_time_seminorm(va.mu_series);
        rec.bv_inv_mu = bv_time_seminorm(va.inv_mu_series);
        double h1 = 0.0;
        for (const ScalarField& p : run.p_history) {
            ScalarField thp = p;
            for (int c = 0; c < run.grid.num_cells(); ++c)
                thp[c] *= cut.theta[c];
            h1 = std::max(h1, h1_norm(thp, run.grid));
        }
        rec.theta_p_h1 = h1;
        for (double q : plan.q_list) {
            double worst = 0.0;
            for (const ScalarField& p : run.p_history)
                worst = std::max(worst, lq_gradient_norm(p, run.grid, q));
            rec.gradp_lq.push_back(worst);
        }
        for (const TimeSeriesRow& row : run.series) {
            rec.overshoot_max = std::max(rec.overshoot_max, row.overshoot);
            rec.mass_residual_max =
                std::max(rec.mass_residual_max, row.balance_residual);
        }
        return rec;
    };

    auto fetch = [&jobs](Key key) { return jobs.at(key).get(); };

    struct AxisSpec {
        std::string name;
        std::vector<double> labels;
        std::function<Key(double)> key_of;
    };
    std::vector<AxisSpec> axes;
    if (!plan.k_list.empty())
        axes.push_back({"k", plan.k_list, [&](double k) {
                            return Key{k, r_finest, eps_finest};
                        }});
    if (!plan.r_list.empty())
        axes.push_back({"r", plan.r_list, [&](double r) {
                            return Key{k_finest, r, eps_finest};
                        }});
    if (!plan.eps_list.empty())
        axes.push_back({"eps", plan.eps_list, [&](double eps) {
                            return Key{k_finest, r_finest, eps};
                        }});

    SimulationResult finest;
    try {
        finest = fetch({k_finest, r_finest, eps_finest});
    } catch (const std::exception& ex) {
        report.aborted = true;
        report.abort_message = std::string("finest point failed: ") + ex.what();
        return report;
    }

    std::map<std::string, std::vector<double>> c_increments_per_axis;
    for (const AxisSpec& axis : axes) {
        const SimulationResult* prev = nullptr;
        SimulationResult prev_storage;
        for (double label : axis.labels) {
            SimulationResult run;
            try {
                run = fetch(axis.key_of(label));
            } catch (const std::exception& ex) {
                report.aborted = true;
                report.abort_message = "axis " + axis.name + " aborted at " +
                                       std::to_string(label) + ": " + ex.what();
                break;
            }
            LadderPointRecord rec = monitors(run, axis.name, label);
            if (prev) {
                rec.c_increment = detail::spacetime_l2_increment(run, *prev);
                rec.u_increment_theta =
                    detail::velocity_increment_theta(run, *prev, cut);
                c_increments_per_axis[axis.name].push_back(rec.c_increment);
            }
            rec.c_increment_vs_finest =
                detail::spacetime_l2_increment(run, finest);
            rec.weighted_c_vs_finest =
                detail::weighted_concentration_gap(run, finest);
            report.points.push_back(std::move(rec));
            prev_storage = std::move(run);
            prev = &prev_storage;
        }
    }

    auto ratio_verdict = [&report](const std::string& name,
                                   const std::vector<double>& values) {
        if (values.empty()) return;
        double lo = values.front(), hi = values.front();
        for (double v : values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        const double ratio = lo > 0.0 ? hi / lo
                                      : (hi > 0.0
                                             ? std::numeric_limits<double>::infinity()
                                             : 1.0);
        std::ostringstream det;
        det << "max/min = " << ratio;
        report.verdicts.push_back({name, ratio <= 2.0, ratio, det.str()});
    };

    // Uniform-estimate monitors across the eps axis.
    std::vector<double> energies, bvmu, bvinv, h1s;
    std::vector<std::vector<double>> lqs(plan.q_list.size());
    std::vector<double> weighted;
    for (const LadderPointRecord& rec : report.points) {
        if (rec.axis != "eps") continue;
        energies.push_back(rec.energy);
        bvmu.push_back(rec.bv_mu);
        bvinv.push_back(rec.bv_inv_mu);
        h1s.push_back(rec.theta_p_h1);
        for (size_t qi = 0; qi < rec.gradp_lq.size(); ++qi)
            lqs[qi].push_back(rec.gradp_lq[qi]);
        if (!std::isnan(rec.weighted_c_vs_finest) &&
            rec.label != eps_finest)
            weighted.push_back(rec.weighted_c_vs_finest);
    }
    ratio_verdict("energy uniform (eps axis)", energies);
    ratio_verdict("BV mu average uniform (eps axis)", bvmu);
    ratio_verdict("BV 1/mu average uniform (eps axis)", bvinv);
    ratio_verdict("theta p H1 uniform (eps axis)", h1s);
    for (size_t qi = 0; qi < plan.q_list.size(); ++qi) {
        char qbuf[32];
        std::snprintf(qbuf, sizeof(qbuf), "%g", plan.q_list[qi]);
        if (plan.q_list[qi] < 2.0) {
            ratio_verdict(std::string("grad p L") + qbuf +
                              " uniform expected (eps axis)",
                          lqs[qi]);
        } else if (!lqs[qi].empty()) {
            // q >= 2 has no uniform bound under measure wells; informational.
            double lo = lqs[qi].front(), hi = lqs[qi].front();
            for (double v : lqs[qi]) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            std::ostringstream det;
            det << "divergence expected for q >= 2; max/min = "
                << (lo > 0.0 ? hi / lo : 0.0);
            report.verdicts.push_back({std::string("grad p L") + qbuf +
                                           " (eps axis)",
                                       true, lo > 0.0 ? hi / lo : 0.0,
                                       det.str()});
        }
    }

    for (const auto& [axis, incs] : c_increments_per_axis) {
        if (incs.size() < 2) continue;
        const CauchyRate cr = cauchy_rate(incs);
        std::ostringstream det;
        det << "ratios:";
        for (double r : cr.ratios) det << " " << r;
        report.verdicts.push_back({"c Cauchy contraction (" + axis + " axis)",
                                   cr.contracting,
                                   cr.ratios.empty() ? 0.0 : cr.ratios.back(),
                                   det.str()});
    }

    if (weighted.size() >= 2) {
        bool nonincreasing = true;
        for (size_t i = 0; i + 1 < weighted.size(); ++i)
            if (weighted[i + 1] > 1.1 * weighted[i]) nonincreasing = false;
        report.verdicts.push_back(
            {"weighted concentration gap nonincreasing (eps axis)",
             nonincreasing, weighted.back(),
             "vs finest-eps surrogate limit"});
    }

    return report;
}

}  // namespace mdisp
