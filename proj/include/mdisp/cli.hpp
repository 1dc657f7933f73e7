#pragma once

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "mdisp/cc_cases.hpp"
#include "mdisp/io.hpp"
#include "mdisp/ladder.hpp"
#include "mdisp/scenario.hpp"
#include "mdisp/transport.hpp"

namespace mdisp {

namespace detail {

inline void print_errors(const std::vector<ScenarioError>& errors,
                         std::ostream& err)
{
    for (const ScenarioError& e : errors) err << "ERROR: " << e.str() << "\n";
}

inline int cmd_check(const std::string& path, std::ostream& out,
                     std::ostream& err)
{
    const ParseResult res = parse_scenario_file(path);
    if (!res.ok()) {
        print_errors(res.errors, err);
        return 1;
    }
    out << "ok: all hypothesis validators pass\n";
    return 0;
}

inline int cmd_simulate(const std::string& path, std::ostream& out,
                        std::ostream& err)
{
    const ParseResult res = parse_scenario_file(path);
    if (!res.ok()) {
        print_errors(res.errors, err);
        return 1;
    }
    const Scenario& sc = *res.scenario;
    try {
        const SimulationResult sim = run_simulation(sc);
        std::filesystem::create_directories(sc.out_dir);
        write_series_csv(sc.out_dir + "/series.csv", sim.series);

        auto snapshot = [&](int step) {
            const std::string tag = std::to_string(step);
            const double t = step * sim.dt;
            write_grid_snapshot(sc.out_dir + "/c_" + tag + ".grid",
                                sim.c_history[static_cast<size_t>(step)],
                                sim.grid, t);
            if (step > 0)
                write_grid_snapshot(sc.out_dir + "/p_" + tag + ".grid",
                                    sim.p_history[static_cast<size_t>(step - 1)],
                                    sim.grid, t);
            if (sc.pgm)
                write_pgm(sc.out_dir + "/c_" + tag + ".pgm",
                          sim.c_history[static_cast<size_t>(step)], sim.grid);
        };
        if (sc.snapshot_every > 0)
            for (int m = 0; m <= sc.nt; m += sc.snapshot_every) snapshot(m);
        if (sc.snapshot_every == 0 || sc.nt % sc.snapshot_every != 0)
            snapshot(sc.nt);

        const TimeSeriesRow& last = sim.series.back();
        out << "simulate: " << sc.nt << " steps on " << sc.nx << "x" << sc.ny
            << ", outputs in " << sc.out_dir << "\n";
        out << "  final storage " << last.storage << ", injected "
            << last.mass_in << ", produced " << last.mass_out << "\n";
        out << "  max overshoot ";
        double worst = 0.0, worst_resid = 0.0;
        for (const TimeSeriesRow& r : sim.series) {
            worst = std::max(worst, r.overshoot);
            worst_resid = std::max(worst_resid, r.balance_residual);
        }
        out << worst << ", max balance residual " << worst_resid << "\n";
        if (sim.clamp_events > 0)
            out << "  viscosity clamping events: " << sim.clamp_events << "\n";
        return 0;
    } catch (const std::exception& ex) {
        err << "ERROR: runtime: " << ex.what() << "\n";
        return 2;
    }
}

inline int cmd_ladder(const std::string& path, std::ostream& out,
                      std::ostream& err)
{
    const ParseResult res = parse_scenario_file(path);
    if (!res.ok()) {
        print_errors(res.errors, err);
        return 1;
    }
    const Scenario& sc = *res.scenario;
    if (!sc.has_ladder()) {
        err << "ERROR: ladder: scenario has no ladder section\n";
        return 1;
    }
    try {
        const ConvergenceReport report = run_ladder(make_ladder_plan(sc));
        std::filesystem::create_directories(sc.out_dir);
        write_ladder_csv(sc.out_dir + "/ladder.csv", report);
        write_ladder_summary(sc.out_dir + "/ladder_summary.txt", report);
        out << "ladder: " << report.points.size() << " points, config "
            << report.config_hash << "\n";
        for (const LadderVerdict& v : report.verdicts)
            out << (v.pass ? "  [pass] " : "  [FAIL] ") << v.name << " -- "
                << v.detail << "\n";
        if (report.aborted) {
            err << "ERROR: runtime: " << report.abort_message << "\n";
            return 2;
        }
        return 0;
    } catch (const std::exception& ex) {
        err << "ERROR: runtime: " << ex.what() << "\n";
        return 2;
    }
}

inline int cmd_cc_demo(std::ostream& out)
{
    const CcDemoCase pos = cc_demo_positive();
    out << "positive case (alpha = a(x) sin(t/eps), beta fixed smooth):\n";
    for (size_t i = 0; i < pos.report.labels.size(); ++i)
        out << "  eps " << pos.report.labels[i] << ": gap "
            << pos.report.gaps[i] << ", BV bound " << pos.report.bv_bounds[i]
            << "\n";
    out << "  verdict: " << pos.report.verdict << "\n";

    const CcDemoCase neg = cc_demo_negative();
    out << "negative case (alpha = beta = sin(t/eps)):\n";
    for (size_t i = 0; i < neg.report.labels.size(); ++i)
        out << "  eps " << neg.report.labels[i] << ": gap "
            << neg.report.gaps[i] << ", BV bound " << neg.report.bv_bounds[i]
            << "\n";
    out << "  expected persistent gap (half iint phi): " << neg.half_iint_phi
        << "\n";
    out << "  verdict: " << neg.report.verdict << "\n";
    return 0;
}

}  // namespace detail

inline int run_cli(const std::vector<std::string>& args, std::ostream& out,
                   std::ostream& err)
{
    const std::string usage =
        "usage: mdsim <command> [args]\n"
        "  simulate <scenario>          run the simulation, write series/snapshots\n"
        "  ladder <scenario>            run the approximation ladder\n"
        "  check-hypotheses <scenario>  validate only (exit 0/1)\n"
        "  cc-demo                      built-in compensated-compactness cases\n";

    if (args.empty()) {
        err << usage;
        return 1;
    }
    const std::string& cmd = args[0];
    try {
        if (cmd == "cc-demo") {
            if (args.size() != 1) {
                err << "ERROR: cli: cc-demo takes no arguments\n";
                return 1;
            }
            return detail::cmd_cc_demo(out);
        }
        if (cmd == "simulate" || cmd == "ladder" || cmd == "check-hypotheses") {
            if (args.size() != 2) {
                err << "ERROR: cli: " << cmd << " expects a scenario file\n";
                return 1;
            }
            if (cmd == "simulate") return detail::cmd_simulate(args[1], out, err);
            if (cmd == "ladder") return detail::cmd_ladder(args[1], out, err);
            return detail::cmd_check(args[1], out, err);
        }
    } catch (const std::exception& ex) {
        err << "ERROR: runtime: " << ex.what() << "\n";
        return 2;
    }
    err << "ERROR: cli: unknown command '" << cmd << "'\n" << usage;
    return 1;
}

}  // namespace mdisp
