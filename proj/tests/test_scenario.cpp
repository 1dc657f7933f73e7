#include <catch2/catch.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "mdisp/cli.hpp"
#include "mdisp/io.hpp"
#include "mdisp/scenario.hpp"

using namespace mdisp;

namespace {

const std::string kScenarioDir = MDISP_SCENARIO_DIR;

bool has_label(const std::vector<ScenarioError>& errors,
               const std::string& label)
{
    for (const auto& e : errors)
        if (e.label == label) return true;
    return false;
}

}  // namespace

TEST_CASE("shipped reference scenario parses and validates", "[scenario]")
{
    const ParseResult res =
        parse_scenario_file(kScenarioDir + "/quarter_five_spot.cfg");
    for (const auto& e : res.errors) UNSCOPED_INFO(e.str());
    REQUIRE(res.ok());
    const Scenario& sc = *res.scenario;
    REQUIRE(sc.nx == 64);
    REQUIRE(sc.nt == 200);
    REQUIRE(sc.wells.size() == 2);
    REQUIRE(sc.eps_list.size() == 4);
}

TEST_CASE("hypothesis fixtures are rejected with the right labels",
          "[scenario]")
{
    const std::pair<const char*, const char*> cases[] = {
        {"bad_domain.cfg", "hyp:domain"},
        {"bad_porosity.cfg", "hyp:porosity"},
        {"bad_permeability.cfg", "hyp:K"},
        {"bad_viscosity.cfg", "hyp:viscosity"},
        {"bad_dispersion.cfg", "hyp:mdt"},
        {"bad_injectedconc.cfg", "hyp:injectedconc"},
        {"bad_initialconc.cfg", "hyp:initialconc"},
        {"bad_source.cfg", "hyp:source"},
        {"bad_compatibility.cfg", "hyp:compatibility"},
    };
    for (const auto& [file, label] : cases) {
        INFO(file);
        const ParseResult res =
            parse_scenario_file(kScenarioDir + "/invalid/" + file);
        REQUIRE_FALSE(res.ok());
        REQUIRE(has_label(res.errors, label));
    }
}

TEST_CASE("parser reports unknown keys and sections with line numbers",
          "[scenario]")
{
    const std::string text =
        "domain {\n"
        "  Lx = 1.0\n"
        "  Lz = 1.0\n"
        "}\n";
    const ParseResult res = parse_scenario_text(text);
    REQUIRE_FALSE(res.ok());
    bool found = false;
    for (const auto& e : res.errors)
        if (e.message.find("Lz") != std::string::npos) {
            found = true;
            REQUIRE(e.line == 3);
        }
    REQUIRE(found);
}

TEST_CASE("validation messages carry hypothesis labels", "[scenario]")
{
    ParseResult base =
        parse_scenario_file(kScenarioDir + "/quarter_five_spot.cfg");
    REQUIRE(base.ok());

    SECTION("c0 above one")
    {
        Scenario sc = *base.scenario;
        sc.c0 = {1.5};
        REQUIRE(has_label(validate_scenario(sc), "hyp:initialconc"));
    }
    SECTION("porosity below the declared bound")
    {
        Scenario sc = *base.scenario;
        sc.regions[0].phi = 0.1;  // phi_star = 0.2
        REQUIRE(has_label(validate_scenario(sc), "hyp:porosity"));
    }
    SECTION("nt = 0")
    {
        Scenario sc = *base.scenario;
        sc.nt = 0;
        REQUIRE(has_label(validate_scenario(sc), "hyp:domain"));
    }
    SECTION("overlapping regions")
    {
        Scenario sc = *base.scenario;
        sc.regions.push_back({0.2, 0.2, 0.8, 0.8, 0.2, 1.0, 1.0});
        REQUIRE(has_label(validate_scenario(sc), "rock.regions"));
    }
    SECTION("declared k_star bound violated")
    {
        Scenario sc = *base.scenario;
        sc.k_star = 0.5;
        sc.regions[0].kx = 3.0;  // above 1/k_star = 2
        REQUIRE(has_label(validate_scenario(sc), "hyp:K"));
    }
}

TEST_CASE("canonical round-trip", "[scenario]")
{
    const ParseResult first =
        parse_scenario_file(kScenarioDir + "/quarter_five_spot.cfg");
    REQUIRE(first.ok());
    const std::string canon = serialize_scenario(*first.scenario);
    const ParseResult second = parse_scenario_text(canon);
    REQUIRE(second.ok());
    REQUIRE(serialize_scenario(*second.scenario) == canon);
    REQUIRE(scenario_config_hash(*first.scenario) ==
            scenario_config_hash(*second.scenario));
}

TEST_CASE("snapshot writer format", "[scenario][io]")
{
    const Grid g = build_grid(2, 2, 1.0, 2.0);
    ScalarField f(4);
    f[0] = 0.0;
    f[1] = 0.25;
    f[2] = 0.5;
    f[3] = 1.0;
    const std::string path = "/tmp/mdisp_test_snapshot.grid";
    write_grid_snapshot(path, f, g, 0.125);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    REQUIRE(line == "2 2 1 2 0.125");
    std::getline(in, line);
    REQUIRE(line == "0 0.25");  // bottom row first
    std::getline(in, line);
    REQUIRE(line == "0.5 1");
    std::remove(path.c_str());
}

TEST_CASE("pgm writer is binary P5 with clamped linear mapping",
          "[scenario][io]")
{
    const Grid g = build_grid(2, 2, 1.0, 1.0);
    ScalarField f(4);
    f[0] = -0.5;  // clamps to 0
    f[1] = 0.5;
    f[2] = 1.5;  // clamps to 255
    f[3] = 1.0;
    const std::string path = "/tmp/mdisp_test.pgm";
    write_pgm(path, f, g);
    std::ifstream in(path, std::ios::binary);
    std::string header;
    std::getline(in, header);
    REQUIRE(header == "P5");
    std::getline(in, header);
    REQUIRE(header == "2 2");
    std::getline(in, header);
    REQUIRE(header == "255");
    unsigned char bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    // top row first: cells (0,1), (1,1) then (0,0), (1,0)
    REQUIRE(static_cast<int>(bytes[0]) == 255);
    REQUIRE(static_cast<int>(bytes[1]) == 255);
    REQUIRE(static_cast<int>(bytes[2]) == 0);
    REQUIRE(static_cast<int>(bytes[3]) == 128);
    std::remove(path.c_str());
}

TEST_CASE("series csv has the documented columns", "[scenario][io]")
{
    std::vector<TimeSeriesRow> series(1);
    series[0] = {3, 0.1, 1.0 / 3.0, 0.2, 0.5, 1e-12, 0.0, 0.0, 1.0, 0.25};
    const std::string path = "/tmp/mdisp_test_series.csv";
    write_series_csv(path, series);
    std::ifstream in(path);
    std::string header, row;
    std::getline(in, header);
    REQUIRE(header ==
            "step,t,mass_in,mass_out,storage,balance_residual,overshoot,"
            "min_c,max_c,energy_increment");
    std::getline(in, row);
    // 17 significant digits reproduce the double exactly
    REQUIRE(row.find("0.33333333333333331") != std::string::npos);
    std::remove(path.c_str());
}

TEST_CASE("cli entry points", "[scenario][cli]")
{
    SECTION("check-hypotheses on the shipped scenario exits 0")
    {
        std::ostringstream out, err;
        const int rc = run_cli(
            {"check-hypotheses", kScenarioDir + "/quarter_five_spot.cfg"}, out,
            err);
        REQUIRE(rc == 0);
    }
    SECTION("check-hypotheses on a broken fixture exits 1 with ERROR lines")
    {
        std::ostringstream out, err;
        const int rc = run_cli(
            {"check-hypotheses", kScenarioDir + "/invalid/bad_initialconc.cfg"},
            out, err);
        REQUIRE(rc == 1);
        REQUIRE(err.str().find("ERROR: hyp:initialconc") != std::string::npos);
    }
    SECTION("unknown command exits 1")
    {
        std::ostringstream out, err;
        REQUIRE(run_cli({"frobnicate"}, out, err) == 1);
    }
    SECTION("ladder command writes the report files")
    {
        ParseResult res =
            parse_scenario_file(kScenarioDir + "/quarter_five_spot.cfg");
        REQUIRE(res.ok());
        Scenario sc = *res.scenario;
        sc.nx = sc.ny = 8;
        sc.nt = 4;
        sc.T = 0.02;
        sc.mollify_radius = 0.1;
        sc.out_dir = "/tmp/mdisp_cli_ladder";
        sc.k_list = {50.0, 100.0};
        sc.r_list.clear();
        sc.eps_list = {4e-3, 1e-3};
        const std::string tmp_cfg = "/tmp/mdisp_cli_ladder.cfg";
        {
            std::ofstream f(tmp_cfg);
            f << serialize_scenario(sc);
        }
        std::ostringstream out, err;
        const int rc = run_cli({"ladder", tmp_cfg}, out, err);
        INFO(err.str());
        REQUIRE(rc == 0);
        REQUIRE(std::ifstream("/tmp/mdisp_cli_ladder/ladder.csv").good());
        REQUIRE(
            std::ifstream("/tmp/mdisp_cli_ladder/ladder_summary.txt").good());
        std::remove(tmp_cfg.c_str());
    }
    SECTION("simulate writes series and snapshots")
    {
        // tiny run in a temp directory
        ParseResult res =
            parse_scenario_file(kScenarioDir + "/quarter_five_spot.cfg");
        REQUIRE(res.ok());
        Scenario sc = *res.scenario;
        sc.nx = sc.ny = 8;
        sc.nt = 4;
        sc.T = 0.02;
        sc.snapshot_every = 2;
        sc.pgm = true;
        sc.out_dir = "/tmp/mdisp_cli_sim";
        sc.k_list.clear();
        sc.r_list.clear();
        sc.eps_list.clear();
        const std::string tmp_cfg = "/tmp/mdisp_cli_sim.cfg";
        {
            std::ofstream f(tmp_cfg);
            f << serialize_scenario(sc);
        }
        std::ostringstream out, err;
        const int rc = run_cli({"simulate", tmp_cfg}, out, err);
        INFO(err.str());
        REQUIRE(rc == 0);
        REQUIRE(std::ifstream("/tmp/mdisp_cli_sim/series.csv").good());
        REQUIRE(std::ifstream("/tmp/mdisp_cli_sim/c_4.grid").good());
        REQUIRE(std::ifstream("/tmp/mdisp_cli_sim/p_4.grid").good());
        REQUIRE(std::ifstream("/tmp/mdisp_cli_sim/c_4.pgm").good());
        std::remove(tmp_cfg.c_str());
    }
}
