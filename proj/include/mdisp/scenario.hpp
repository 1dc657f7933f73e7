#pragma once

#include <cctype>
#include <cstdlib>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mdisp/coefficients.hpp"
#include "mdisp/grid.hpp"
#include "mdisp/wells.hpp"

namespace mdisp {

struct ScenarioError {
    int line = 0;  // 0 for validation errors without a source location
    std::string label;
    std::string message;

    std::string str() const
    {
        std::ostringstream os;
        os << label << ": " << message;
        if (line > 0) os << " (line " << line << ")";
        return os.str();
    }
};

/// Full problem description as read from a scenario file. Defaults match
/// the documented grammar; validate_scenario enforces every hypothesis.
struct Scenario {
    double Lx = 1.0, Ly = 1.0;
    int nx = 1, ny = 1;
    double T = 1.0;
    int nt = 1;

    double phi_star = 0.0;
    double k_star = -1.0;  // optional declared permeability bound
    std::vector<RockRegion> regions;

    FluidModel fluid;

    std::vector<Well> wells;
    double mollify_radius = -1.0;
    bool point_source = false;

    std::vector<double> c0;  // one value (constant) or one per region

    double pressure_tol = 1e-10;
    double transport_tol = 1e-12;
    double cfl_safety = 0.9;
    bool jacobi = false;
    double truncation_k = std::numeric_limits<double>::infinity();

    std::string out_dir = "out";
    int snapshot_every = 0;
    bool pgm = false;

    std::vector<double> k_list;
    std::vector<double> r_list;
    std::vector<double> eps_list;
    std::vector<double> q_list = {1.5, 2.0};

    bool has_ladder() const
    {
        return !k_list.empty() || !r_list.empty() || !eps_list.empty();
    }
};

struct ParseResult {
    std::optional<Scenario> scenario;
    std::vector<ScenarioError> errors;

    bool ok() const { return errors.empty() && scenario.has_value(); }
};

namespace detail {

struct ConfigEntry {
    std::string key;
    std::vector<std::string> values;
    int line = 0;
};

struct ConfigNode {
    std::string name;
    int line = 0;
    std::vector<ConfigEntry> entries;
    std::vector<ConfigNode> children;
};

struct Tokenizer {
    std::vector<std::pair<std::string, int>> tokens;  // token, line
    size_t pos = 0;

    explicit Tokenizer(const std::string& text)
    {
        int line = 1;
        std::string cur;
        auto flush = [&]() {
            if (!cur.empty()) {
                tokens.emplace_back(cur, line);
                cur.clear();
            }
        };
        for (size_t i = 0; i < text.size(); ++i) {
            const char ch = text[i];
            if (ch == '#') {
                flush();
                while (i < text.size() && text[i] != '\n') ++i;
                ++line;
            } else if (ch == '\n') {
                flush();
                tokens.emplace_back("\n", line);
                ++line;
            } else if (std::isspace(static_cast<unsigned char>(ch))) {
                flush();
            } else if (ch == '{' || ch == '}' || ch == '=') {
                flush();
                tokens.emplace_back(std::string(1, ch), line);
            } else {
                cur += ch;
            }
        }
        flush();
    }

    bool done() const { return pos >= tokens.size(); }
    const std::pair<std::string, int>& peek() const { return tokens[pos]; }
    std::pair<std::string, int> next() { return tokens[pos++]; }
    void skip_newlines()
    {
        while (!done() && tokens[pos].first == "\n") ++pos;
    }
};

inline void parse_block(Tokenizer& tz, ConfigNode& node,
                        std::vector<ScenarioError>& errors)
{
    while (true) {
        tz.skip_newlines();
        if (tz.done()) {
            errors.push_back({node.line, "parse", "unterminated section '" +
                                                      node.name + "'"});
            return;
        }
        auto [tok, line] = tz.next();
        if (tok == "}") return;
        if (tok == "{" || tok == "=") {
            errors.push_back({line, "parse", "unexpected '" + tok + "'"});
            return;
        }
        tz.skip_newlines();
        if (tz.done()) {
            errors.push_back({line, "parse", "dangling identifier '" + tok + "'"});
            return;
        }
        auto [sep, sep_line] = tz.next();
        if (sep == "{") {
            ConfigNode child;
            child.name = tok;
            child.line = line;
            parse_block(tz, child, errors);
            node.children.push_back(std::move(child));
        } else if (sep == "=") {
            ConfigEntry e;
            e.key = tok;
            e.line = line;
            while (!tz.done() && tz.peek().first != "\n" &&
                   tz.peek().first != "}")
                e.values.push_back(tz.next().first);
            if (e.values.empty())
                errors.push_back({line, "parse", "key '" + tok + "' has no value"});
            node.entries.push_back(std::move(e));
        } else {
            errors.push_back(
                {sep_line, "parse",
                 "expected '=' or '{' after '" + tok + "', got '" + sep + "'"});
            return;
        }
    }
}

inline std::vector<ConfigNode> parse_config(const std::string& text,
                                            std::vector<ScenarioError>& errors)
{
    Tokenizer tz(text);
    std::vector<ConfigNode> sections;
    while (true) {
        tz.skip_newlines();
        if (tz.done()) break;
        auto [tok, line] = tz.next();
        if (tok == "{" || tok == "}" || tok == "=") {
            errors.push_back({line, "parse", "unexpected '" + tok + "'"});
            break;
        }
        tz.skip_newlines();
        if (tz.done() || tz.peek().first != "{") {
            errors.push_back({line, "parse",
                              "expected '{' after section '" + tok + "'"});
            break;
        }
        tz.next();
        ConfigNode node;
        node.name = tok;
        node.line = line;
        parse_block(tz, node, errors);
        sections.push_back(std::move(node));
    }
    return sections;
}

inline bool to_double(const std::string& s, double& out)
{
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end && *end == '\0' && end != s.c_str();
}

inline bool to_int(const std::string& s, int& out)
{
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (!end || *end != '\0' || end == s.c_str()) return false;
    out = static_cast<int>(v);
    return true;
}

inline bool to_bool(const std::string& s, bool& out)
{
    if (s == "true") {
        out = true;
        return true;
    }
    if (s == "false") {
        out = false;
        return true;
    }
    return false;
}

class SectionReader {
  public:
    SectionReader(const ConfigNode& node, std::vector<ScenarioError>& errors)
        : node_(node), errors_(errors),
          used_(node.entries.size(), false)
    {
    }

    ~SectionReader()
    {
        for (size_t i = 0; i < node_.entries.size(); ++i)
            if (!used_[i])
                errors_.push_back({node_.entries[i].line, "parse",
                                   "unknown key '" + node_.entries[i].key +
                                       "' in section '" + node_.name + "'"});
    }

    const ConfigEntry* find(const std::string& key)
    {
        for (size_t i = 0; i < node_.entries.size(); ++i)
            if (node_.entries[i].key == key) {
                used_[i] = true;
                return &node_.entries[i];
            }
        return nullptr;
    }

    bool get_double(const std::string& key, double& out, bool required)
    {
        const ConfigEntry* e = find(key);
        if (!e) {
            if (required) missing(key);
            return false;
        }
        if (e->values.size() != 1 || !to_double(e->values[0], out)) {
            errors_.push_back({e->line, "parse",
                               "key '" + key + "' expects one number"});
            return false;
        }
        return true;
    }

    bool get_int(const std::string& key, int& out, bool required)
    {
        const ConfigEntry* e = find(key);
        if (!e) {
            if (required) missing(key);
            return false;
        }
        if (e->values.size() != 1 || !to_int(e->values[0], out)) {
            errors_.push_back({e->line, "parse",
                               "key '" + key + "' expects one integer"});
            return false;
        }
        return true;
    }

    bool get_bool(const std::string& key, bool& out)
    {
        const ConfigEntry* e = find(key);
        if (!e) return false;
        if (e->values.size() != 1 || !to_bool(e->values[0], out)) {
            errors_.push_back({e->line, "parse",
                               "key '" + key + "' expects true or false"});
            return false;
        }
        return true;
    }

    bool get_string(const std::string& key, std::string& out)
    {
        const ConfigEntry* e = find(key);
        if (!e) return false;
        if (e->values.size() != 1) {
            errors_.push_back({e->line, "parse",
                               "key '" + key + "' expects one token"});
            return false;
        }
        out = e->values[0];
        return true;
    }

    bool get_doubles(const std::string& key, std::vector<double>& out,
                     bool required)
    {
        const ConfigEntry* e = find(key);
        if (!e) {
            if (required) missing(key);
            return false;
        }
        out.clear();
        for (const std::string& s : e->values) {
            double v;
            if (!to_double(s, v)) {
                errors_.push_back({e->line, "parse",
                                   "key '" + key + "' expects numbers"});
                return false;
            }
            out.push_back(v);
        }
        return true;
    }

  private:
    void missing(const std::string& key)
    {
        errors_.push_back({node_.line, "parse",
                           "section '" + node_.name + "' is missing key '" +
                               key + "'"});
    }

    const ConfigNode& node_;
    std::vector<ScenarioError>& errors_;
    std::vector<bool> used_;
};

}  // namespace detail

std::vector<ScenarioError> validate_scenario(const Scenario& sc);

inline ParseResult parse_scenario_text(const std::string& text)
{
    ParseResult res;
    auto& errors = res.errors;
    const auto sections = detail::parse_config(text, errors);
    if (!errors.empty()) return res;

    Scenario sc;
    bool have_domain = false, have_rock = false, have_fluid = false,
         have_wells = false, have_init = false;

    for (const auto& node : sections) {
        if (node.name == "domain") {
            have_domain = true;
            detail::SectionReader r(node, errors);
            r.get_double("Lx", sc.Lx, true);
            r.get_double("Ly", sc.Ly, true);
            r.get_int("nx", sc.nx, true);
            r.get_int("ny", sc.ny, true);
            r.get_double("T", sc.T, true);
            r.get_int("nt", sc.nt, true);
            for (const auto& child : node.children)
                errors.push_back({child.line, "parse",
                                  "unknown subsection '" + child.name + "'"});
        } else if (node.name == "rock") {
            have_rock = true;
            detail::SectionReader r(node, errors);
            r.get_double("phi_star", sc.phi_star, true);
            r.get_double("k_star", sc.k_star, false);
            for (const auto& child : node.children) {
                if (child.name != "region") {
                    errors.push_back({child.line, "parse",
                                      "unknown subsection '" + child.name + "'"});
                    continue;
                }
                detail::SectionReader cr(child, errors);
                RockRegion reg;
                std::vector<double> rect;
                if (cr.get_doubles("rect", rect, true)) {
                    if (rect.size() != 4) {
                        errors.push_back({child.line, "parse",
                                          "region rect expects x0 y0 x1 y1"});
                    } else {
                        reg.x0 = rect[0];
                        reg.y0 = rect[1];
                        reg.x1 = rect[2];
                        reg.y1 = rect[3];
                    }
                }
                cr.get_double("phi", reg.phi, true);
                cr.get_double("kx", reg.kx, true);
                cr.get_double("ky", reg.ky, true);
                sc.regions.push_back(reg);
            }
        } else if (node.name == "fluid") {
            have_fluid = true;
            detail::SectionReader r(node, errors);
            r.get_double("mu0", sc.fluid.mu0, true);
            r.get_double("M", sc.fluid.M, true);
            r.get_double("dl", sc.fluid.d_l, true);
            r.get_double("dt_disp", sc.fluid.d_t, true);
            r.get_double("eps", sc.fluid.eps, true);
            r.get_double("chat", sc.fluid.chat, true);
        } else if (node.name == "wells") {
            have_wells = true;
            detail::SectionReader r(node, errors);
            r.get_double("mollify_radius", sc.mollify_radius, false);
            r.get_bool("point_source", sc.point_source);
            for (const auto& child : node.children) {
                if (child.name != "well") {
                    errors.push_back({child.line, "parse",
                                      "unknown subsection '" + child.name + "'"});
                    continue;
                }
                detail::SectionReader cr(child, errors);
                Well w;
                cr.get_double("x", w.pos.x, true);
                cr.get_double("y", w.pos.y, true);
                std::string kind;
                if (cr.get_string("kind", kind)) {
                    if (kind == "injector")
                        w.kind = WellKind::injector;
                    else if (kind == "producer")
                        w.kind = WellKind::producer;
                    else
                        errors.push_back(
                            {child.line, "parse",
                             "well kind must be injector or producer"});
                } else {
                    errors.push_back({child.line, "parse",
                                      "well is missing key 'kind'"});
                }
                cr.get_double("rate", w.rate, true);
                cr.get_double("chat", w.chat, false);
                sc.wells.push_back(w);
            }
        } else if (node.name == "init") {
            have_init = true;
            detail::SectionReader r(node, errors);
            r.get_doubles("c0", sc.c0, true);
        } else if (node.name == "numerics") {
            detail::SectionReader r(node, errors);
            r.get_double("pressure_tol", sc.pressure_tol, false);
            r.get_double("transport_tol", sc.transport_tol, false);
            r.get_double("cfl_safety", sc.cfl_safety, false);
            r.get_bool("jacobi", sc.jacobi);
            r.get_double("truncation_k", sc.truncation_k, false);
        } else if (node.name == "output") {
            detail::SectionReader r(node, errors);
            r.get_string("directory", sc.out_dir);
            r.get_int("snapshot_every", sc.snapshot_every, false);
            r.get_bool("pgm", sc.pgm);
        } else if (node.name == "ladder") {
            detail::SectionReader r(node, errors);
            r.get_doubles("k_list", sc.k_list, false);
            r.get_doubles("r_list", sc.r_list, false);
            r.get_doubles("eps_list", sc.eps_list, false);
            r.get_doubles("q_list", sc.q_list, false);
        } else {
            errors.push_back({node.line, "parse",
                              "unknown section '" + node.name + "'"});
        }
    }

    if (!have_domain) errors.push_back({0, "parse", "missing section 'domain'"});
    if (!have_rock) errors.push_back({0, "parse", "missing section 'rock'"});
    if (!have_fluid) errors.push_back({0, "parse", "missing section 'fluid'"});
    if (!have_wells) errors.push_back({0, "parse", "missing section 'wells'"});
    if (!have_init) errors.push_back({0, "parse", "missing section 'init'"});
    if (!errors.empty()) return res;

    const auto violations = validate_scenario(sc);
    errors.insert(errors.end(), violations.begin(), violations.end());
    if (!errors.empty()) return res;

    res.scenario = std::move(sc);
    return res;
}

inline ParseResult parse_scenario_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        ParseResult res;
        res.errors.push_back({0, "io", "cannot open scenario file '" + path + "'"});
        return res;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str());
}

/// Hypothesis validators; every violation carries the label of the
/// hypothesis it breaks.
inline std::vector<ScenarioError> validate_scenario(const Scenario& sc)
{
    std::vector<ScenarioError> errors;
    auto fail = [&errors](const std::string& label, const std::string& msg) {
        errors.push_back({0, label, msg});
    };

    if (!(sc.Lx > 0.0) || !(sc.Ly > 0.0))
        fail("hyp:domain", "domain lengths must be > 0");
    if (!(sc.T > 0.0)) fail("hyp:domain", "final time T must be > 0");
    if (sc.nx < 1 || sc.ny < 1) fail("hyp:domain", "cell counts must be >= 1");
    if (sc.nt < 1) fail("hyp:domain", "nt must be >= 1");

    if (!(sc.phi_star > 0.0 && sc.phi_star <= 1.0))
        fail("hyp:porosity", "phi_star must lie in (0, 1]");
    for (size_t i = 0; i < sc.regions.size(); ++i) {
        const RockRegion& reg = sc.regions[i];
        const std::string at = " (region " + std::to_string(i) + ")";
        if (sc.phi_star > 0.0) {
            if (reg.phi < sc.phi_star)
                fail("hyp:porosity", "lower bound phi >= phi_star violated" + at);
            if (reg.phi > 1.0 / sc.phi_star)
                fail("hyp:porosity", "upper bound phi <= 1/phi_star violated" + at);
        }
        if (!(reg.kx > 0.0) || !(reg.ky > 0.0))
            fail("hyp:K", "permeability must be positive definite" + at);
        if (sc.k_star > 0.0) {
            if (std::min(reg.kx, reg.ky) < sc.k_star)
                fail("hyp:K", "lower bound k >= k_star violated" + at);
            if (std::max(reg.kx, reg.ky) > 1.0 / sc.k_star)
                fail("hyp:K", "upper bound k <= 1/k_star violated" + at);
        }
        if (!(reg.x1 > reg.x0) || !(reg.y1 > reg.y0))
            fail("rock.regions", "degenerate rectangle" + at);
    }
    if (sc.k_star >= 0.0 && !(sc.k_star > 0.0 && sc.k_star <= 1.0))
        fail("hyp:K", "declared k_star must lie in (0, 1]");

    // Region rectangles must tile the domain without overlap.
    if (sc.regions.empty()) {
        fail("rock.regions", "at least one region is required");
    } else {
        double area = 0.0;
        for (const RockRegion& reg : sc.regions)
            area += std::max(0.0, reg.x1 - reg.x0) * std::max(0.0, reg.y1 - reg.y0);
        const double domain_area = sc.Lx * sc.Ly;
        if (std::abs(area - domain_area) > 1e-9 * domain_area)
            fail("rock.regions", "regions do not tile the domain (area mismatch)");
        for (size_t i = 0; i < sc.regions.size(); ++i)
            for (size_t j = i + 1; j < sc.regions.size(); ++j) {
                const RockRegion &a = sc.regions[i], &b = sc.regions[j];
                const double ox = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
                const double oy = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
                if (ox > 1e-12 * sc.Lx && oy > 1e-12 * sc.Ly)
                    fail("rock.regions",
                         "regions " + std::to_string(i) + " and " +
                             std::to_string(j) + " overlap");
            }
    }

    if (!(sc.fluid.mu0 > 0.0)) fail("hyp:viscosity", "mu0 must be > 0");
    if (!(sc.fluid.M >= 1.0)) fail("hyp:viscosity", "mobility ratio M must be >= 1");
    if (sc.fluid.mu0 > 0.0 && sc.fluid.M >= 1.0) {
        const auto visc = check_viscosity_hypotheses(sc.fluid, 1001);
        if (!visc.pass) {
            fail("hyp:viscosity",
                 visc.degenerate
                     ? "degenerate viscosity: second differences vanish (M = 1)"
                     : "convexity of mu and 1/mu violated");
        }
    }
    if (!(sc.fluid.d_l > 0.0) || !(sc.fluid.d_t > 0.0))
        fail("hyp:mdt", "dispersion lengths dl, dt_disp must be > 0");
    if (sc.fluid.eps < 0.0) fail("fluid.eps", "eps must be >= 0");
    if (sc.fluid.chat < 0.0 || sc.fluid.chat > 1.0)
        fail("hyp:injectedconc", "0 <= chat <= 1 violated");
    for (const Well& w : sc.wells)
        if (w.chat >= 0.0 && w.chat > 1.0)
            fail("hyp:injectedconc", "0 <= chat <= 1 violated (per-well)");

    WellSet ws;
    ws.wells = sc.wells;
    ws.chat_default = sc.fluid.chat;
    for (const auto& v : validate_wells(ws, sc.Lx, sc.Ly))
        fail(v.label, v.message);

    if (sc.c0.empty()) {
        fail("hyp:initialconc", "initial concentration c0 is required");
    } else {
        if (sc.c0.size() != 1 && sc.c0.size() != sc.regions.size())
            fail("init.c0", "c0 expects one value or one per region");
        for (double v : sc.c0)
            if (v < 0.0 || v > 1.0)
                fail("hyp:initialconc", "0 <= c_0 <= 1 violated");
    }

    if (!sc.point_source) {
        if (!(sc.mollify_radius > 0.0)) {
            fail("wells.mollify_radius",
                 "mollify_radius > 0 required unless point_source = true");
        } else {
            for (const Well& w : sc.wells)
                if (w.pos.x - sc.mollify_radius < 0.0 ||
                    w.pos.x + sc.mollify_radius > sc.Lx ||
                    w.pos.y - sc.mollify_radius < 0.0 ||
                    w.pos.y + sc.mollify_radius > sc.Ly)
                    fail("wells.mollify_radius",
                         "mollification ball exits the domain");
        }
    } else if (sc.mollify_radius > 0.0) {
        fail("wells.mollify_radius",
             "choose either point_source or mollify_radius, not both");
    }

    if (!(sc.pressure_tol > 0.0)) fail("numerics.pressure_tol", "must be > 0");
    if (!(sc.transport_tol > 0.0)) fail("numerics.transport_tol", "must be > 0");
    if (!(sc.cfl_safety > 0.0 && sc.cfl_safety <= 1.0))
        fail("numerics.cfl_safety", "must lie in (0, 1]");
    if (!(sc.truncation_k > 0.0)) fail("numerics.truncation_k", "must be > 0");
    if (sc.snapshot_every < 0) fail("output.snapshot_every", "must be >= 0");

    auto check_axis = [&fail](const std::vector<double>& list, bool ascending,
                              const std::string& name) {
        for (size_t i = 0; i + 1 < list.size(); ++i) {
            const bool ok = ascending ? list[i] < list[i + 1] : list[i] > list[i + 1];
            if (!ok) fail("ladder." + name, "list must be strictly monotone");
        }
        for (double v : list)
            if (!(v > 0.0)) fail("ladder." + name, "entries must be > 0");
    };
    check_axis(sc.k_list, true, "k_list");
    check_axis(sc.r_list, false, "r_list");
    check_axis(sc.eps_list, false, "eps_list");
    for (double q : sc.q_list)
        if (!(q >= 1.0)) fail("ladder.q_list", "exponents must be >= 1");

    return errors;
}

/// Canonical serialization: parse(serialize(sc)) reproduces sc bit-exactly.
inline std::string serialize_scenario(const Scenario& sc)
{
    std::ostringstream os;
    char buf[64];
    auto num = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };

    os << "domain {\n";
    os << "  Lx = " << num(sc.Lx) << "\n  Ly = " << num(sc.Ly) << "\n";
    os << "  nx = " << sc.nx << "\n  ny = " << sc.ny << "\n";
    os << "  T = " << num(sc.T) << "\n  nt = " << sc.nt << "\n";
    os << "}\n";

    os << "rock {\n  phi_star = " << num(sc.phi_star) << "\n";
    if (sc.k_star >= 0.0) os << "  k_star = " << num(sc.k_star) << "\n";
    for (const RockRegion& reg : sc.regions) {
        os << "  region {\n";
        os << "    rect = " << num(reg.x0) << " " << num(reg.y0) << " "
           << num(reg.x1) << " " << num(reg.y1) << "\n";
        os << "    phi = " << num(reg.phi) << "\n";
        os << "    kx = " << num(reg.kx) << "\n";
        os << "    ky = " << num(reg.ky) << "\n";
        os << "  }\n";
    }
    os << "}\n";

    os << "fluid {\n";
    os << "  mu0 = " << num(sc.fluid.mu0) << "\n  M = " << num(sc.fluid.M) << "\n";
    os << "  dl = " << num(sc.fluid.d_l) << "\n  dt_disp = " << num(sc.fluid.d_t)
       << "\n";
    os << "  eps = " << num(sc.fluid.eps) << "\n  chat = " << num(sc.fluid.chat)
       << "\n";
    os << "}\n";

    os << "wells {\n";
    if (sc.point_source)
        os << "  point_source = true\n";
    else
        os << "  mollify_radius = " << num(sc.mollify_radius) << "\n";
    for (const Well& w : sc.wells) {
        os << "  well {\n";
        os << "    x = " << num(w.pos.x) << "\n    y = " << num(w.pos.y) << "\n";
        os << "    kind = "
           << (w.kind == WellKind::injector ? "injector" : "producer") << "\n";
        os << "    rate = " << num(w.rate) << "\n";
        if (w.chat >= 0.0) os << "    chat = " << num(w.chat) << "\n";
        os << "  }\n";
    }
    os << "}\n";

    os << "init {\n  c0 =";
    for (double v : sc.c0) os << " " << num(v);
    os << "\n}\n";

    os << "numerics {\n";
    os << "  pressure_tol = " << num(sc.pressure_tol) << "\n";
    os << "  transport_tol = " << num(sc.transport_tol) << "\n";
    os << "  cfl_safety = " << num(sc.cfl_safety) << "\n";
    os << "  jacobi = " << (sc.jacobi ? "true" : "false") << "\n";
    if (std::isfinite(sc.truncation_k))
        os << "  truncation_k = " << num(sc.truncation_k) << "\n";
    os << "}\n";

    os << "output {\n";
    os << "  directory = " << sc.out_dir << "\n";
    os << "  snapshot_every = " << sc.snapshot_every << "\n";
    os << "  pgm = " << (sc.pgm ? "true" : "false") << "\n";
    os << "}\n";

    if (sc.has_ladder()) {
        os << "ladder {\n";
        auto list = [&os, &num](const std::string& name,
                                const std::vector<double>& v) {
            if (v.empty()) return;
            os << "  " << name << " =";
            for (double x : v) os << " " << num(x);
            os << "\n";
        };
        list("k_list", sc.k_list);
        list("r_list", sc.r_list);
        list("eps_list", sc.eps_list);
        list("q_list", sc.q_list);
        os << "}\n";
    }
    return os.str();
}

inline std::string scenario_config_hash(const Scenario& sc)
{
    // FNV-1a over the canonical serialization.
    const std::string text = serialize_scenario(sc);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return std::string(buf);
}

inline Grid scenario_grid(const Scenario& sc)
{
    return build_grid(sc.nx, sc.ny, sc.Lx, sc.Ly);
}

inline RockModel scenario_rock(const Scenario& sc, const Grid& g)
{
    return build_rock(g, sc.phi_star, sc.regions);
}

inline WellSet scenario_wells(const Scenario& sc)
{
    WellSet ws;
    ws.wells = sc.wells;
    ws.chat_default = sc.fluid.chat;
    return ws;
}

inline MollifiedSources scenario_sources(const Scenario& sc, const Grid& g)
{
    const WellSet ws = scenario_wells(sc);
    if (sc.point_source) return point_source_mode(ws, g);
    return mollify(ws, g, sc.mollify_radius);
}

inline ScalarField scenario_c0(const Scenario& sc, const Grid& g)
{
    ScalarField c = make_cell_field(g);
    if (sc.c0.size() == 1) {
        for (int i = 0; i < g.num_cells(); ++i) c[i] = sc.c0[0];
        return c;
    }
    for (int i = 0; i < g.num_cells(); ++i) {
        const Vec2 x = g.cell_center(i);
        int hit = -1;
        for (int r = 0; r < static_cast<int>(sc.regions.size()); ++r)
            if (sc.regions[static_cast<size_t>(r)].contains(x)) hit = r;
        c[i] = hit >= 0 ? sc.c0[static_cast<size_t>(hit)] : 0.0;
    }
    return c;
}

}  // namespace mdisp
