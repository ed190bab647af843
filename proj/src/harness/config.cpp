#include "oldroyd/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "oldroyd/errors.hpp"
#include "oldroyd/presets.hpp"

namespace oldroyd {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double to_double(const std::string& key, const std::string& v) {
    errno = 0;
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (v.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(d)) {
        throw ConfigError("key '" + key + "': '" + v + "' is not a finite number");
    }
    return d;
}

int to_int(const std::string& key, const std::string& v) {
    errno = 0;
    char* end = nullptr;
    const long i = std::strtol(v.c_str(), &end, 10);
    if (v.empty() || *end != '\0' || errno == ERANGE || i < -1000000000L || i > 1000000000L) {
        throw ConfigError("key '" + key + "': '" + v + "' is not an integer");
    }
    return static_cast<int>(i);
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("key '" + key + "': '" + v + "' is not a boolean");
}

template <class T, class Conv>
std::vector<T> to_list(const std::string& key, const std::string& v, Conv conv) {
    std::vector<T> out;
    std::istringstream is(v);
    std::string tok;
    while (is >> tok) out.push_back(conv(key, tok));
    return out;
}

struct Entry {
    const char* key;
    std::function<void(RunConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

#define CFG_DOUBLE(name, member)                                                                   \
    Entry {                                                                                        \
        name, [](RunConfig& c, const std::string& k, const std::string& v) { c.member = to_double(k, v); }, \
            [](const RunConfig& c) { return fmt_double(c.member); }                               \
    }
#define CFG_INT(name, member)                                                                      \
    Entry {                                                                                        \
        name, [](RunConfig& c, const std::string& k, const std::string& v) { c.member = to_int(k, v); }, \
            [](const RunConfig& c) { return std::to_string(c.member); }                           \
    }
#define CFG_STRING(name, member)                                                                   \
    Entry {                                                                                        \
        name, [](RunConfig& c, const std::string&, const std::string& v) { c.member = v; },       \
            [](const RunConfig& c) { return c.member; }                                           \
    }

std::string join_doubles(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt_double(v[i]);
    return s;
}

std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
    return s;
}

const std::vector<Entry>& entries() {
    static const std::vector<Entry> table{
        CFG_INT("grid.dim", dim),
        CFG_INT("grid.n", n),
        CFG_DOUBLE("grid.extent", extent),
        CFG_DOUBLE("fluid.eps", eps),
        CFG_DOUBLE("fluid.omega", omega),
        CFG_DOUBLE("fluid.We", We),
        CFG_DOUBLE("fluid.alpha", alpha),
        CFG_DOUBLE("fluid.a", a),
        CFG_DOUBLE("fluid.m1", m1),
        CFG_DOUBLE("fluid.M1", M1),
        CFG_STRING("pressure.kind", pressure_kind),
        CFG_DOUBLE("pressure.kappa", kappa),
        CFG_DOUBLE("pressure.cs", cs),
        Entry{"pressure.table_rho",
              [](RunConfig& c, const std::string& k, const std::string& v) {
                  c.table_rho = to_list<double>(k, v, to_double);
              },
              [](const RunConfig& c) { return join_doubles(c.table_rho); }},
        Entry{"pressure.table_dp_drho",
              [](RunConfig& c, const std::string& k, const std::string& v) {
                  c.table_dp_drho = to_list<double>(k, v, to_double);
              },
              [](const RunConfig& c) { return join_doubles(c.table_dp_drho); }},
        CFG_DOUBLE("time.T", T),
        CFG_DOUBLE("time.dt", dt),
        CFG_DOUBLE("time.stress_theta", stress_theta),
        CFG_DOUBLE("solver.tol_lin", tol_lin),
        CFG_INT("solver.max_lin_iter", max_lin_iter),
        CFG_DOUBLE("solver.tol_fp", tol_fp),
        CFG_INT("solver.max_iter", max_iter),
        CFG_DOUBLE("budget.B1", B1),
        CFG_DOUBLE("budget.B2", B2),
        CFG_DOUBLE("budget.C2", C2),
        CFG_DOUBLE("budget.C3", C3),
        CFG_DOUBLE("budget.C5", C5),
        CFG_DOUBLE("budget.C6", C6),
        CFG_DOUBLE("budget.margin", margin),
        CFG_STRING("ic.velocity", ic_velocity),
        CFG_DOUBLE("ic.velocity_amplitude", ic_velocity_amplitude),
        CFG_STRING("ic.density", ic_density),
        CFG_DOUBLE("ic.density_amplitude", ic_density_amplitude),
        CFG_STRING("ic.stress", ic_stress),
        CFG_DOUBLE("ic.stress_amplitude", ic_stress_amplitude),
        CFG_STRING("forcing.preset", forcing),
        CFG_DOUBLE("forcing.amplitude", forcing_amplitude),
        CFG_DOUBLE("forcing.period", forcing_period),
        CFG_DOUBLE("uniqueness.amplitude", uniqueness_amplitude),
        CFG_DOUBLE("uniqueness.delta", uniqueness_delta),
        CFG_DOUBLE("uniqueness.slack", uniqueness_slack),
        Entry{"uniqueness.resolutions",
              [](RunConfig& c, const std::string& k, const std::string& v) {
                  c.uniqueness_resolutions = to_list<int>(k, v, to_int);
              },
              [](const RunConfig& c) { return join_ints(c.uniqueness_resolutions); }},
        CFG_DOUBLE("probe.delta", probe_delta),
        CFG_INT("probe.levels", probe_levels),
        CFG_DOUBLE("probe.band", probe_band),
        CFG_STRING("probe.component", probe_component),
        Entry{"mms.resolutions",
              [](RunConfig& c, const std::string& k, const std::string& v) {
                  c.mms_resolutions = to_list<int>(k, v, to_int);
              },
              [](const RunConfig& c) { return join_ints(c.mms_resolutions); }},
        CFG_DOUBLE("mms.T", mms_T),
        CFG_STRING("output.dir", output_dir),
        Entry{"output.snapshots",
              [](RunConfig& c, const std::string& k, const std::string& v) { c.snapshots = to_bool(k, v); },
              [](const RunConfig& c) { return std::string(c.snapshots ? "true" : "false"); }},
    };
    return table;
}

#undef CFG_DOUBLE
#undef CFG_INT
#undef CFG_STRING

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

bool registered(const std::vector<std::string>& names, const std::string& s) {
    return std::find(names.begin(), names.end(), s) != names.end();
}

}  // namespace

std::size_t RunConfig::steps() const {
    require(dt > 0.0 && T > 0.0, "time.T and time.dt must be positive");
    require(dt <= T, "time.dt must not exceed time.T");
    const double r = T / dt;
    const double N = std::round(r);
    require(std::abs(r - N) <= 1e-9 * r, "time.T must be an integer multiple of time.dt");
    return static_cast<std::size_t>(N);
}

FluidParams RunConfig::fluid() const {
    FluidParams p;
    p.eps = eps;
    p.omega = omega;
    p.We = We;
    p.alpha = alpha;
    p.a = a;
    p.m1 = m1;
    p.M1 = M1;
    switch (PressureLaw::parse_kind(pressure_kind)) {
        case PressureLaw::Kind::linear: p.pressure = PressureLaw::linear(); break;
        case PressureLaw::Kind::isothermal: p.pressure = PressureLaw::isothermal(cs); break;
        case PressureLaw::Kind::quadratic: p.pressure = PressureLaw::quadratic(kappa); break;
        case PressureLaw::Kind::custom_table: p.pressure = PressureLaw::table(table_rho, table_dp_drho); break;
    }
    return p;
}

LinearSolveOptions RunConfig::linear() const { return {tol_lin, max_lin_iter}; }

MapOptions RunConfig::map_options() const { return {linear(), stress_theta}; }

IterateOptions RunConfig::iterate_options() const {
    IterateOptions o;
    o.map = map_options();
    o.tol_fp = tol_fp;
    o.max_iter = max_iter;
    o.B1 = B1;
    o.B2 = B2;
    return o;
}

SizingConstants RunConfig::sizing() const { return {C2, C3, C5, C6, margin}; }

void RunConfig::validate() const {
    require(dim == 2 || dim == 3, "grid.dim must be 2 or 3");
    require(n >= 8, "grid.n must be at least 8");
    require(extent > 0.0, "grid.extent must be positive");
    fluid().validate();
    steps();
    require(stress_theta >= 0.0 && stress_theta <= 1.0, "time.stress_theta must lie in [0, 1]");
    require(tol_lin > 0.0 && tol_lin < 1.0, "solver.tol_lin must lie in (0, 1)");
    require(max_lin_iter > 0, "solver.max_lin_iter must be positive");
    require(tol_fp > 0.0, "solver.tol_fp must be positive");
    require(max_iter > 0, "solver.max_iter must be positive");
    require(C2 > 0.0 && C3 > 0.0 && C5 > 0.0 && C6 > 0.0, "budget constants must be positive");
    require(margin > 1.0, "budget.margin must exceed 1");
    require(registered(velocity_preset_names(), ic_velocity), "ic.velocity: unknown preset '" + ic_velocity + "'");
    require(registered(density_preset_names(), ic_density), "ic.density: unknown preset '" + ic_density + "'");
    require(registered(stress_preset_names(), ic_stress), "ic.stress: unknown preset '" + ic_stress + "'");
    require(registered(forcing_preset_names(), forcing), "forcing.preset: unknown preset '" + forcing + "'");
    require(forcing_period > 0.0, "forcing.period must be positive");
    require(uniqueness_slack >= 1.0, "uniqueness.slack must be at least 1");
    require(!uniqueness_resolutions.empty(), "uniqueness.resolutions must list at least one grid");
    for (int r : uniqueness_resolutions) require(r >= 8, "uniqueness.resolutions entries must be >= 8");
    require(probe_delta >= 0.0, "probe.delta must be nonnegative");
    require(probe_levels >= 2, "probe.levels must be at least 2");
    require(probe_band > 1.0, "probe.band must exceed 1");
    require(probe_component == "all" || probe_component == "w" || probe_component == "pi" ||
                probe_component == "psi",
            "probe.component must be one of all, w, pi, psi");
    require(mms_resolutions.size() >= 3, "mms.resolutions needs at least three grids");
    for (int r : mms_resolutions) require(r >= 8, "mms.resolutions entries must be >= 8");
    require(mms_T > 0.0, "mms.T must be positive");
    require(!output_dir.empty(), "output.dir must not be empty");
}

RunConfig parse_config(std::istream& is, const std::string& source) {
    RunConfig c;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'section.key = value'");
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        const auto& table = entries();
        const auto it = std::find_if(table.begin(), table.end(),
                                     [&key](const Entry& e) { return key == e.key; });
        if (it == table.end()) {
            throw ConfigError(source + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
        try {
            it->set(c, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(source + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    return parse_config(in, path.string());
}

void serialize_config(std::ostream& os, const RunConfig& c) {
    std::string section;
    for (const Entry& e : entries()) {
        const std::string key = e.key;
        const std::string sec = key.substr(0, key.find('.'));
        if (sec != section) {
            if (!section.empty()) os << '\n';
            section = sec;
        }
        os << key << " = " << e.get(c) << '\n';
    }
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream os;
    serialize_config(os, c);
    return os.str();
}

}  // namespace oldroyd
