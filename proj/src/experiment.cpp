#include "dreach/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "dreach/errors.hpp"
#include "json.hpp"

namespace dreach {

namespace {

using Json = nlohmann::ordered_json;

std::string at(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void expect_object(const Json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
}

void check_keys(const Json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    for (const auto& [key, _] : j.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            throw ConfigError(at(path, key) + ": unknown key");
        }
    }
}

double as_number(const Json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path + ": expected a number");
    return j.get<double>();
}

std::size_t as_index(const Json& j, const std::string& path) {
    if (!j.is_number_unsigned()) throw ConfigError(path + ": expected a nonnegative integer");
    return j.get<std::size_t>();
}

std::string as_string(const Json& j, const std::string& path) {
    if (!j.is_string()) throw ConfigError(path + ": expected a string");
    return j.get<std::string>();
}

bool as_bool(const Json& j, const std::string& path) {
    if (!j.is_boolean()) throw ConfigError(path + ": expected true or false");
    return j.get<bool>();
}

template <typename F>
auto as_list(const Json& j, const std::string& path, F item) {
    if (!j.is_array()) throw ConfigError(path + ": expected a list");
    std::vector<decltype(item(j, path))> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(item(j[i], at(path, i)));
    return out;
}

std::vector<double> as_numbers(const Json& j, const std::string& path) { return as_list(j, path, as_number); }
std::vector<std::size_t> as_indices(const Json& j, const std::string& path) { return as_list(j, path, as_index); }

const Json& need(const Json& j, const std::string& path, const char* key) {
    const auto it = j.find(key);
    if (it == j.end()) throw ConfigError(at(path, key) + ": missing");
    return *it;
}

template <typename T, typename F>
void optional_field(const Json& j, const std::string& path, const char* key, T& out, F read) {
    const auto it = j.find(key);
    if (it != j.end()) out = read(*it, at(path, key));
}

template <typename E>
E as_enum(const Json& j, const std::string& path, std::initializer_list<std::pair<const char*, E>> names) {
    const std::string s = as_string(j, path);
    for (const auto& [n, v] : names) {
        if (s == n) return v;
    }
    std::string allowed;
    for (const auto& [n, _] : names) allowed += std::string(allowed.empty() ? "" : ", ") + n;
    throw ConfigError(path + ": '" + s + "' is not one of " + allowed);
}

const std::initializer_list<std::pair<const char*, DerivativeOrder>> kOrders = {
    {"first", DerivativeOrder::first}, {"weno5", DerivativeOrder::weno5}};
const std::initializer_list<std::pair<const char*, NumericalHamiltonian>> kSchemes = {
    {"lax_friedrichs", NumericalHamiltonian::lax_friedrichs}, {"godunov", NumericalHamiltonian::godunov}};
const std::initializer_list<std::pair<const char*, RolloutMode>> kModes = {{"ra", RolloutMode::ra},
                                                                            {"sa", RolloutMode::sa}};
const std::initializer_list<std::pair<const char*, DisturbanceKind>> kPolicies = {
    {"worst_case", DisturbanceKind::worst_case},
    {"zero", DisturbanceKind::zero},
    {"seeded_random", DisturbanceKind::seeded_random}};

// --- reading ---------------------------------------------------------------

SurfaceExpr read_surface(const Json& j, const std::string& path) {
    expect_object(j, path);
    check_keys(j, path, {"kind", "center", "half_widths", "normal", "dims", "radius", "value", "args"});
    SurfaceExpr e;
    e.kind = as_string(need(j, path, "kind"), at(path, "kind"));
    optional_field(j, path, "center", e.center, as_numbers);
    optional_field(j, path, "half_widths", e.half_widths, as_numbers);
    optional_field(j, path, "normal", e.normal, as_numbers);
    optional_field(j, path, "dims", e.dims, as_indices);
    optional_field(j, path, "radius", e.radius, as_number);
    optional_field(j, path, "value", e.value, as_number);
    optional_field(j, path, "args", e.args, [](const Json& a, const std::string& p) { return as_list(a, p, read_surface); });
    return e;
}

InputBox read_box(const Json& j, const std::string& path, const char* lo, const char* hi) {
    return {as_numbers(need(j, path, lo), at(path, lo)), as_numbers(need(j, path, hi), at(path, hi))};
}

SystemConfig read_system(const Json& j, const std::string& path) {
    expect_object(j, path);
    check_keys(j, path, {"name", "params", "affine"});
    SystemConfig s;
    s.name = as_string(need(j, path, "name"), at(path, "name"));
    if (const auto it = j.find("params"); it != j.end()) {
        const std::string p = at(path, "params");
        expect_object(*it, p);
        for (const auto& [key, value] : it->items()) s.params[key] = as_number(value, at(p, key));
    }
    if (const auto it = j.find("affine"); it != j.end()) {
        const std::string p = at(path, "affine");
        const Json& t = *it;
        expect_object(t, p);
        check_keys(t, p, {"n_dims", "a", "b", "control_matrix", "control_lower", "control_upper",
                          "disturbance_matrix", "disturbance_lower", "disturbance_upper"});
        AffineTables a;
        a.n_dims = as_index(need(t, p, "n_dims"), at(p, "n_dims"));
        a.a = as_numbers(need(t, p, "a"), at(p, "a"));
        a.b = as_numbers(need(t, p, "b"), at(p, "b"));
        a.control_matrix = as_numbers(need(t, p, "control_matrix"), at(p, "control_matrix"));
        a.control_bounds = read_box(t, p, "control_lower", "control_upper");
        a.disturbance_matrix = as_numbers(need(t, p, "disturbance_matrix"), at(p, "disturbance_matrix"));
        a.disturbance_bounds = read_box(t, p, "disturbance_lower", "disturbance_upper");
        s.affine = std::move(a);
    }
    return s;
}

GridConfig read_grid(const Json& j, const std::string& path) {
    expect_object(j, path);
    check_keys(j, path, {"lower", "upper", "counts", "periodic"});
    GridConfig g;
    g.lower = as_numbers(need(j, path, "lower"), at(path, "lower"));
    g.upper = as_numbers(need(j, path, "upper"), at(path, "upper"));
    g.counts = as_indices(need(j, path, "counts"), at(path, "counts"));
    g.periodic.assign(g.counts.size(), false);
    if (const auto it = j.find("periodic"); it != j.end()) {
        const auto flags = as_list(*it, at(path, "periodic"), as_bool);
        g.periodic.assign(flags.begin(), flags.end());
    }
    return g;
}

SolverConfig read_solver(const Json& j, const std::string& path, SolverConfig s) {
    expect_object(j, path);
    check_keys(j, path, {"cfl_factor", "convergence_tol", "max_horizon", "derivative_order", "scheme",
                         "snapshot_interval", "convergence_window"});
    optional_field(j, path, "cfl_factor", s.cfl_factor, as_number);
    optional_field(j, path, "convergence_tol", s.convergence_tol, as_number);
    optional_field(j, path, "max_horizon", s.max_horizon, as_number);
    optional_field(j, path, "derivative_order", s.derivative_order,
                   [](const Json& v, const std::string& p) { return as_enum(v, p, kOrders); });
    optional_field(j, path, "scheme", s.scheme,
                   [](const Json& v, const std::string& p) { return as_enum(v, p, kSchemes); });
    optional_field(j, path, "snapshot_interval", s.snapshot_interval, as_number);
    optional_field(j, path, "convergence_window", s.convergence_window, as_index);
    return s;
}

StabilizeSpec read_stabilize(const Json& j, const std::string& path) {
    expect_object(j, path);
    check_keys(j, path, {"point", "dims", "gamma_clvf", "level_tol", "srcis_tol"});
    StabilizeSpec s;
    s.point = as_numbers(need(j, path, "point"), at(path, "point"));
    optional_field(j, path, "dims", s.dims, as_indices);
    optional_field(j, path, "gamma_clvf", s.gamma_clvf, as_number);
    optional_field(j, path, "level_tol", s.level_tol, as_number);
    optional_field(j, path, "srcis_tol", s.srcis_tol, as_number);
    return s;
}

RolloutConfig read_rollout(const Json& j, const std::string& path) {
    expect_object(j, path);
    check_keys(j, path, {"x0", "dt", "t_end", "mode", "disturbance"});
    RolloutConfig r;
    optional_field(j, path, "x0", r.x0, [](const Json& v, const std::string& p) { return as_list(v, p, as_numbers); });
    optional_field(j, path, "dt", r.dt, as_number);
    optional_field(j, path, "t_end", r.t_end, as_number);
    optional_field(j, path, "mode", r.mode, [](const Json& v, const std::string& p) { return as_enum(v, p, kModes); });
    if (const auto it = j.find("disturbance"); it != j.end()) {
        const std::string p = at(path, "disturbance");
        expect_object(*it, p);
        check_keys(*it, p, {"policy", "seed"});
        optional_field(*it, p, "policy", r.disturbance.kind,
                       [](const Json& v, const std::string& q) { return as_enum(v, q, kPolicies); });
        optional_field(*it, p, "seed", r.disturbance.seed, [](const Json& v, const std::string& q) {
            if (!v.is_number_unsigned()) throw ConfigError(q + ": expected a nonnegative integer");
            return v.get<std::uint64_t>();
        });
    }
    return r;
}

// --- writing ---------------------------------------------------------------

Json write_surface(const SurfaceExpr& e) {
    Json j;
    j["kind"] = e.kind;
    if (!e.center.empty()) j["center"] = e.center;
    if (!e.half_widths.empty()) j["half_widths"] = e.half_widths;
    if (!e.normal.empty()) j["normal"] = e.normal;
    if (!e.dims.empty()) j["dims"] = e.dims;
    if (e.radius != 0.0) j["radius"] = e.radius;
    if (e.value != 0.0) j["value"] = e.value;
    if (!e.args.empty()) {
        j["args"] = Json::array();
        for (const auto& a : e.args) j["args"].push_back(write_surface(a));
    }
    return j;
}

template <typename E>
const char* enum_name(E v, std::initializer_list<std::pair<const char*, E>> names) {
    for (const auto& [n, x] : names) {
        if (x == v) return n;
    }
    return "?";
}

// Largest state index a surface reads, +1; 0 when it reads none.
std::size_t dims_needed(const SurfaceExpr& e) {
    std::size_t n = 0;
    if (!e.dims.empty()) {
        n = *std::max_element(e.dims.begin(), e.dims.end()) + 1;
    } else if (e.kind == "circle") {
        n = 2;
    } else if (e.kind == "halfspace") {
        n = e.normal.size();
    } else {
        n = e.center.size();
    }
    for (const auto& a : e.args) n = std::max(n, dims_needed(a));
    return n;
}

double param(const SystemConfig& s, const char* key, double fallback) {
    const auto it = s.params.find(key);
    return it == s.params.end() ? fallback : it->second;
}

}  // namespace

const char* to_string(DerivativeOrder order) { return enum_name(order, kOrders); }
const char* to_string(NumericalHamiltonian scheme) { return enum_name(scheme, kSchemes); }
const char* to_string(RolloutMode mode) { return enum_name(mode, kModes); }
const char* to_string(DisturbanceKind kind) { return enum_name(kind, kPolicies); }

ExperimentConfig parse_config(std::string_view text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    expect_object(j, "config");
    check_keys(j, "", {"name", "system", "grid", "gamma", "target", "constraint", "solver", "stabilize", "rollout",
                       "output_dir"});
    ExperimentConfig c;
    optional_field(j, "", "name", c.name, as_string);
    c.system = read_system(need(j, "", "system"), "system");
    c.grid = read_grid(need(j, "", "grid"), "grid");
    c.target = read_surface(need(j, "", "target"), "target");
    c.constraint = read_surface(need(j, "", "constraint"), "constraint");
    optional_field(j, "", "gamma", c.solver.gamma, as_number);
    if (const auto it = j.find("solver"); it != j.end()) c.solver = read_solver(*it, "solver", c.solver);
    if (const auto it = j.find("stabilize"); it != j.end()) c.stabilize = read_stabilize(*it, "stabilize");
    if (const auto it = j.find("rollout"); it != j.end()) c.rollout = read_rollout(*it, "rollout");
    optional_field(j, "", "output_dir", c.output_dir, as_string);
    validate(c);
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
    Json j;
    j["name"] = c.name;
    Json sys;
    sys["name"] = c.system.name;
    if (!c.system.params.empty()) {
        sys["params"] = Json::object();
        for (const auto& [k, v] : c.system.params) sys["params"][k] = v;
    }
    if (c.system.affine) {
        const auto& a = *c.system.affine;
        sys["affine"] = {{"n_dims", a.n_dims},
                         {"a", a.a},
                         {"b", a.b},
                         {"control_matrix", a.control_matrix},
                         {"control_lower", a.control_bounds.lower},
                         {"control_upper", a.control_bounds.upper},
                         {"disturbance_matrix", a.disturbance_matrix},
                         {"disturbance_lower", a.disturbance_bounds.lower},
                         {"disturbance_upper", a.disturbance_bounds.upper}};
    }
    j["system"] = sys;
    j["grid"] = {{"lower", c.grid.lower},
                 {"upper", c.grid.upper},
                 {"counts", c.grid.counts},
                 {"periodic", c.grid.periodic}};
    j["gamma"] = c.solver.gamma;
    j["target"] = write_surface(c.target);
    j["constraint"] = write_surface(c.constraint);
    j["solver"] = {{"cfl_factor", c.solver.cfl_factor},
                   {"convergence_tol", c.solver.convergence_tol},
                   {"max_horizon", c.solver.max_horizon},
                   {"derivative_order", to_string(c.solver.derivative_order)},
                   {"scheme", to_string(c.solver.scheme)},
                   {"snapshot_interval", c.solver.snapshot_interval},
                   {"convergence_window", c.solver.convergence_window}};
    if (c.stabilize) {
        const auto& s = *c.stabilize;
        j["stabilize"] = {{"point", s.point},
                          {"dims", s.dims},
                          {"gamma_clvf", s.gamma_clvf},
                          {"level_tol", s.level_tol},
                          {"srcis_tol", s.srcis_tol}};
    }
    j["rollout"] = {{"x0", c.rollout.x0},
                    {"dt", c.rollout.dt},
                    {"t_end", c.rollout.t_end},
                    {"mode", to_string(c.rollout.mode)},
                    {"disturbance", {{"policy", to_string(c.rollout.disturbance.kind)},
                                     {"seed", c.rollout.disturbance.seed}}}};
    j["output_dir"] = c.output_dir;
    return j.dump(2) + "\n";
}

DynamicsSpec make_dynamics(const SystemConfig& s) {
    const auto only = [&](std::initializer_list<const char*> keys) {
        for (const auto& [k, _] : s.params) {
            if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; })) {
                throw ConfigError("system.params." + k + ": not a parameter of " + s.name);
            }
        }
        if (s.affine) throw ConfigError("system.affine: only allowed for linear_affine");
    };
    if (s.name == "dubins3d") {
        only({"speed", "turn_rate", "disturbance"});
        return dubins3d(param(s, "speed", 1.0), param(s, "turn_rate", 3.141592653589793),
                        param(s, "disturbance", 0.2));
    }
    if (s.name == "integrator1d") {
        only({"control", "disturbance"});
        return integrator1d(param(s, "control", 1.0), param(s, "disturbance", 0.2));
    }
    if (s.name == "double_integrator2d") {
        only({"control", "disturbance"});
        return double_integrator2d(param(s, "control", 1.0), param(s, "disturbance", 0.2));
    }
    if (s.name == "linear_affine") {
        if (!s.affine) throw ConfigError("system.affine: missing coefficient tables");
        if (!s.params.empty()) throw ConfigError("system.params: not used by linear_affine");
        const auto& a = *s.affine;
        try {
            return linear_affine(a.n_dims, a.a, a.b, a.control_matrix, a.control_bounds, a.disturbance_matrix,
                                 a.disturbance_bounds);
        } catch (const DomainError& e) {
            throw ConfigError(std::string("system.affine: ") + e.what());
        }
    }
    throw ConfigError("system.name: unknown system '" + s.name + "'");
}

Grid make_grid(const GridConfig& g) {
    const std::size_t n = g.counts.size();
    if (n == 0) throw ConfigError("grid.counts: empty");
    if (g.lower.size() != n) throw ConfigError("grid.lower: expected " + std::to_string(n) + " entries");
    if (g.upper.size() != n) throw ConfigError("grid.upper: expected " + std::to_string(n) + " entries");
    if (g.periodic.size() != n) throw ConfigError("grid.periodic: expected " + std::to_string(n) + " entries");
    std::vector<std::pair<double, double>> bounds(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(g.lower[i] < g.upper[i])) {
            throw ConfigError(at("grid.lower", i) + " must be below " + at("grid.upper", i));
        }
        if (g.counts[i] < 3) throw ConfigError(at("grid.counts", i) + " must be at least 3");
        bounds[i] = {g.lower[i], g.upper[i]};
    }
    try {
        return build_grid(bounds, g.counts, g.periodic);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("grid: ") + e.what());
    }
}

void validate(const ExperimentConfig& c) {
    const Grid grid = make_grid(c.grid);
    const DynamicsSpec dyn = make_dynamics(c.system);
    if (dyn.n_dims != grid.dims()) {
        throw ConfigError("grid: " + std::to_string(grid.dims()) + " dimensions but system '" + c.system.name +
                          "' has " + std::to_string(dyn.n_dims));
    }
    for (const auto& [name, expr] : {std::pair{"target", &c.target}, std::pair{"constraint", &c.constraint}}) {
        try {
            build_surface(*expr);
        } catch (const DomainError& e) {
            throw ConfigError(std::string(name) + ": " + e.what());
        }
        if (dims_needed(*expr) > grid.dims()) {
            throw ConfigError(std::string(name) + ": refers to a state dimension beyond the grid");
        }
    }
    try {
        validate(c.solver);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("solver: ") + e.what());
    }
    if (c.stabilize) {
        try {
            validate(*c.stabilize, grid);
        } catch (const DomainError& e) {
            throw ConfigError(std::string("stabilize: ") + e.what());
        }
    }
    if (!(c.rollout.dt > 0.0)) throw ConfigError("rollout.dt: must be positive");
    if (!(c.rollout.t_end >= 0.0)) throw ConfigError("rollout.t_end: must be nonnegative");
    for (std::size_t i = 0; i < c.rollout.x0.size(); ++i) {
        if (c.rollout.x0[i].size() != dyn.n_dims) {
            throw ConfigError(at("rollout.x0", i) + ": expected " + std::to_string(dyn.n_dims) + " coordinates");
        }
    }
    if (c.rollout.mode == RolloutMode::sa && !c.stabilize) {
        throw ConfigError("rollout.mode: sa rollouts need a stabilize section");
    }
    if (c.output_dir.empty()) throw ConfigError("output_dir: empty");
}

}  // namespace dreach
