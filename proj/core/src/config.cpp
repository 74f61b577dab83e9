#include "okflow/config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

namespace okflow {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& section,
                const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.count(key))
            throw ConfigError("unknown key '" + key + "' in section '" + section + "'");
    }
}

double get_number(const json& obj, const std::string& section, const std::string& key,
                  double fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number())
        throw ConfigError("key '" + section + "." + key + "' must be a number");
    return v.get<double>();
}

int get_int(const json& obj, const std::string& section, const std::string& key,
            int fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer())
        throw ConfigError("key '" + section + "." + key + "' must be an integer");
    return v.get<int>();
}

std::string get_string(const json& obj, const std::string& section, const std::string& key,
                       const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_string())
        throw ConfigError("key '" + section + "." + key + "' must be a string");
    return v.get<std::string>();
}

RunConfig parse_document(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config root must be an object");
    check_keys(doc, "<root>", {"grid", "physics", "solver", "adaptivity", "run"});

    RunConfig cfg;

    // --- grid ---
    if (!doc.contains("grid") || !doc.at("grid").is_object())
        throw ConfigError("missing required section 'grid'");
    {
        const json& g = doc.at("grid");
        check_keys(g, "grid", {"nodes", "lengths", "bc"});
        if (!g.contains("nodes") || !g.at("nodes").is_array())
            throw ConfigError("key 'grid.nodes' (array of node counts) is required");
        cfg.grid.nodes.clear();
        for (const auto& v : g.at("nodes")) {
            if (!v.is_number_integer())
                throw ConfigError("key 'grid.nodes' entries must be integers");
            cfg.grid.nodes.push_back(v.get<int>());
        }
        cfg.grid.lengths.assign(cfg.grid.nodes.size(), 1.0);
        if (g.contains("lengths")) {
            if (!g.at("lengths").is_array() ||
                g.at("lengths").size() != cfg.grid.nodes.size())
                throw ConfigError("key 'grid.lengths' must be an array matching 'grid.nodes'");
            for (std::size_t i = 0; i < cfg.grid.lengths.size(); ++i)
                cfg.grid.lengths[i] = g.at("lengths")[i].get<double>();
        }
        try {
            cfg.grid.bc = boundary_kind_from_string(get_string(g, "grid", "bc", "periodic"));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("key 'grid.bc': ") + e.what());
        }
    }

    // --- physics ---
    {
        const json g = doc.contains("physics") ? doc.at("physics") : json::object();
        check_keys(g, "physics", {"epsilon", "sigma", "mobility"});
        cfg.params.epsilon = get_number(g, "physics", "epsilon", 0.1);
        cfg.params.sigma = get_number(g, "physics", "sigma", 0.0);
        cfg.params.mobility = get_number(g, "physics", "mobility", 1.0);
    }

    // --- solver ---
    {
        const json g = doc.contains("solver") ? doc.at("solver") : json::object();
        check_keys(g, "solver",
                   {"newton_rtol", "lin_rtol", "lin_atol", "max_newton", "max_lin",
                    "preconditioner", "gmres_restart"});
        cfg.solver.newton_rtol = get_number(g, "solver", "newton_rtol", 1e-5);
        cfg.solver.lin_rtol = get_number(g, "solver", "lin_rtol", 1e-5);
        cfg.solver.lin_atol = get_number(g, "solver", "lin_atol", 1e-8);
        cfg.solver.max_newton = get_int(g, "solver", "max_newton", 30);
        cfg.solver.max_lin = get_int(g, "solver", "max_lin", 2000);
        cfg.solver.gmres_restart = get_int(g, "solver", "gmres_restart", 100);
        try {
            cfg.solver.preconditioner = preconditioner_from_string(
                get_string(g, "solver", "preconditioner", "spectral"));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("key 'solver.preconditioner': ") + e.what());
        }
    }

    // --- adaptivity ---
    {
        const json g = doc.contains("adaptivity") ? doc.at("adaptivity") : json::object();
        check_keys(g, "adaptivity",
                   {"controller", "rho", "kp", "ki", "kd", "kt", "tau_abs", "tau_rel",
                    "dt_min", "dt_max", "dt0", "growth_cap", "fixed_dt"});
        const std::string controller = get_string(g, "adaptivity", "controller", "pc11");
        if (controller == "fixed") {
            cfg.mode = SteppingMode::Fixed;
            cfg.gains = ControllerGains::pc11();  // unused in fixed mode
        } else {
            cfg.mode = SteppingMode::Adaptive;
            try {
                cfg.gains = ControllerGains::preset(controller);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("key 'adaptivity.controller': ") + e.what());
            }
        }
        cfg.gains.rho = get_number(g, "adaptivity", "rho", 0.9);
        cfg.gains.kP = get_number(g, "adaptivity", "kp", cfg.gains.kP);
        cfg.gains.kI = get_number(g, "adaptivity", "ki", cfg.gains.kI);
        cfg.gains.kD = get_number(g, "adaptivity", "kd", cfg.gains.kD);
        cfg.gains.kT = get_number(g, "adaptivity", "kt", cfg.gains.kT);
        cfg.tol.tau_abs = get_number(g, "adaptivity", "tau_abs", 1e-4);
        cfg.tol.tau_rel = get_number(g, "adaptivity", "tau_rel", 1e-4);
        cfg.tol.dt_min = get_number(g, "adaptivity", "dt_min", 1e-12);
        cfg.tol.dt_max = get_number(g, "adaptivity", "dt_max", 5e-3);
        cfg.tol.dt0 = get_number(g, "adaptivity", "dt0", 1e-9);
        cfg.tol.growth_cap = get_number(g, "adaptivity", "growth_cap", 5.0);
        cfg.fixed_dt = get_number(g, "adaptivity", "fixed_dt", 0.0);
        if (cfg.tol.dt_min > cfg.tol.dt_max)
            throw ConfigError("'adaptivity.dt_min' exceeds 'adaptivity.dt_max'");
        if (cfg.mode == SteppingMode::Fixed && !(cfg.fixed_dt > 0.0))
            throw ConfigError("controller 'fixed' requires a positive 'adaptivity.fixed_dt'");
    }

    // --- run ---
    if (!doc.contains("run") || !doc.at("run").is_object())
        throw ConfigError("missing required section 'run'");
    {
        const json& g = doc.at("run");
        check_keys(g, "run",
                   {"t_end", "ic_mean", "ic_amplitude", "seed", "snapshot_times",
                    "steady_state_eps", "max_rejects_per_step"});
        if (!g.contains("t_end"))
            throw ConfigError("key 'run.t_end' is required");
        cfg.t_end = get_number(g, "run", "t_end", 0.0);
        cfg.ic.mean = get_number(g, "run", "ic_mean", 0.3);
        cfg.ic.amplitude = get_number(g, "run", "ic_amplitude", 0.05);
        if (g.contains("seed")) {
            const json& v = g.at("seed");
            if (!v.is_number_unsigned() && !v.is_number_integer())
                throw ConfigError("key 'run.seed' must be an unsigned integer");
            cfg.ic.seed = v.get<std::uint64_t>();
        }
        if (g.contains("snapshot_times")) {
            if (!g.at("snapshot_times").is_array())
                throw ConfigError("key 'run.snapshot_times' must be an array");
            for (const auto& v : g.at("snapshot_times"))
                cfg.snapshot_times.push_back(v.get<double>());
        }
        cfg.steady_state_eps = get_number(g, "run", "steady_state_eps", 0.0);
        cfg.max_rejects_per_step = get_int(g, "run", "max_rejects_per_step", 20);
    }

    cfg.params.phi_bar = cfg.ic.mean;  // re-frozen from the realized field at run start

    try {
        GridSpec probe = cfg.grid.make();  // surfaces grid constraint violations
        (void)probe;
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

}  // namespace

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config file '" + path + "' does not exist or is unreadable");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_document(doc);
}

RunConfig parse_config_text(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config text is not valid JSON: ") + e.what());
    }
    return parse_document(doc);
}

}  // namespace okflow
