#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hetcycle/model.hpp"
#include "hetcycle/tower.hpp"

namespace hetcycle {

/// Full run configuration: model geometry, tower tunables, verification and
/// solver grids, output selection, optional sweep grids. Text format is
/// dotted key = value lines; '#' starts a comment; unknown keys are rejected.
struct RunConfig {
    CycleSpec model;
    TowerConfig tower;

    std::vector<double> verify_eps{0.1, 0.05};
    std::string dictionary = "default";
    int support_n_max = 3;
    long subsample_threshold = 100000;

    long solve_l_min = 1, solve_l_max = 10;
    long solve_m_min = 1, solve_m_max = 10;
    std::vector<long> corbd_k{4, 6, 8};
    long corbd_p = 2, corbd_q = 6;

    std::string output_format = "json";  // json | csv
    std::string output_path;             // empty: stdout
    bool emit_timing = true;
    long seed = 0;  // reserved for tie-breaking; the pipeline is deterministic

    std::map<std::string, std::vector<std::string>> sweep;  // dotted key -> values

    bool rho_s_set = false, rho_u_set = false;

    void resolve_defaults() {
        if (!rho_s_set) model.rho_s = 0.5 * model.central.lambda;
        if (!rho_u_set) model.rho_u = 2.0 * model.central.beta;
    }

    void validate() const {
        try {
            model.validate(tower.require_strict_regime);
        } catch (const SpecViolationError& e) {
            throw ConfigValidationError(e.what());
        }
        tower.validate(model.central);
        if (verify_eps.empty()) throw ConfigValidationError("verify.eps: list must be non-empty");
        for (double e : verify_eps)
            if (!(e > 0.0 && e < 1.0))
                throw ConfigValidationError("verify.eps: values must lie in (0,1)");
        if (dictionary != "default")
            throw ConfigValidationError("verify.dictionary: only 'default' is available");
        if (support_n_max < 1) throw ConfigValidationError("verify.support_n_max: must be >= 1");
        if (subsample_threshold < 1)
            throw ConfigValidationError("verify.subsample_threshold: must be >= 1");
        if (solve_l_min < 0 || solve_m_min < 0 || solve_l_max < solve_l_min - 1 ||
            solve_m_max < solve_m_min - 1)
            throw ConfigValidationError("solve: grid bounds are inconsistent");
        for (long k : corbd_k)
            if (k < 4 || k % 2 != 0)
                throw ConfigValidationError("solve.corbd_k: entries must be even and >= 4");
        if (corbd_p < 1 || corbd_q < 1 || corbd_p == corbd_q)
            throw ConfigValidationError("solve.corbd_p/q: need distinct positive integers");
        if (output_format != "json" && output_format != "csv")
            throw ConfigValidationError("output.format: must be json or csv");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (...) {
        throw ConfigParseError("config: key '" + key + "' expects a number, got '" + v + "'");
    }
}

inline long parse_long(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (...) {
        throw ConfigParseError("config: key '" + key + "' expects an integer, got '" + v + "'");
    }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigParseError("config: key '" + key + "' expects true/false, got '" + v + "'");
}

inline std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(v);
    while (std::getline(is, item, ',')) out.push_back(trim(item));
    return out;
}

}  // namespace detail

inline void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
    using detail::parse_bool;
    using detail::parse_double;
    using detail::parse_long;
    auto& m = cfg.model;
    auto& t = cfg.tower;
    if (key == "model.lambda") m.central.lambda = parse_double(key, value);
    else if (key == "model.beta") m.central.beta = parse_double(key, value);
    else if (key == "model.tau") m.central.tau = static_cast<int>(parse_long(key, value));
    else if (key == "model.pi_a") m.central.pi_a = static_cast<int>(parse_long(key, value));
    else if (key == "model.pi_b") m.central.pi_b = static_cast<int>(parse_long(key, value));
    else if (key == "model.t_ab") m.central.t_ab = static_cast<int>(parse_long(key, value));
    else if (key == "model.t_ba") m.central.t_ba = static_cast<int>(parse_long(key, value));
    else if (key == "model.rho_s") { m.rho_s = parse_double(key, value); cfg.rho_s_set = true; }
    else if (key == "model.rho_u") { m.rho_u = parse_double(key, value); cfg.rho_u_set = true; }
    else if (key == "model.s_dim") m.s_dim = static_cast<int>(parse_long(key, value));
    else if (key == "model.u_dim") m.u_dim = static_cast<int>(parse_long(key, value));
    else if (key == "model.chart_radius") m.chart_radius = parse_double(key, value);
    else if (key == "model.chart_separation") m.chart_separation = parse_double(key, value);
    else if (key == "model.overflow_tolerance") m.overflow_tolerance = parse_double(key, value);
    else if (key == "model.offset_ab_s") m.offset_ab_s = parse_double(key, value);
    else if (key == "model.offset_ab_u") m.offset_ab_u = parse_double(key, value);
    else if (key == "model.offset_ba_s") m.offset_ba_s = parse_double(key, value);
    else if (key == "model.offset_ba_u") m.offset_ba_u = parse_double(key, value);
    else if (key == "tower.C") t.C = parse_double(key, value);
    else if (key == "tower.halving_ratio") t.halving_ratio = parse_double(key, value);
    else if (key == "tower.levels") t.max_levels = static_cast<int>(parse_long(key, value));
    else if (key == "tower.m_max") t.m_max = parse_long(key, value);
    else if (key == "tower.l_max") t.l_max = parse_long(key, value);
    else if (key == "tower.seed_m_max") t.seed_m_max = parse_long(key, value);
    else if (key == "tower.seed_l_max") t.seed_l_max = parse_long(key, value);
    else if (key == "tower.seed_chi_safety") t.seed_chi_safety = parse_double(key, value);
    else if (key == "tower.eps_budget") t.eps_budget = parse_double(key, value);
    else if (key == "tower.chi_cap_from_level")
        t.chi_cap_from_level = static_cast<int>(parse_long(key, value));
    else if (key == "tower.exit_safety") t.exit_safety = parse_double(key, value);
    else if (key == "tower.period_cap") t.period_cap = parse_long(key, value);
    else if (key == "tower.minimize_child_period")
        t.minimize_child_period = parse_bool(key, value);
    else if (key == "tower.closure_tol") t.closure_tol = parse_double(key, value);
    else if (key == "tower.require_strict_regime")
        t.require_strict_regime = parse_bool(key, value);
    else if (key == "verify.eps") {
        cfg.verify_eps.clear();
        for (const auto& s : detail::split_list(value))
            cfg.verify_eps.push_back(parse_double(key, s));
    } else if (key == "verify.dictionary") cfg.dictionary = value;
    else if (key == "verify.support_n_max")
        cfg.support_n_max = static_cast<int>(parse_long(key, value));
    else if (key == "verify.subsample_threshold") cfg.subsample_threshold = parse_long(key, value);
    else if (key == "solve.l_min") cfg.solve_l_min = parse_long(key, value);
    else if (key == "solve.l_max") cfg.solve_l_max = parse_long(key, value);
    else if (key == "solve.m_min") cfg.solve_m_min = parse_long(key, value);
    else if (key == "solve.m_max") cfg.solve_m_max = parse_long(key, value);
    else if (key == "solve.corbd_k") {
        cfg.corbd_k.clear();
        for (const auto& s : detail::split_list(value)) cfg.corbd_k.push_back(parse_long(key, s));
    } else if (key == "solve.corbd_p") cfg.corbd_p = parse_long(key, value);
    else if (key == "solve.corbd_q") cfg.corbd_q = parse_long(key, value);
    else if (key == "output.format") cfg.output_format = value;
    else if (key == "output.path") cfg.output_path = value;
    else if (key == "seed") cfg.seed = parse_long(key, value);
    else if (key.rfind("sweep.", 0) == 0) {
        const std::string inner = key.substr(6);
        cfg.sweep[inner] = detail::split_list(value);
    } else {
        throw ConfigValidationError("config: unknown key '" + key + "'");
    }
}

inline RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            std::ostringstream os;
            os << "config: line " << lineno << " is not a key = value pair: '" << line << "'";
            throw ConfigParseError(os.str());
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigParseError("config: empty key on line " + std::to_string(lineno));
        apply_config_entry(cfg, key, value);
    }
    cfg.resolve_defaults();
    cfg.validate();
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    if (path.empty()) return parse_config_text("");
    std::ifstream in(path);
    if (!in) throw ConfigParseError("config: cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config_text(os.str());
}

}  // namespace hetcycle
