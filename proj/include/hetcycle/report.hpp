#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hetcycle/config.hpp"
#include "hetcycle/measure.hpp"

namespace hetcycle {

using json = nlohmann::ordered_json;

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// CSV field per RFC 4180: quote when the value contains comma, quote or
/// newline; double the quotes inside.
inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

inline json config_to_json(const RunConfig& c) {
    json j;
    j["model"] = {{"lambda", c.model.central.lambda},
                  {"beta", c.model.central.beta},
                  {"tau", c.model.central.tau},
                  {"pi_a", c.model.central.pi_a},
                  {"pi_b", c.model.central.pi_b},
                  {"t_ab", c.model.central.t_ab},
                  {"t_ba", c.model.central.t_ba},
                  {"rho_s", c.model.rho_s},
                  {"rho_u", c.model.rho_u},
                  {"s_dim", c.model.s_dim},
                  {"u_dim", c.model.u_dim},
                  {"chart_radius", c.model.chart_radius},
                  {"chart_separation", c.model.chart_separation},
                  {"overflow_tolerance", c.model.overflow_tolerance},
                  {"offset_ab_s", c.model.offset_ab_s},
                  {"offset_ab_u", c.model.offset_ab_u},
                  {"offset_ba_s", c.model.offset_ba_s},
                  {"offset_ba_u", c.model.offset_ba_u}};
    j["tower"] = {{"C", c.tower.C},
                  {"halving_ratio", c.tower.halving_ratio},
                  {"levels", c.tower.max_levels},
                  {"m_max", c.tower.m_max},
                  {"l_max", c.tower.l_max},
                  {"seed_m_max", c.tower.seed_m_max},
                  {"seed_l_max", c.tower.seed_l_max},
                  {"seed_chi_safety", c.tower.seed_chi_safety},
                  {"eps_budget", c.tower.eps_budget},
                  {"chi_cap_from_level", c.tower.chi_cap_from_level},
                  {"exit_safety", c.tower.exit_safety},
                  {"period_cap", c.tower.period_cap},
                  {"minimize_child_period", c.tower.minimize_child_period},
                  {"closure_tol", c.tower.closure_tol},
                  {"require_strict_regime", c.tower.require_strict_regime}};
    j["verify"] = {{"eps", c.verify_eps},
                   {"dictionary", c.dictionary},
                   {"support_n_max", c.support_n_max},
                   {"subsample_threshold", c.subsample_threshold}};
    j["solve"] = {{"l_min", c.solve_l_min},
                  {"l_max", c.solve_l_max},
                  {"m_min", c.solve_m_min},
                  {"m_max", c.solve_m_max},
                  {"corbd_k", c.corbd_k},
                  {"corbd_p", c.corbd_p},
                  {"corbd_q", c.corbd_q}};
    // the destination path is not part of the experiment, so the echo omits it
    j["output"] = {{"format", c.output_format}};
    j["seed"] = c.seed;
    return j;
}

inline json certificate_to_json(const GoodApproxCertificate& c) {
    return {{"gamma", c.gamma},
            {"kappa_target", c.kappa_target},
            {"kappa", c.kappa},
            {"gamma_measured", c.gamma_measured},
            {"included_blocks", c.included_blocks},
            {"total_blocks", c.total_blocks},
            {"fiber_count", c.fiber_count},
            {"gamma_bound_ok", c.gamma_bound_ok},
            {"kappa_ok", c.kappa_ok},
            {"fibers_equal", c.fibers_equal}};
}

inline json inequality_to_json(const InequalityReport& r) {
    return {{"name", r.name}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"holds", r.holds},
            {"context", r.context}};
}

inline json level_to_json(const TowerLevel& lv) {
    json j;
    j["n"] = lv.n;
    j["l"] = lv.l;
    j["m"] = lv.m;
    j["nu"] = lv.orbit.meta_nu;
    j["exit_offset"] = lv.orbit.meta_exit_offset;
    j["period"] = lv.orbit.period;
    j["sigma"] = lv.orbit.sigma;
    j["chi"] = lv.chi;
    j["kappa"] = lv.kappa;
    j["d"] = lv.d;
    j["gamma"] = lv.gamma;
    j["gamma_final"] = lv.gamma_final;
    j["gamma_ceiling"] = lv.gamma_ceiling;
    j["base_central"] = lv.orbit.base.x_c;
    j["base_chart"] = lv.orbit.base.chart.name();
    j["certificate"] = certificate_to_json(lv.approach);
    json gates = json::array();
    for (const auto& g : lv.gates) gates.push_back(inequality_to_json(g));
    j["gates"] = gates;
    return j;
}

inline json tower_to_json(const Tower& tower) {
    json j;
    json lvls = json::array();
    for (const auto& lv : tower.levels()) lvls.push_back(level_to_json(lv));
    j["levels"] = lvls;
    return j;
}

/// Rebuild a tower from its serialized (l, m, exit_offset) schedule. The
/// arithmetic is deterministic, so the rebuilt numbers must match the stored
/// ones bit for bit; stored gamma values are adopted (they are audited by the
/// verification pass, which is what catches a tampered artifact).
inline Tower tower_from_json(const CycleSystem& sys, const TowerConfig& cfg, const json& j) {
    const auto& jl = j.at("levels");
    if (jl.empty()) throw ConfigValidationError("tower artifact: no levels");
    const long l1 = jl[0].at("l").get<long>();
    const long m1 = jl[0].at("m").get<long>();
    Tower tower = init_tower(sys, cfg, build_seed_orbit(sys, l1, m1, cfg.closure_tol));
    for (size_t i = 1; i < jl.size(); ++i) {
        const long l = jl[i].at("l").get<long>();
        const long m = jl[i].at("m").get<long>();
        const double exit_offset = jl[i].at("exit_offset").get<double>();
        TowerLevel& parent_lv = tower.levels_mutable().back();
        ChildCycle ch = child_cycle(sys, parent_lv.orbit, l, m, exit_offset);
        PeriodicOrbit child = realize_child(sys, parent_lv.orbit, ch, cfg.closure_tol);
        TowerLevel lv;
        lv.n = parent_lv.n + 1;
        lv.l = l;
        lv.m = m;
        lv.chi = child.chi;
        lv.kappa = 1.0 - cfg.C * child.chi;
        lv.d = min_orbit_gap(sys, child).value;
        const double gamma_parent = jl[i - 1].at("gamma").get<double>();
        lv.approach = verify_good_approx(sys, child, parent_lv.orbit, gamma_parent,
                                         parent_lv.kappa);
        {
            CycleCentralData eff = sys.central();
            eff.pi_b = static_cast<int>(parent_lv.orbit.period);
            eff.beta = std::abs(parent_lv.orbit.sigma);
            lv.gates = section6_checks(eff, cfg.C, parent_lv.chi, l, m,
                                       sys.central().t_ab + sys.central().t_ba);
        }
        lv.gamma_ceiling = std::min(tower.min_gap_up_to(parent_lv.n), lv.d) /
                           (3.0 * std::pow(2.0, lv.n));
        lv.orbit = std::move(child);
        parent_lv.gamma = gamma_parent;
        parent_lv.gamma_final = true;
        tower.push_level(std::move(lv));
    }
    // adopt the stored gamma of the top level
    tower.levels_mutable().back().gamma = jl.back().at("gamma").get<double>();
    tower.levels_mutable().back().gamma_final = jl.back().at("gamma_final").get<bool>();
    for (size_t i = 0; i < jl.size(); ++i) {
        TowerLevel& lv = tower.levels_mutable()[i];
        lv.gamma = jl[i].at("gamma").get<double>();
    }
    return tower;
}

/// Level table as CSV rows.
inline std::string levels_to_csv(const Tower& tower) {
    std::ostringstream os;
    os << "n,l,m,period,sigma,chi,gamma,kappa,d,r,kappa_measured,included_blocks,total_blocks\n";
    std::vector<double> r;
    try {
        r = r_sequence(tower);
    } catch (const BoundViolatedError&) {
        r.assign(tower.levels().size(), std::nan(""));
    }
    const auto& lv = tower.levels();
    for (size_t i = 0; i < lv.size(); ++i) {
        os << lv[i].n << ',' << lv[i].l << ',' << lv[i].m << ',' << lv[i].orbit.period << ','
           << fmt17(lv[i].orbit.sigma) << ',' << fmt17(lv[i].chi) << ',' << fmt17(lv[i].gamma)
           << ',' << fmt17(lv[i].kappa) << ',' << fmt17(lv[i].d) << ',' << fmt17(r[i]) << ','
           << fmt17(lv[i].approach.kappa) << ',' << lv[i].approach.included_blocks << ','
           << lv[i].approach.total_blocks << '\n';
    }
    return os.str();
}

inline void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::fputs(text.c_str(), stdout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write output file '" + path + "'");
    out << text;
}

}  // namespace hetcycle
