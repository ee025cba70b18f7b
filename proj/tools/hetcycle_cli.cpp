// Command line front end: solver tables, tower construction, certified
// verification, parameter sweeps and report conversion.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hetcycle/hetcycle.hpp"

namespace hc = hetcycle;
using hc::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 2;
constexpr int kExitAssertion = 3;
constexpr int kExitParse = 64;
constexpr int kExitValidation = 65;

struct CommonOpts {
    std::string config_path;
    std::string out_path;
    std::string format;
    int levels_override = -1;
    bool no_timing = false;
    long seed_override = -1;
    bool emit_plot_data = false;
};

hc::RunConfig load_with_overrides(const CommonOpts& o) {
    hc::RunConfig cfg = hc::load_config(o.config_path);
    if (o.levels_override >= 0) cfg.tower.max_levels = o.levels_override;
    if (!o.format.empty()) cfg.output_format = o.format;
    if (!o.out_path.empty()) cfg.output_path = o.out_path;
    if (o.seed_override >= 0) cfg.seed = o.seed_override;
    if (o.no_timing) cfg.emit_timing = false;
    cfg.validate();
    return cfg;
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

void emit(const hc::RunConfig& cfg, json& report, double ms) {
    if (cfg.emit_timing) report["timing"] = {{"elapsed_ms", ms}};
    if (cfg.output_format == "json") {
        hc::write_text(cfg.output_path, report.dump(2) + "\n");
    } else {
        // csv emission: one section per table, prefixed by a header line
        std::ostringstream os;
        if (report.contains("levels_csv")) {
            os << report["levels_csv"].get<std::string>();
        } else {
            os << "key,value\n";
            os << "report," << hc::csv_field(report.dump()) << "\n";
        }
        hc::write_text(cfg.output_path, os.str());
    }
}

void emit_plot_data(const hc::RunConfig& cfg, const hc::Tower& tower,
                    const hc::VerificationReport* ver) {
    const std::string base = cfg.output_path.empty() ? "hetcycle" : cfg.output_path;
    {
        std::ostringstream os;
        os << "n,chi,period\n";
        for (const auto& lv : tower.levels())
            os << lv.n << ',' << hc::fmt17(lv.chi) << ',' << lv.orbit.period << '\n';
        hc::write_text(base + "_chi.csv", os.str());
    }
    {
        std::ostringstream os;
        os << "from_n,product,tail_bound,combined\n";
        for (const auto& lv : tower.levels()) {
            const auto kp = hc::kappa_product(tower, lv.n);
            os << lv.n << ',' << hc::fmt17(kp.product) << ',' << hc::fmt17(kp.tail_bound) << ','
               << hc::fmt17(kp.combined) << '\n';
        }
        hc::write_text(base + "_kappa.csv", os.str());
    }
    {
        std::ostringstream os;
        os << "n,gamma,gamma_ceiling,d,r\n";
        std::vector<double> r;
        if (ver && !ver->r_values.empty()) r = ver->r_values;
        const auto& lv = tower.levels();
        for (size_t i = 0; i < lv.size(); ++i)
            os << lv[i].n << ',' << hc::fmt17(lv[i].gamma) << ','
               << hc::fmt17(tower.ceiling(lv[i].n)) << ',' << hc::fmt17(lv[i].d) << ','
               << (i < r.size() ? hc::fmt17(r[i]) : "") << '\n';
        hc::write_text(base + "_margins.csv", os.str());
    }
}

json solve_tables(const hc::RunConfig& cfg) {
    const auto& d = cfg.model.central;
    json out;
    json nu_rows = json::array();
    for (long l = cfg.solve_l_min; l <= cfg.solve_l_max; ++l) {
        for (long m = cfg.solve_m_min; m <= cfg.solve_m_max; ++m) {
            const hc::NuSolution s = hc::nu_for_fixed_point(d, l, m);
            const hc::AffineMap1D r = hc::return_map(d, s.nu, l, m);
            json row;
            row["l"] = l;
            row["m"] = m;
            row["nu"] = s.nu;
            row["multiplier"] = s.multiplier;
            row["period"] = s.period;
            row["closing_residual"] = s.closing_residual(d);
            double fp_err = std::nan("");
            if (auto fp = hc::try_fixed_point(r)) fp_err = std::abs(*fp - 1.0);
            row["fixed_point_error"] = fp_err;
            nu_rows.push_back(row);
        }
    }
    out["nu_table"] = nu_rows;

    json corbd_rows = json::array();
    for (long k : cfg.corbd_k) {
        for (auto orientation : {hc::Orientation::preserving, hc::Orientation::reversing}) {
            const long p = orientation == hc::Orientation::preserving ? cfg.corbd_p : cfg.corbd_q;
            const long q = orientation == hc::Orientation::preserving ? cfg.corbd_q : cfg.corbd_p;
            const hc::CorbdSolution s = hc::corbd_solve(d, k, p, q, orientation);
            const long mm = orientation == hc::Orientation::preserving ? s.p : s.q;
            const long ll = orientation == hc::Orientation::preserving ? k : k - 2;
            const double closed =
                hc::multiplier_closed_form(d.lambda, s.beta_bar, s.xi_offset, mm, orientation);
            const double direct = std::pow(s.beta_bar, static_cast<double>(mm)) *
                                  std::pow(d.lambda, static_cast<double>(ll));
            json row;
            row["k"] = k;
            row["p"] = p;
            row["q"] = q;
            row["orientation"] = hc::to_string(orientation);
            row["beta_bar"] = s.beta_bar;
            row["xi_offset"] = s.xi_offset;
            row["nu_k"] = s.nu_k;
            row["residual_1"] = s.residual_1;
            row["residual_2"] = s.residual_2;
            row["multiplier_closed_form"] = closed;
            row["multiplier_direct"] = direct;
            row["theta"] = hc::theta_bound(d, orientation);
            corbd_rows.push_back(row);
        }
    }
    out["corbd_table"] = corbd_rows;

    json gate_rows = json::array();
    for (long l = cfg.solve_l_min; l <= cfg.solve_l_max; ++l) {
        for (long m = cfg.solve_m_min; m <= cfg.solve_m_max; ++m) {
            auto checks =
                hc::section6_checks(d, cfg.tower.C, d.chi_b(), l, m, d.t_ab + d.t_ba);
            json row;
            row["l"] = l;
            row["m"] = m;
            json list = json::array();
            for (const auto& c : checks) list.push_back(hc::inequality_to_json(c));
            row["checks"] = list;
            gate_rows.push_back(row);
        }
    }
    out["gate_table"] = gate_rows;
    return out;
}

struct BuiltTower {
    hc::CycleSystem system;
    hc::Tower tower;
};

BuiltTower build_tower_from_config(const hc::RunConfig& cfg) {
    hc::CycleSystem sys = hc::build_model(cfg.model, cfg.tower.require_strict_regime);
    const auto [l1, m1] = hc::search_seed(sys, cfg.tower);
    hc::Tower tower =
        hc::init_tower(sys, cfg.tower, hc::build_seed_orbit(sys, l1, m1, cfg.tower.closure_tol));
    for (int n = 2; n <= cfg.tower.max_levels; ++n) hc::extend(tower);
    return BuiltTower{std::move(sys), std::move(tower)};
}

json tower_report(const hc::RunConfig& cfg, const hc::Tower& tower) {
    json rep;
    rep["command"] = "build-tower";
    rep["config"] = hc::config_to_json(cfg);
    rep["levels"] = hc::tower_to_json(tower)["levels"];
    rep["levels_csv"] = hc::levels_to_csv(tower);
    return rep;
}

int cmd_build_tower(const CommonOpts& o) {
    const auto t0 = std::chrono::steady_clock::now();
    hc::RunConfig cfg = load_with_overrides(o);
    if (cfg.tower.max_levels == 0) {
        json rep;
        rep["command"] = "build-tower";
        rep["config"] = hc::config_to_json(cfg);
        rep["levels"] = json::array();
        emit(cfg, rep, elapsed_ms(t0));
        return kExitOk;
    }
    try {
        BuiltTower bt = build_tower_from_config(cfg);
        json rep = tower_report(cfg, bt.tower);
        if (o.emit_plot_data) emit_plot_data(cfg, bt.tower, nullptr);
        emit(cfg, rep, elapsed_ms(t0));
        return kExitOk;
    } catch (const hc::InfeasibleError& e) {
        json rep;
        rep["command"] = "build-tower";
        rep["config"] = hc::config_to_json(cfg);
        rep["infeasible"] = e.what();
        emit(cfg, rep, elapsed_ms(t0));
        std::cerr << e.what() << "\n";
        return kExitInfeasible;
    } catch (const hc::RejectedError& e) {
        std::cerr << e.what() << "\n";
        return kExitInfeasible;
    }
}

json verification_to_json(const hc::VerificationReport& ver) {
    json out;
    json checks = json::array();
    for (const auto& c : ver.checks)
        checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    out["checks"] = checks;
    out["passed"] = ver.passed;
    out["r_values"] = ver.r_values;
    json kps = json::array();
    for (const auto& kp : ver.kappa_products)
        kps.push_back({{"product", kp.product},
                       {"tail_bound", kp.tail_bound},
                       {"combined", kp.combined}});
    out["kappa_products"] = kps;
    json ergs = json::array();
    for (const auto& r : ver.ergodicity) {
        json pairs = json::array();
        for (const auto& p : r.pairs)
            pairs.push_back({{"n", p.n},
                             {"m", p.m},
                             {"max_deviation", p.max_deviation},
                             {"good_fraction", p.good_fraction},
                             {"subsampled", p.subsampled},
                             {"analytic_bound", p.analytic_bound}});
        ergs.push_back({{"phi", r.phi},
                        {"eps", r.eps},
                        {"N", r.N},
                        {"delta", r.delta},
                        {"passed", r.passed},
                        {"pairs", pairs}});
    }
    out["ergodicity"] = ergs;
    json trace = json::array();
    for (const auto& [n, chi] : ver.trace.values) trace.push_back({{"n", n}, {"chi", chi}});
    out["exponent_trace"] = {{"values", trace},
                             {"decay_ratio", ver.trace.decay_ratio},
                             {"extrapolated_limit", ver.trace.extrapolated_limit}};
    return out;
}

int cmd_verify(const CommonOpts& o, const std::string& tower_path) {
    const auto t0 = std::chrono::steady_clock::now();
    hc::RunConfig cfg = load_with_overrides(o);
    hc::CycleSystem sys = hc::build_model(cfg.model, cfg.tower.require_strict_regime);
    hc::Tower tower(sys, cfg.tower);
    if (!tower_path.empty()) {
        std::ifstream in(tower_path);
        if (!in) throw hc::ConfigParseError("verify: cannot open tower artifact '" + tower_path + "'");
        json art = json::parse(in, nullptr, true, true);
        tower = hc::tower_from_json(sys, cfg.tower, art);
    } else {
        BuiltTower bt = build_tower_from_config(cfg);
        tower = std::move(bt.tower);
        // note: tower references its own system copy; keep it alive
        hc::VerificationReport ver = hc::verify_tower(tower, cfg.verify_eps, cfg.support_n_max,
                                                      cfg.subsample_threshold);
        json rep;
        rep["command"] = "verify";
        rep["config"] = hc::config_to_json(cfg);
        rep["levels"] = hc::tower_to_json(tower)["levels"];
        rep["verification"] = verification_to_json(ver);
        if (o.emit_plot_data) emit_plot_data(cfg, tower, &ver);
        emit(cfg, rep, elapsed_ms(t0));
        if (!ver.passed) {
            std::cerr << "verification failed: " << ver.first_failure()->name << ": "
                      << ver.first_failure()->detail << "\n";
            return kExitAssertion;
        }
        return kExitOk;
    }
    hc::VerificationReport ver =
        hc::verify_tower(tower, cfg.verify_eps, cfg.support_n_max, cfg.subsample_threshold);
    json rep;
    rep["command"] = "verify";
    rep["config"] = hc::config_to_json(cfg);
    rep["levels"] = hc::tower_to_json(tower)["levels"];
    rep["verification"] = verification_to_json(ver);
    if (o.emit_plot_data) emit_plot_data(cfg, tower, &ver);
    emit(cfg, rep, elapsed_ms(t0));
    if (!ver.passed) {
        std::cerr << "verification failed: " << ver.first_failure()->name << ": "
                  << ver.first_failure()->detail << "\n";
        return kExitAssertion;
    }
    return kExitOk;
}

int cmd_solve(const CommonOpts& o) {
    const auto t0 = std::chrono::steady_clock::now();
    hc::RunConfig cfg = load_with_overrides(o);
    try {
        json rep;
        rep["command"] = "solve";
        rep["config"] = hc::config_to_json(cfg);
        json tables = solve_tables(cfg);
        rep["nu_table"] = tables["nu_table"];
        rep["corbd_table"] = tables["corbd_table"];
        rep["gate_table"] = tables["gate_table"];
        emit(cfg, rep, elapsed_ms(t0));
        return kExitOk;
    } catch (const hc::NoRootError& e) {
        std::cerr << e.what() << "\n";
        return kExitInfeasible;
    } catch (const hc::DegenerateError& e) {
        std::cerr << e.what() << "\n";
        return kExitInfeasible;
    }
}

int cmd_sweep(const CommonOpts& o, int jobs) {
    const auto t0 = std::chrono::steady_clock::now();
    hc::RunConfig base = load_with_overrides(o);
    // cartesian cells over the sweep grids, in key order
    std::vector<std::pair<std::string, std::vector<std::string>>> grids(base.sweep.begin(),
                                                                        base.sweep.end());
    long cells = 1;
    for (const auto& [k, v] : grids) cells *= static_cast<long>(v.size());
    auto cell_config = [&](long idx) {
        hc::RunConfig cfg = base;
        cfg.sweep.clear();
        long rem = idx;
        for (const auto& [key, values] : grids) {
            const long i = rem % static_cast<long>(values.size());
            rem /= static_cast<long>(values.size());
            hc::apply_config_entry(cfg, key, values[static_cast<size_t>(i)]);
        }
        cfg.resolve_defaults();
        cfg.validate();
        return cfg;
    };
    auto run_cell = [&](long idx) -> json {
        json cell;
        cell["cell"] = idx;
        hc::RunConfig cfg;
        try {
            cfg = cell_config(idx);
        } catch (const hc::Error& e) {
            cell["status"] = "invalid";
            cell["error"] = e.what();
            return cell;
        }
        json overrides;
        {
            long rem = idx;
            for (const auto& [key, values] : grids) {
                const long i = rem % static_cast<long>(values.size());
                rem /= static_cast<long>(values.size());
                overrides[key] = values[static_cast<size_t>(i)];
            }
        }
        cell["overrides"] = overrides;
        try {
            BuiltTower bt = build_tower_from_config(cfg);
            hc::VerificationReport ver = hc::verify_tower(bt.tower, cfg.verify_eps,
                                                          cfg.support_n_max,
                                                          cfg.subsample_threshold);
            cell["status"] = ver.passed ? "pass" : "fail";
            json lv = json::array();
            for (const auto& l : bt.tower.levels())
                lv.push_back({{"n", l.n},
                              {"period", l.orbit.period},
                              {"chi", l.chi},
                              {"kappa", l.kappa}});
            cell["levels"] = lv;
            if (!ver.passed) cell["first_failure"] = ver.first_failure()->name;
        } catch (const hc::Error& e) {
            cell["status"] = "infeasible";
            cell["error"] = e.what();
        }
        return cell;
    };

    std::vector<json> results(static_cast<size_t>(cells));
    if (jobs <= 1) {
        for (long i = 0; i < cells; ++i) results[static_cast<size_t>(i)] = run_cell(i);
    } else {
        std::vector<std::future<json>> futs;
        futs.reserve(static_cast<size_t>(cells));
        for (long i = 0; i < cells; ++i)
            futs.push_back(std::async(std::launch::async, run_cell, i));
        for (long i = 0; i < cells; ++i) results[static_cast<size_t>(i)] = futs[static_cast<size_t>(i)].get();
    }
    json rep;
    rep["command"] = "sweep";
    rep["config"] = hc::config_to_json(base);
    rep["cells"] = results;
    emit(base, rep, elapsed_ms(t0));
    return kExitOk;
}

int cmd_report(const CommonOpts& o, const std::string& input_path) {
    const auto t0 = std::chrono::steady_clock::now();
    hc::RunConfig cfg = load_with_overrides(o);
    std::ifstream in(input_path);
    if (!in) throw hc::ConfigParseError("report: cannot open '" + input_path + "'");
    json rep = json::parse(in, nullptr, true, true);
    if (cfg.output_format == "csv" && rep.contains("levels_csv")) {
        hc::write_text(cfg.output_path, rep["levels_csv"].get<std::string>());
    } else {
        if (o.no_timing) rep.erase("timing");
        emit(cfg, rep, elapsed_ms(t0));
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"piecewise-affine heterodimensional cycle laboratory"};
    app.require_subcommand(1);
    app.fallthrough();

    CommonOpts opts;
    std::string tower_path, input_path;
    int jobs = 1;
    app.add_option("--config", opts.config_path, "configuration file (key = value lines)");
    app.add_option("--out", opts.out_path, "output path (default stdout)");
    app.add_option("--format", opts.format, "output format: json or csv");
    app.add_option("--levels", opts.levels_override, "override tower.levels");
    app.add_flag("--no-timing", opts.no_timing, "suppress the timing block");
    app.add_option("--seed", opts.seed_override, "tie-breaking seed (pipeline is deterministic)");
    app.add_flag("--emit-plot-data", opts.emit_plot_data, "write plot-ready CSV companions");

    auto* solve = app.add_subcommand("solve", "closing equation and corbd solver tables");
    auto* build = app.add_subcommand("build-tower", "construct the inductive orbit tower");
    auto* verify = app.add_subcommand("verify", "run the certified condition battery");
    verify->add_option("--tower", tower_path, "tower artifact to verify (default: build first)");
    auto* sweep = app.add_subcommand("sweep", "run a grid of configurations");
    sweep->add_option("--jobs", jobs, "parallel workers (deterministic merge)");
    auto* report = app.add_subcommand("report", "re-emit an existing report");
    report->add_option("input", input_path, "report file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitParse;
    }

    try {
        if (solve->parsed()) return cmd_solve(opts);
        if (build->parsed()) return cmd_build_tower(opts);
        if (verify->parsed()) return cmd_verify(opts, tower_path);
        if (sweep->parsed()) return cmd_sweep(opts, jobs);
        if (report->parsed()) return cmd_report(opts, input_path);
    } catch (const hc::ConfigParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitParse;
    } catch (const hc::ConfigValidationError& e) {
        std::cerr << e.what() << "\n";
        return kExitValidation;
    } catch (const hc::InfeasibleError& e) {
        std::cerr << e.what() << "\n";
        return kExitInfeasible;
    } catch (const hc::NoRootError& e) {
        std::cerr << e.what() << "\n";
        return kExitInfeasible;
    } catch (const hc::DegenerateError& e) {
        std::cerr << e.what() << "\n";
        return kExitInfeasible;
    } catch (const hc::Error& e) {
        std::cerr << e.what() << "\n";
        return kExitAssertion;
    }
    return kExitOk;
}
