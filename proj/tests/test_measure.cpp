#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "hetcycle/config.hpp"
#include "hetcycle/measure.hpp"

using namespace hetcycle;

namespace {

CycleSpec demo_spec() {
    CycleSpec s;
    s.central.lambda = 0.5;
    s.central.beta = 2.0;
    s.central.tau = +1;
    s.rho_s = 0.25;
    s.rho_u = 4.0;
    return s;
}

WordPtr lm_word(const CycleCentralData& c, long l, long m) {
    const NuSolution nu = nu_for_fixed_point(c, l, m);
    return ItineraryWord::make({TokenTba{}, TokenA{l}, TokenTab{nu.nu}, TokenB{m}}, c);
}

const TestFunction& by_id(const std::vector<TestFunction>& dict, const std::string& id) {
    for (const auto& f : dict)
        if (f.id == id) return f;
    FAIL("missing dictionary function " + id);
    return dict.front();
}

const Tower& default_tower() {
    static RunConfig cfg = parse_config_text("");
    static CycleSystem sys = build_model(cfg.model, true);
    static Tower tower = [] {
        const auto [l, m] = search_seed(sys, cfg.tower);
        Tower t = init_tower(sys, cfg.tower, build_seed_orbit(sys, l, m));
        for (int n = 2; n <= cfg.tower.max_levels; ++n) extend(t);
        return t;
    }();
    return tower;
}

}  // namespace

TEST_CASE("integrate over orbit measures") {
    const CycleSystem sys = build_model(demo_spec());
    const auto dict = default_dictionary(sys);
    const PeriodicOrbit b = realize_orbit(sys, ItineraryWord::saddle_b(sys.central()));
    const PeriodicOrbit orb = realize_orbit(sys, lm_word(sys.central(), 3, 4));

    CHECK(integrate(sys, {&b}, by_id(dict, "central")) == 0.0);
    CHECK(integrate(sys, {&orb}, by_id(dict, "b_phase")) ==
          Catch::Approx(4.0 / 11.0).margin(1e-14));
    CHECK(integrate(sys, {&orb}, by_id(dict, "one")) == Catch::Approx(1.0).margin(0.0));
    CHECK(integrate(sys, {&orb}, by_id(dict, "a_phase")) ==
          Catch::Approx(3.0 / 11.0).margin(1e-14));
}

TEST_CASE("n-measure integrals") {
    const CycleSystem sys = build_model(demo_spec());
    const auto dict = default_dictionary(sys);
    const PeriodicOrbit orb = realize_orbit(sys, lm_word(sys.central(), 3, 4));
    const TestFunction& phi = by_id(dict, "central");
    CHECK(n_measure_integral(sys, orb, 0, orb.period, phi) ==
          Catch::Approx(integrate(sys, {&orb}, phi)).margin(1e-14));
    CHECK(n_measure_integral(sys, orb, 0, 1, phi) == Catch::Approx(orb.base.x_c).margin(0.0));
}

TEST_CASE("modulus of continuity") {
    const CycleSystem sys = build_model(demo_spec());
    TestFunction phi{"probe", 2.0, 1.5, {}};
    CHECK(modulus_of_continuity(phi, 0.01) == Catch::Approx(0.02).margin(1e-15));
    CHECK(modulus_of_continuity(phi, 0.0) == 0.0);
    CHECK(modulus_of_continuity(phi, 10.0) == 1.5);  // capped at the oscillation
}

TEST_CASE("declared Lipschitz constants hold on sampled pairs") {
    const CycleSystem sys = build_model(demo_spec());
    const auto dict = default_dictionary(sys);
    std::mt19937 rng(7u);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        AmbientPoint p = sys.make_point({ChartRole::b_phase, 0}, u(rng));
        AmbientPoint q = sys.make_point({ChartRole::b_phase, 0}, u(rng));
        p.x_s[0] = u(rng);
        q.x_s[0] = u(rng);
        p.x_u[0] = u(rng);
        q.x_u[0] = u(rng);
        const double dist = sys.distance(p, q);
        for (const auto& phi : dict)
            CHECK(std::abs(phi.eval(sys, p) - phi.eval(sys, q)) <=
                  phi.lipschitz * dist * (1.0 + 1e-12) + 1e-18);
    }
    // a cross-chart pair exercises the separation part of the constants
    const AmbientPoint pa = sys.make_point({ChartRole::a_phase, 0}, 0.3);
    const AmbientPoint pb = sys.make_point({ChartRole::b_phase, 0}, 0.3);
    for (const auto& phi : dict)
        CHECK(std::abs(phi.eval(sys, pa) - phi.eval(sys, pb)) <=
              phi.lipschitz * sys.distance(pa, pb) * (1.0 + 1e-12));
}

TEST_CASE("central exponent of measures") {
    const CycleSystem sys = build_model(demo_spec());
    const PeriodicOrbit b = realize_orbit(sys, ItineraryWord::saddle_b(sys.central()));
    CHECK(central_exponent_of_measure(sys, {&b}) == Catch::Approx(std::log(2.0)).margin(1e-14));
    const PeriodicOrbit orb = realize_orbit(sys, lm_word(sys.central(), 3, 4));
    CHECK(central_exponent_of_measure(sys, {&orb}) ==
          Catch::Approx(std::log(2.0) / 11.0).margin(1e-13));
}

TEST_CASE("weak-star gaps") {
    const CycleSystem sys = build_model(demo_spec());
    const auto dict = default_dictionary(sys);
    const PeriodicOrbit a = realize_orbit(sys, ItineraryWord::saddle_a(sys.central()));
    const PeriodicOrbit b = realize_orbit(sys, ItineraryWord::saddle_b(sys.central()));
    CHECK(weak_star_gap(sys, {&b}, {&b}, dict) == 0.0);
    // both saddles sit at central 0, so only the indicators separate them
    CHECK(std::abs(integrate(sys, {&a}, by_id(dict, "central")) -
                   integrate(sys, {&b}, by_id(dict, "central"))) == 0.0);
    CHECK(weak_star_gap(sys, {&a}, {&b}, dict) >= 1.0);
}

TEST_CASE("weak-star gaps respect the shadowing bound along the tower") {
    const Tower& tower = default_tower();
    const CycleSystem& sys = tower.system();
    const auto dict = default_dictionary(sys);
    const auto& lv = tower.levels();
    for (size_t i = 1; i < lv.size(); ++i) {
        const double gap =
            weak_star_gap(sys, {&lv[i - 1].orbit}, {&lv[i].orbit}, dict);
        double bound = 0.0;
        for (const auto& phi : dict)
            bound = std::max(bound, phi.lipschitz * lv[i - 1].gamma +
                                        (1.0 - lv[i].approach.kappa) * phi.oscillation);
        CHECK(gap <= bound * (1.0 + 1e-9));
    }
}

TEST_CASE("choose_N") {
    const Tower& tower = default_tower();
    const CycleSystem& sys = tower.system();
    const auto dict = default_dictionary(sys);

    SECTION("an eps above the oscillation needs no metric budget") {
        const TestFunction& one = by_id(dict, "one");
        const ChosenN cn = choose_N(tower, one, 0.5);
        CHECK(cn.N >= 1);
        CHECK(std::isinf(cn.delta));
    }

    SECTION("finite N for the acceptance tolerances") {
        for (double eps : {0.1, 0.05}) {
            for (const auto& phi : dict) {
                const ChosenN cn = choose_N(tower, phi, eps);
                CHECK(cn.N >= 1);
                CHECK(cn.N <= tower.levels().back().n);
            }
        }
    }

    SECTION("a hopeless eps reports the required depth") {
        const TestFunction& c = by_id(dict, "central");
        CHECK_THROWS_AS(choose_N(tower, c, 1e-12), NoSuchNError);
        try {
            choose_N(tower, c, 1e-12);
        } catch (const NoSuchNError& e) {
            CHECK(e.required_depth_estimate > tower.levels().back().n);
        }
    }
}

TEST_CASE("ergodicity criterion deviations are reproducible") {
    const Tower& tower = default_tower();
    const CycleSystem& sys = tower.system();
    const auto dict = default_dictionary(sys);
    const TestFunction& phi = by_id(dict, "b_phase");
    // a loose eps pulls N down so that small-period pairs are exercised
    const auto rep = check_ergodicity_criterion(tower, phi, 0.45);
    CHECK(rep.passed);
    // independent double-loop re-evaluation of the reported deviations
    const auto& lv = tower.levels();
    for (const auto& pd : rep.pairs) {
        if (lv[static_cast<size_t>(pd.m - 1)].orbit.period > 10000) continue;
        const PeriodicOrbit& om = lv[static_cast<size_t>(pd.m - 1)].orbit;
        const PeriodicOrbit& on = lv[static_cast<size_t>(pd.n - 1)].orbit;
        const double mu_n = integrate(sys, {&on}, phi);
        auto members = tower.levels()[static_cast<size_t>(pd.m - 1)].approach.block_included;
        double maxdev = 0.0;
        // recompute membership through the stored block structure
        for (long t = 0; t < om.period; ++t) {
            const long pp = om.shadow->parent_period;
            if (t >= om.shadow->reps * pp) continue;
            if (!members[static_cast<size_t>(t / pp)]) continue;
            maxdev = std::max(maxdev,
                              std::abs(n_measure_integral(sys, om, t, on.period, phi) - mu_n));
        }
        CHECK(pd.max_deviation <= maxdev + 1e-12);
    }
}

TEST_CASE("exponent trace decays toward zero") {
    const Tower& tower = default_tower();
    const ExponentTrace tr = exponent_trace(tower);
    REQUIRE(tr.values.size() == tower.levels().size());
    for (size_t i = 0; i < tr.values.size(); ++i)
        CHECK(std::abs(tr.values[i].second - tower.levels()[i].chi) < 1e-12);
    CHECK(tr.decay_ratio < 0.5);
    CHECK(tr.extrapolated_limit == 0.0);
}
