#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "hetcycle/config.hpp"
#include "hetcycle/report.hpp"
#include "hetcycle/tower.hpp"
#include "hetcycle/verify.hpp"

using namespace hetcycle;

namespace {

const CycleSystem& default_system() {
    static RunConfig cfg = parse_config_text("");
    static CycleSystem sys = build_model(cfg.model, true);
    return sys;
}

TowerConfig default_tower_config() {
    static RunConfig cfg = parse_config_text("");
    return cfg.tower;
}

const Tower& default_tower() {
    static Tower tower = [] {
        const CycleSystem& sys = default_system();
        const TowerConfig cfg = default_tower_config();
        const auto [l, m] = search_seed(sys, cfg);
        Tower t = init_tower(sys, cfg, build_seed_orbit(sys, l, m));
        for (int n = 2; n <= cfg.max_levels; ++n) extend(t);
        return t;
    }();
    return tower;
}

// brute force re-check of a certificate: every point of every repetition,
// every window offset
GoodApproxCertificate brute_certificate(const CycleSystem& sys, const PeriodicOrbit& child,
                                        const PeriodicOrbit& parent, double gamma,
                                        double target) {
    const ShadowInfo sh = *child.shadow;
    const long P = parent.period;
    auto cpts = orbit_points(sys, child, 0, child.period);
    auto ppts = orbit_points(sys, parent, 0, P);
    auto child_at = [&](long t) -> const AmbientPoint& {
        return cpts[static_cast<size_t>(((sh.start + t) % child.period + child.period) %
                                        child.period)];
    };
    GoodApproxCertificate cert;
    cert.gamma = gamma;
    cert.kappa_target = target;
    cert.total_blocks = sh.reps;
    cert.block_included.assign(static_cast<size_t>(sh.reps), 0);
    double measured = 0.0;
    for (long i = 0; i < sh.reps; ++i) {
        bool ok = true;
        double block_max = 0.0;
        for (long p = 0; p < P && ok; ++p) {
            for (long j = 0; j < P && ok; ++j) {
                const long t = i * P + p + j;
                const double dist = sys.distance(child_at(t), ppts[static_cast<size_t>((p + j) % P)]);
                block_max = std::max(block_max, dist);
                if (!(dist < gamma)) ok = false;
            }
        }
        if (ok) {
            cert.block_included[static_cast<size_t>(i)] = 1;
            ++cert.included_blocks;
            measured = std::max(measured, block_max);
        }
    }
    cert.fiber_count = cert.included_blocks;
    cert.gamma_measured = measured;
    cert.kappa = static_cast<double>(cert.included_blocks * P) / static_cast<double>(child.period);
    return cert;
}

}  // namespace

TEST_CASE("tower config validation enforces the budget constant") {
    CycleCentralData d;
    d.lambda = 0.95;
    d.beta = 1.2;
    TowerConfig cfg;
    cfg.C = 100.0;
    CHECK_THROWS_AS(cfg.validate(d), ConfigValidationError);
    CHECK_THROWS_WITH(cfg.validate(d), Catch::Matchers::ContainsSubstring("311.9"));
    cfg.C = 320.0;
    CHECK_NOTHROW(cfg.validate(d));
    cfg.halving_ratio = 1.0;
    CHECK_THROWS_AS(cfg.validate(d), ConfigValidationError);
}

TEST_CASE("init_tower gates") {
    const CycleSystem& sys = default_system();
    const TowerConfig cfg = default_tower_config();

    SECTION("the B word itself is rejected") {
        PeriodicOrbit b = realize_orbit(sys, ItineraryWord::saddle_b(sys.central()));
        b.shadow = ShadowInfo{1, 1, 0};
        CHECK_THROWS_AS(init_tower(sys, cfg, b), RejectedError);
        CHECK_THROWS_WITH(init_tower(sys, cfg, b),
                          Catch::Matchers::ContainsSubstring("chi^c(B)/2"));
    }

    SECTION("a long, slowly expanding seed is accepted") {
        // period 7200 with log-multiplier near 2.1: chi ~ 2.9e-4
        const PeriodicOrbit orb = build_seed_orbit(sys, 5607, 1589);
        CHECK(orb.period == 7200);
        Tower t = init_tower(sys, cfg, orb);
        const double kappa1 = t.levels().front().kappa;
        CHECK(kappa1 == Catch::Approx(0.902).margin(0.01));
    }
}

TEST_CASE("seed search maximizes the exponent under the caps") {
    const CycleSystem& sys = default_system();
    const TowerConfig cfg = default_tower_config();
    const auto [l, m] = search_seed(sys, cfg);
    const PeriodicOrbit orb = build_seed_orbit(sys, l, m);
    CHECK(orb.chi > 0.0);
    CHECK(orb.chi < cfg.seed_chi_safety / cfg.C);
    CHECK(orb.chi < 0.5 * sys.central().chi_b());
    // no admissible lattice point beats it
    for (long mm = 1; mm <= cfg.seed_m_max; ++mm)
        for (long ll = 1; ll <= cfg.seed_l_max; ++ll) {
            const double g = mm * sys.central().log_beta() + ll * sys.central().log_lambda();
            const long period = mm + ll + 4;
            if (g <= 0.0) continue;
            const double chi = g / period;
            if (chi < cfg.seed_chi_safety / cfg.C && chi < 0.5 * sys.central().chi_b())
                CHECK(chi <= orb.chi * (1.0 + 1e-12));
        }
}

TEST_CASE("default tower satisfies the level gates") {
    const Tower& tower = default_tower();
    const auto& lv = tower.levels();
    REQUIRE(static_cast<int>(lv.size()) == default_tower_config().max_levels);

    for (size_t i = 1; i < lv.size(); ++i) {
        CHECK(lv[i].orbit.period > lv[i - 1].orbit.period);         // Z4
        CHECK(lv[i].chi < 0.5 * lv[i - 1].chi);                     // Z8
        CHECK(lv[i].approach.kappa >= lv[i - 1].kappa);             // Z6
        CHECK(lv[i].approach.kappa_ok);
        CHECK(lv[i].approach.gamma_bound_ok);
    }
    for (const auto& level : lv) {
        CHECK(level.gamma < tower.ceiling(level.n));                // Z7
        CHECK(level.d > 0.0);
        CHECK(level.kappa > 0.0);
    }
}

TEST_CASE("certificate agrees with the brute-force recheck") {
    const Tower& tower = default_tower();
    const CycleSystem& sys = tower.system();
    const auto& lv = tower.levels();
    for (size_t i = 1; i < lv.size(); ++i) {
        if (lv[i].orbit.period > 10000) continue;
        const auto brute = brute_certificate(sys, lv[i].orbit, lv[i - 1].orbit, lv[i - 1].gamma,
                                             lv[i - 1].kappa);
        const auto fast =
            verify_good_approx(sys, lv[i].orbit, lv[i - 1].orbit, lv[i - 1].gamma,
                               lv[i - 1].kappa);
        CHECK(brute.included_blocks == fast.included_blocks);
        CHECK(brute.block_included == fast.block_included);
        CHECK(brute.gamma_measured == Catch::Approx(fast.gamma_measured).margin(1e-18));
    }
}

TEST_CASE("verify_good_approx at gamma = 0 yields the empty certificate") {
    const Tower& tower = default_tower();
    const auto& lv = tower.levels();
    const auto cert = verify_good_approx(tower.system(), lv[1].orbit, lv[0].orbit, 0.0,
                                         lv[0].kappa);
    CHECK(cert.included_blocks == 0);
    CHECK(cert.kappa == 0.0);
    CHECK_FALSE(cert.gamma_bound_ok);
    CHECK_FALSE(cert.kappa_ok);
}

TEST_CASE("extend reports infeasibility under a starved budget") {
    const CycleSystem& sys = default_system();
    TowerConfig cfg = default_tower_config();
    cfg.m_max = 1;  // one repetition can never reach the fraction target
    const auto [l, m] = search_seed(sys, cfg);
    Tower t = init_tower(sys, cfg, build_seed_orbit(sys, l, m));
    CHECK_THROWS_AS(extend(t), InfeasibleError);
    try {
        extend(t);
    } catch (const InfeasibleError& e) {
        CHECK(std::string(e.what()).find("fraction") != std::string::npos);
    }
}

TEST_CASE("kappa products and the r chain") {
    const Tower& tower = default_tower();
    const auto kp = kappa_product(tower, 1);
    CHECK(kp.product > 0.0);
    CHECK(kp.tail_bound > 0.0);
    CHECK(kp.combined <= kp.product);
    const auto kp3 = kappa_product(tower, 3);
    CHECK(kp3.combined > kp.combined);

    const auto r = r_sequence(tower);
    const auto& lv = tower.levels();
    for (size_t i = 0; i < lv.size(); ++i) {
        CHECK(r[i] < lv[i].d / 3.0);
        if (i + 1 < lv.size()) CHECK(r[i] > r[i + 1]);
    }
}

TEST_CASE("support bounds count every ball") {
    const Tower& tower = default_tower();
    const int top = tower.levels().back().n;
    for (int n = 1; n <= std::min(3, top - 1); ++n) {
        for (int m = n + 1; m <= top; ++m) {
            const SupportBound sb = support_bound(tower, n, m);
            CHECK(sb.ball_count == tower.levels()[n - 1].orbit.period);
            CHECK(sb.min_measure >= sb.measure_lower_bound);
        }
    }
}

TEST_CASE("artifact round-trip and tamper detection") {
    const Tower& tower = default_tower();
    const CycleSystem& sys = tower.system();
    const TowerConfig cfg = default_tower_config();
    json art = tower_to_json(tower);

    SECTION("round-trip reproduces identical numbers") {
        Tower re = tower_from_json(sys, cfg, art);
        REQUIRE(re.levels().size() == tower.levels().size());
        for (size_t i = 0; i < re.levels().size(); ++i) {
            CHECK(re.levels()[i].orbit.period == tower.levels()[i].orbit.period);
            CHECK(re.levels()[i].orbit.sigma == tower.levels()[i].orbit.sigma);
            CHECK(re.levels()[i].chi == tower.levels()[i].chi);
            CHECK(re.levels()[i].d == tower.levels()[i].d);
            CHECK(re.levels()[i].gamma == tower.levels()[i].gamma);
        }
        const auto ver = verify_tower(re, {0.1}, 2, 100000);
        CHECK(ver.passed);
    }

    SECTION("a gamma lifted above its ceiling trips condition 4") {
        json bad = art;
        bad["levels"][1]["gamma"] = 1.0;  // far above any ceiling
        Tower re = tower_from_json(sys, cfg, bad);
        const auto ver = verify_tower(re, {0.1}, 2, 100000);
        CHECK_FALSE(ver.passed);
        REQUIRE(ver.first_failure() != nullptr);
        CHECK(ver.first_failure()->name == "condition_4_gamma_gap_bound");
    }
}
