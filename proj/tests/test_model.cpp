#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "hetcycle/model.hpp"

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

}  // namespace

TEST_CASE("build_model counts charts") {
    const CycleSystem sys = build_model(demo_spec());
    CHECK(sys.chart_count() == 6);  // 1 A + 1 B + 2 ab + 2 ba
    CHECK(sys.charts().size() == 6);
}

TEST_CASE("per-step central derivative follows the geometric-mean convention") {
    CycleSpec s = demo_spec();
    s.central.pi_a = 2;
    s.rho_s = 0.5;  // must stay below lambda^{1/2} ~ 0.707
    const CycleSystem sys = build_model(s);
    const BranchMap b =
        sys.branch({ChartRole::a_phase, 0}, {ChartRole::a_phase, 1});
    CHECK(b.central.slope == Catch::Approx(std::sqrt(0.5)).epsilon(1e-15));
    // both branch steps within the derivative bands
    CHECK(b.central.slope >= std::pow(0.5, 2.0 / 2.0));
    CHECK(b.central.slope <= std::pow(0.5, 1.0 / (2.0 * 2.0)));
}

TEST_CASE("domination violations are named") {
    CycleSpec s;
    s.central.lambda = 0.95;
    s.central.beta = 1.2;
    s.rho_s = 0.96;
    s.rho_u = 2.4;
    CHECK_THROWS_AS(build_model(s), SpecViolationError);
    CHECK_THROWS_WITH(build_model(s), Catch::Matchers::ContainsSubstring("domination"));
}

TEST_CASE("bare stepping") {
    const CycleSystem sys = build_model(demo_spec());

    SECTION("the B saddle is fixed") {
        AmbientPoint p = sys.make_point({ChartRole::b_phase, 0}, 0.0);
        const AmbientPoint q = sys.step(p);
        CHECK(q.chart == ChartId{ChartRole::b_phase, 0});
        CHECK(q.x_c == 0.0);
        CHECK(q.x_s[0] == 0.0);
        CHECK(q.x_u[0] == 0.0);
    }

    SECTION("one A period multiplies the central coordinate by lambda") {
        AmbientPoint p = sys.make_point({ChartRole::a_phase, 0}, -1.0);
        const AmbientPoint q = sys.step(p);
        CHECK(q.chart == ChartId{ChartRole::a_phase, 0});
        CHECK(q.x_c == Catch::Approx(-0.5).margin(1e-15));
    }

    SECTION("the ba corridor lands at central -1 in the A chart") {
        AmbientPoint p = sys.make_point({ChartRole::ba_step, 0}, 1.0);
        AmbientPoint q = sys.step(p);
        CHECK(q.chart == ChartId{ChartRole::ba_step, 1});
        CHECK(q.x_c == 1.0);
        q = sys.step(q);
        CHECK(q.chart == ChartId{ChartRole::a_phase, 0});
        CHECK(q.x_c == -1.0);
        CHECK(q.x_s[0] == 0.0);
        CHECK(q.x_u[0] == 0.0);
    }

    SECTION("missing branches are reported") {
        CHECK_THROWS_AS(sys.branch({ChartRole::a_phase, 0}, {ChartRole::b_phase, 0}),
                        NoBranchError);
    }
}

TEST_CASE("chart metric") {
    const CycleSystem sys = build_model(demo_spec());
    const AmbientPoint p = sys.make_point({ChartRole::b_phase, 0}, 0.25);

    CHECK(sys.distance(p, p) == 0.0);

    AmbientPoint q = p;
    q.x_c = -0.75;
    CHECK(sys.distance(p, q) == Catch::Approx(1e-3 / std::sqrt(3.0)).epsilon(1e-12));

    // opposite box corners stay within 2*chart_radius
    AmbientPoint a = sys.make_point({ChartRole::b_phase, 0}, 1.0);
    a.x_s[0] = 1.0;
    a.x_u[0] = 1.0;
    AmbientPoint b = sys.make_point({ChartRole::b_phase, 0}, -1.0);
    b.x_s[0] = -1.0;
    b.x_u[0] = -1.0;
    CHECK(sys.distance(a, b) <= 2e-3 + 1e-18);

    const AmbientPoint other = sys.make_point({ChartRole::a_phase, 0}, 0.25);
    CHECK(sys.distance(p, other) == 1.0);
}

TEST_CASE("box membership respects the overflow tolerance") {
    CycleSpec s = demo_spec();
    s.overflow_tolerance = 0.25;
    const CycleSystem sys = build_model(s);
    AmbientPoint p = sys.make_point({ChartRole::ba_step, 0}, 1.2);
    CHECK(sys.in_box(p));
    p.x_c = 1.3;
    CHECK_FALSE(sys.in_box(p));
}
