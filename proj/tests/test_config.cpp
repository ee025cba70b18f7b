#include <catch2/catch_amalgamated.hpp>

#include "hetcycle/config.hpp"
#include "hetcycle/report.hpp"

using namespace hetcycle;

TEST_CASE("empty config resolves every default") {
    const RunConfig cfg = parse_config_text("");
    CHECK(cfg.model.central.lambda == 0.95);
    CHECK(cfg.model.central.beta == 1.2);
    CHECK(cfg.model.central.tau == 1);
    CHECK(cfg.model.central.pi_a == 1);
    CHECK(cfg.model.central.pi_b == 1);
    CHECK(cfg.model.central.t_ab == 2);
    CHECK(cfg.model.central.t_ba == 2);
    CHECK(cfg.model.rho_s == Catch::Approx(0.475).margin(1e-15));  // 0.5*lambda
    CHECK(cfg.model.rho_u == Catch::Approx(2.4).margin(1e-15));    // 2*beta
    CHECK(cfg.model.chart_radius == 1e-3);
    CHECK(cfg.model.chart_separation == 1.0);
    CHECK(cfg.tower.C == 320.0);
    CHECK(cfg.tower.halving_ratio == 0.5);
    CHECK(cfg.tower.max_levels == 4);
    CHECK(cfg.verify_eps == std::vector<double>{0.1, 0.05});
    CHECK(cfg.output_format == "json");
}

TEST_CASE("rho defaults track overridden multipliers") {
    const RunConfig cfg = parse_config_text(
        "model.lambda = 0.5\nmodel.beta = 2.0\ntower.require_strict_regime = false\n");
    CHECK(cfg.model.rho_s == Catch::Approx(0.25).margin(1e-15));
    CHECK(cfg.model.rho_u == Catch::Approx(4.0).margin(1e-15));
}

TEST_CASE("validation failures name the key and the constraint") {
    CHECK_THROWS_MATCHES(parse_config_text("tower.C = 100\n"), ConfigValidationError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("311.9")));
    CHECK_THROWS_MATCHES(parse_config_text("tower.halving_ratio = 1.0\n"),
                         ConfigValidationError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("halving_ratio")));
    CHECK_THROWS_MATCHES(parse_config_text("model.flux = 3\n"), ConfigValidationError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("unknown key")));
    // lambda outside the strict regime is rejected for tower use
    CHECK_THROWS_AS(parse_config_text("model.lambda = 0.5\n"), ConfigValidationError);
}

TEST_CASE("parse failures") {
    CHECK_THROWS_AS(parse_config_text("model.lambda 0.95\n"), ConfigParseError);
    CHECK_THROWS_AS(parse_config_text("model.lambda = abc\n"), ConfigParseError);
    CHECK_NOTHROW(parse_config_text("# comment only\n\n  \n"));
}

TEST_CASE("lists and sweep grids") {
    const RunConfig cfg = parse_config_text(
        "verify.eps = 0.2, 0.1\nsweep.model.beta = 1.2, 1.3\nsolve.corbd_k = 4,6\n");
    CHECK(cfg.verify_eps == std::vector<double>{0.2, 0.1});
    REQUIRE(cfg.sweep.count("model.beta") == 1);
    CHECK(cfg.sweep.at("model.beta") == std::vector<std::string>{"1.2", "1.3"});
    CHECK(cfg.corbd_k == std::vector<long>{4, 6});
}

TEST_CASE("config echo serializes the resolved defaults") {
    const RunConfig cfg = parse_config_text("");
    const json j = config_to_json(cfg);
    CHECK(j["model"]["lambda"].get<double>() == 0.95);
    CHECK(j["model"]["rho_s"].get<double>() == Catch::Approx(0.475).margin(1e-15));
    CHECK(j["tower"]["C"].get<double>() == 320.0);
    CHECK(j["verify"]["eps"].size() == 2);
}

TEST_CASE("csv quoting follows the quoting rules") {
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    const std::string f = fmt17(1.0 / 3.0);
    CHECK(f == "0.33333333333333331");
}
