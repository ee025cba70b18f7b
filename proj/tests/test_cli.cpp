#include <catch2/catch_amalgamated.hpp>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

const std::string kCli = HETCYCLE_CLI_PATH;
const std::string kDir = HETCYCLE_TEST_DIR;

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run(const std::string& args) {
    const std::string out_file = kDir + "/cli_stdout.txt";
    const std::string cmd = kCli + " " + args + " > " + out_file + " 2> " + kDir +
                            "/cli_stderr.txt";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WEXITSTATUS(status);
    std::ifstream in(out_file, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    r.out = os.str();
    return r;
}

std::string write_config(const std::string& name, const std::string& text) {
    const std::string path = kDir + "/" + name;
    std::ofstream out(path);
    out << text;
    return path;
}

}  // namespace

TEST_CASE("solve runs on defaults") {
    const auto r = run("solve --no-timing");
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["nu_table"].size() == 100);
    for (const auto& row : j["nu_table"])
        CHECK(row["closing_residual"].get<double>() < 1e-12);
    CHECK(j["corbd_table"].size() == 6);
}

TEST_CASE("empty solve grid exits cleanly") {
    const std::string cfg = write_config("empty_grid.cfg",
                                         "solve.l_min = 5\nsolve.l_max = 4\n"
                                         "solve.m_min = 5\nsolve.m_max = 4\n");
    const auto r = run("solve --no-timing --config " + cfg);
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["nu_table"].empty());
}

TEST_CASE("configuration exit codes") {
    const std::string bad_c = write_config("bad_c.cfg", "tower.C = 100\n");
    CHECK(run("build-tower --config " + bad_c).exit_code == 65);

    const std::string bad_syntax = write_config("bad_syntax.cfg", "tower.C 320\n");
    CHECK(run("build-tower --config " + bad_syntax).exit_code == 64);

    const std::string unknown = write_config("unknown.cfg", "tower.depth = 9\n");
    CHECK(run("build-tower --config " + unknown).exit_code == 65);
}

TEST_CASE("zero levels is a no-op build") {
    const auto r = run("build-tower --levels 0 --no-timing");
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["levels"].empty());
}

TEST_CASE("infeasible search exits with the margin ledger") {
    const std::string cfg = write_config("starved.cfg", "tower.m_max = 1\n");
    const auto r = run("build-tower --no-timing --config " + cfg);
    CHECK(r.exit_code == 2);
}

TEST_CASE("build, verify and determinism") {
    const std::string art1 = kDir + "/tower1.json";
    const std::string art2 = kDir + "/tower2.json";
    REQUIRE(run("build-tower --no-timing --out " + art1).exit_code == 0);
    REQUIRE(run("build-tower --no-timing --out " + art2).exit_code == 0);

    // byte-identical reports under identical configuration
    std::ifstream f1(art1, std::ios::binary), f2(art2, std::ios::binary);
    std::ostringstream s1, s2;
    s1 << f1.rdbuf();
    s2 << f2.rdbuf();
    REQUIRE(s1.str() == s2.str());
    CHECK(s1.str().find("\"timing\"") == std::string::npos);

    // verify accepts the artifact it just built
    const auto v = run("verify --no-timing --tower " + art1);
    CHECK(v.exit_code == 0);

    // a tampered gamma trips the gap-bound condition
    auto tampered = nlohmann::json::parse(s1.str());
    tampered["levels"][1]["gamma"] = 1.0;
    const std::string bad = kDir + "/tower_bad.json";
    std::ofstream bo(bad);
    bo << tampered.dump(2);
    bo.close();
    const auto vb = run("verify --no-timing --tower " + bad);
    CHECK(vb.exit_code == 3);

    // report re-emission round-trips
    const auto rr = run("report " + art1 + " --no-timing --format csv");
    CHECK(rr.exit_code == 0);
    CHECK(rr.out.find("n,l,m,period") == 0);
}

TEST_CASE("verify without an artifact builds in process") {
    const auto r = run("verify --no-timing");
    CHECK(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["verification"]["passed"].get<bool>());
}

TEST_CASE("sweep emits one cell per grid point") {
    const std::string cfg = write_config(
        "sweep.cfg", "sweep.tower.levels = 1, 2\nverify.eps = 0.45\n");
    const auto r = run("sweep --no-timing --config " + cfg);
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    REQUIRE(j["cells"].size() == 2);
    CHECK(j["cells"][0]["overrides"]["tower.levels"] == "1");
    CHECK(j["cells"][1]["overrides"]["tower.levels"] == "2");
}

TEST_CASE("plot data companions") {
    const std::string base = kDir + "/plots.json";
    REQUIRE(run("build-tower --no-timing --levels 2 --emit-plot-data --out " + base).exit_code ==
            0);
    std::ifstream chi(base + "_chi.csv");
    REQUIRE(chi.good());
    std::string header;
    std::getline(chi, header);
    CHECK(header == "n,chi,period");
}
