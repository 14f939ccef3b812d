#include <doctest.h>

#include <cmath>

#include "vortexflow/harness.hpp"

using namespace vf;

TEST_CASE("config parses key=value text with comments and overrides") {
    Config cfg = Config::parse("# comment\n"
                               "grid = 64\n"
                               "eps_list = 0.08, 0.04\n"
                               "bc = neumann\n"
                               "grid = 128\n");
    CHECK(cfg.has("grid"));
    CHECK(cfg.get_int("grid", 0) == 128);
    CHECK(cfg.get_string("bc", "") == "neumann");
    std::vector<double> eps = cfg.get_list("eps_list", {});
    REQUIRE(eps.size() == 2);
    CHECK(eps[0] == doctest::Approx(0.08));
    CHECK(eps[1] == doctest::Approx(0.04));
    CHECK_FALSE(cfg.has("missing"));
    CHECK(cfg.get_double("missing", 2.5) == 2.5);
}

TEST_CASE("config points parse semicolon-separated pairs") {
    Config cfg;
    cfg.set("positions", "0.3,0.0; -0.3,0.0");
    std::vector<Vec2> pts = cfg.get_points("positions", {});
    REQUIRE(pts.size() == 2);
    CHECK(pts[0].x == doctest::Approx(0.3));
    CHECK(pts[1].x == doctest::Approx(-0.3));
}

TEST_CASE("config echo and hash are deterministic and order-independent") {
    Config a = Config::parse("beta = 2\nalpha = 1\n");
    Config b = Config::parse("alpha = 1\nbeta = 2\n");
    CHECK(a.echo() == b.echo());
    CHECK(a.fnv_hash() == b.fnv_hash());
    CHECK(a.provenance() == b.provenance());
    CHECK(a.provenance().substr(0, 4) == "cfg-");

    Config c = Config::parse("alpha = 1\nbeta = 3\n");
    CHECK(a.fnv_hash() != c.fnv_hash());
}

TEST_CASE("config getters record the effective values in the echo") {
    Config cfg = Config::parse("grid = 96\n");
    cfg.get_int("grid", 0);
    cfg.get_double("tol", 1e-6); // default should be echoed too
    std::string echo = cfg.echo();
    CHECK(echo.find("grid") != std::string::npos);
    CHECK(echo.find("tol") != std::string::npos);
}

TEST_CASE("table csv serialization is byte-stable") {
    Table t;
    t.columns = {"a", "b"};
    t.rows.push_back({"1", "2.5"});
    t.rows.push_back({"3", "x"});
    std::string csv = t.to_csv();
    CHECK(csv == "a,b\n1,2.5\n3,x\n");
    CHECK(csv == t.to_csv());
}

TEST_CASE("validation suite passes on a fresh build") {
    Config cfg;
    cfg.set("grid", "64"); // reduced grid keeps the suite fast
    ValidationReport rep = validate_all(cfg);
    CHECK(rep.checks.size() >= 10);
    for (const CheckResult& c : rep.checks) {
        INFO(c.name, " measured=", c.measured, " tol=", c.tolerance, " ", c.detail);
        CHECK(c.pass);
    }
    CHECK(rep.all_pass());
    CHECK(rep.to_json().find("\"checks\"") != std::string::npos);
}

TEST_CASE("validation suite catches an injected kernel bias") {
    Config cfg;
    cfg.set("grid", "64");
    cfg.set("kernel_bias", "1e-3");
    ValidationReport rep = validate_all(cfg);
    CHECK_FALSE(rep.all_pass());
    bool gradient_failed = false;
    for (const CheckResult& c : rep.checks)
        if (c.name == "gradient_consistency" && !c.pass) gradient_failed = true;
    CHECK(gradient_failed);
}
