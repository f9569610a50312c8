#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lemult/errors.hpp"
#include "lemult/report.hpp"
#include "lemult/verifier.hpp"

using namespace lemult;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const auto p = fs::temp_directory_path() / ("lemult_test_report_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string error_of(const std::string& text)
{
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

RunConfig quick(Mode m, const std::string& dir)
{
    RunConfig c;
    c.mode = m;
    c.grid_points = 128;
    c.refine = 0;
    c.out_dir = scratch(dir);
    return c;
}

}  // namespace

TEST_CASE("empty config gives the defaults")
{
    const auto c = parse_config("");
    CHECK(c.d == std::vector<int>{1});
    CHECK(c.r_s == 1.0);
    CHECK(c.eps == 0.05);
    CHECK(c.delta == 0.1);
    CHECK(c.delta0 == 0.1);
    CHECK_FALSE(c.alpha.has_value());
    CHECK(c.mode == Mode::all);
}

TEST_CASE("sectioned config is read")
{
    const auto c = parse_config(
        "mode = verify\nseed = 7\n; comment\n[background]\nd = 1,3-5\nr_s = 2\n[multiplier]\neps = 0.04\n"
        "alpha = 6\n[evolution]\ndata = outgoing\nells = 3\ntrack_identity = yes\n[output]\ndir = /tmp/x\n");
    CHECK(c.mode == Mode::verify);
    CHECK(c.seed == 7);
    CHECK(c.d == std::vector<int>{1, 3, 4, 5});
    CHECK(c.r_s == 2.0);
    CHECK(c.eps == 0.04);
    CHECK(c.alpha == 6.0);
    CHECK(c.kinds == std::vector<DataKind>{DataKind::outgoing});
    CHECK(c.ells == std::vector<int>{3});
    CHECK(c.track_identity);
    CHECK(c.out_dir == fs::path("/tmp/x"));
}

TEST_CASE("validation lists every violated precondition")
{
    const auto one = error_of("[background]\nd = 0\n");
    CHECK(one.find("d = 0") != std::string::npos);
    const auto two = error_of("[multiplier]\ndelta = 1.5\n");
    CHECK(two.find("delta = 1.5") != std::string::npos);
    const auto both = error_of("[background]\nd = 0\n[multiplier]\ndelta = 1.5\neps = -1\n");
    CHECK(both.find("d = 0") != std::string::npos);
    CHECK(both.find("delta = 1.5") != std::string::npos);
    CHECK(both.find("eps = -1") != std::string::npos);
    CHECK(error_of("[evolution]\ndt = 0.04\n").find("CFL") != std::string::npos);
}

TEST_CASE("parse errors point at the line or the field")
{
    CHECK(error_of("[background]\nd = 1\nd = 2\n").find("line 3") != std::string::npos);
    CHECK(error_of("mode = all\n[scan\n").find("line 2") != std::string::npos);
    CHECK(error_of("[scan]\ngridpoints = 5\n").find("[scan] gridpoints: unknown key") != std::string::npos);
    CHECK(error_of("[scan]\ngrid_points = many\n").find("[scan] grid_points") != std::string::npos);
    CHECK(error_of("[scan]\ngrid_points = -3\n").find("[scan] grid_points") != std::string::npos);
    CHECK(error_of("[nope]\nx = 1\n").find("[nope]") != std::string::npos);
    CHECK(error_of("mode = sideways\n").find("mode") != std::string::npos);
    CHECK(error_of("[evolution]\ndata = ingoing\n").find("ingoing") != std::string::npos);
    CHECK(error_of("[background]\nd = 3-1\n").find("[background] d") != std::string::npos);
}

TEST_CASE("int lists")
{
    CHECK(parse_int_list("1-7") == std::vector<int>{1, 2, 3, 4, 5, 6, 7});
    CHECK(parse_int_list(" 2, 5 ,1") == std::vector<int>{2, 5, 1});
    CHECK_THROWS_AS(parse_int_list(""), ConfigError);
    CHECK_THROWS_AS(parse_int_list("a"), ConfigError);
}

TEST_CASE("canonical text round-trips and the hash tracks it")
{
    RunConfig c;
    c.eps = 0.1 / 3.0;
    c.alpha = 5.5;
    c.d = {2, 4};
    c.kinds = {DataKind::outgoing};
    const auto text = config_text(c);
    const auto back = parse_config(text);
    CHECK(config_text(back) == text);
    CHECK(back.eps == c.eps);
    CHECK(config_hash(back) == config_hash(c));
    CHECK(config_hash(c).size() == 16);
    c.eps = 0.05;
    CHECK(config_hash(back) != config_hash(c));
    // output location does not enter the hash
    auto moved = back;
    moved.out_dir = "/elsewhere";
    CHECK(config_hash(moved) == config_hash(back));
}

TEST_CASE("verify writes CSVs and a deterministic summary")
{
    auto c = quick(Mode::verify, "verify_a");
    const auto a = run(c);
    CHECK(a.exit_code == kExitOk);
    CHECK(a.failures.empty());
    const auto csv = slurp(c.out_dir / "verify" / "d1_case1.csv");
    CHECK(csv.rfind("r,value,margin\n", 0) == 0);
    CHECK(csv.find('\r') == std::string::npos);

    const auto j = nlohmann::json::parse(slurp(c.out_dir / "summary.json"));
    CHECK(j["config_hash"] == config_hash(c));
    CHECK(j["passed"] == true);
    CHECK(j["verify"].size() >= 10);
    CHECK(!j.contains("timestamp"));
    CHECK(nlohmann::json::parse(slurp(c.out_dir / "run_info.json")).contains("timestamp"));

    // summary values read back bit for bit
    const auto bg = c.background(1);
    const auto mp = c.multiplier(bg);
    const auto v = verify_case(CaseId::case1, bg, mp, grid_for_case(CaseId::case1, bg, mp, 128), {0, false});
    CHECK(j["verify"][0]["min_margin"].get<double>() == v.min_margin);

    // same config, other directory and thread count: same bytes
    c.out_dir = scratch("verify_b");
    c.threads = 1;
    const auto b = run(c);
    CHECK(b.summary == a.summary);

    // the emitted config reproduces the run
    auto again = load_config(fs::path(scratch("unused")).parent_path() / "lemult_test_report_verify_a" / "config.ini");
    again.out_dir = scratch("verify_c");
    CHECK(run(again).summary == a.summary);
}

TEST_CASE("all dimensions pass verify")
{
    auto c = quick(Mode::verify, "verify_all_d");
    c.d = parse_int_list("1-7");
    const auto r = run(c);
    CHECK(r.exit_code == kExitOk);
    CHECK(nlohmann::json::parse(r.summary)["verify"].size() == 7 * scan_cases().size());
}

TEST_CASE("alpha = 6 fails with the witness named")
{
    auto c = quick(Mode::verify, "alpha6");
    c.alpha = 6.0;
    const auto r = run(c);
    CHECK(r.exit_code == kExitCheckFailed);
    bool named = false;
    for (const auto& f : r.failures) {
        named = named || f.find("case4_fprime d=1") != std::string::npos;
    }
    CHECK(named);
    const auto j = nlohmann::json::parse(r.summary);
    CHECK(j["passed"] == false);
    CHECK(j["exit_code"] == kExitCheckFailed);
}

TEST_CASE("budget: defaults pass, eps = 0.5 fails")
{
    auto c = quick(Mode::budget, "budget");
    c.grid_points = 256;
    CHECK(run(c).exit_code == kExitOk);
    c.eps = 0.5;
    c.out_dir = scratch("budget_bad");
    CHECK(run(c).exit_code == kExitCheckFailed);
}

TEST_CASE("evolve: zero data gives a zero series")
{
    auto c = quick(Mode::evolve, "evolve_zero");
    c.amplitude = 0.0;
    c.rstar_lo = -40.0;
    c.rstar_hi = 40.0;
    c.spacing = 0.1;
    c.dt = 0.05;
    c.t_final = 10.0;
    c.ells = {1};
    const auto r = run(c);
    CHECK(r.exit_code == kExitOk);
    const auto j = nlohmann::json::parse(r.summary);
    REQUIRE(j["evolve"].size() == 2);
    for (const auto& s : j["evolve"]) {
        CHECK(s["e0"] == 0.0);
        CHECK(s["le_final"] == 0.0);
        CHECK(s["passed"] == true);
    }
    const auto csv = slurp(c.out_dir / "evolve" / "d1_l1_static.csv");
    CHECK(csv.rfind("t,energy,le_accum\n", 0) == 0);
    CHECK(csv.find("10,0,0\n") != std::string::npos);
}

TEST_CASE("evolve: contamination is a failed check")
{
    auto c = quick(Mode::evolve, "evolve_short");
    c.rstar_lo = -40.0;
    c.rstar_hi = 40.0;
    c.spacing = 0.1;
    c.dt = 0.05;
    c.t_final = 60.0;
    c.ells = {0};
    c.kinds = {DataKind::outgoing};
    const auto r = run(c);
    CHECK(r.exit_code == kExitCheckFailed);
    REQUIRE(r.failures.size() == 1);
    CHECK(r.failures[0].find("contamination") != std::string::npos);
}

TEST_CASE("exit codes for config problems")
{
    auto c = quick(Mode::verify, "bad");
    c.delta = 2.0;
    const auto r = run(c);
    CHECK(r.exit_code == kExitConfig);
    CHECK(nlohmann::json::parse(r.summary).contains("error"));
    // data that does not fit the grid is a precondition failure, not a crash
    auto e = quick(Mode::evolve, "bad_data");
    e.rstar_lo = -20.0;
    e.rstar_hi = 20.0;
    e.spacing = 0.1;
    e.dt = 0.05;
    e.width = 15.0;
    CHECK(run(e).exit_code == kExitConfig);
}

TEST_CASE("hardy scan reports")
{
    auto c = quick(Mode::hardy, "hardy");
    c.hardy_bumps = 8;
    const auto r = run(c);
    CHECK(r.exit_code == kExitOk);
    const auto j = nlohmann::json::parse(r.summary);
    CHECK(j["hardy"][0]["family_ratio"].get<double>() < 10.0);
    CHECK(slurp(c.out_dir / "hardy" / "d1.csv").rfind("r,value,margin\n", 0) == 0);
}
