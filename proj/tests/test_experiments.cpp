#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sepmix/errors.hpp"
#include "sepmix/experiments.hpp"
#include "sepmix/io.hpp"

using namespace sepmix;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    auto d = fs::temp_directory_path() / ("sepmix_exp_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(SEPMIX_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config parsing") {
    auto c = config_from_json(json::parse(R"({
        "profile": {"kind": "iid-uniform", "a": 0.8, "b": 1.2, "seed": 9},
        "n_ladder": [16, 32], "k_rule": {"kind": "power", "rho": 0.5, "c_rho": 2},
        "eps": [0.1, 0.25], "replicas": {"wilson": 50, "coalescence": 20}, "seed": 4
    })"));
    CHECK(c.profile.kind == ProfileKind::iid_uniform);
    CHECK(c.profile.a == 0.8);
    CHECK(c.n_ladder == std::vector<int>{16, 32});
    CHECK(c.k_rule == KRule::power);
    CHECK(k_for(c, 16) == 8);
    CHECK(k_for(c, 32) == 12);
    CHECK(c.wilson_replicas == 50);
    CHECK(c.coalescence_replicas == 20);
    auto back = config_from_json(config_to_json(c));
    CHECK(config_to_json(back) == config_to_json(c));

    auto half = config_from_json(json::parse(R"({"k_rule": "half", "replicas": 7})"));
    CHECK(k_for(half, 9) == 4);
    CHECK(half.wilson_replicas == 7);
    CHECK(half.coalescence_replicas == 7);
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(config_from_json(json::array()), ConfigError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"n_ladder": [32, 16]})")), ConfigError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"n_ladder": []})")), ConfigError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"eps": [1.5]})")), ConfigError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"k_rule": "third"})")), ConfigError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"seed": "x"})")), ConfigError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"profile": {"kind": "nope"}})")), ConfigError);
    auto fixed = config_from_json(json::parse(R"({"k_rule": {"kind": "fixed", "k": 9}})"));
    CHECK_THROWS_AS(k_for(fixed, 8), ConfigError);
}

TEST_CASE("profile file must match the ladder") {
    auto d = scratch("pf");
    save_profile(ConductanceProfile::homogeneous(10), (d / "p.json").string());
    ExperimentConfig c;
    c.profile_file = (d / "p.json").string();
    CHECK(profile_for(c, 10).n_sites() == 10);
    CHECK_THROWS_AS(profile_for(c, 12), ConfigError);
    fs::remove_all(d);
}

TEST_CASE("manifest") {
    json cfg{{"n", 8}};
    auto m = make_manifest("spectrum", cfg, {1, 2}, {"eigenvalues.csv"});
    CHECK(m["command"] == "spectrum");
    CHECK(m["config"] == cfg);
    CHECK(m["config_hash"].get<std::string>().size() == 16);
    CHECK(m["csv_schema_version"] == "1");
    CHECK(m["seeds"].size() == 2);
    CHECK(m.contains("git_rev"));
    CHECK(make_manifest("x", cfg, {}, {})["config_hash"] == m["config_hash"]);
}

TEST_CASE("atomic writes and csv quoting") {
    auto d = scratch("io");
    auto path = (d / "a.csv").string();
    CsvTable t({"name", "detail"});
    t.row().cell("x").cell("a, \"b\"");
    t.save(path);
    CHECK(slurp(path) == "name,detail\nx,\"a, \"\"b\"\"\"\n");
    CHECK_FALSE(fs::exists(path + ".tmp"));
    fs::remove_all(d);
}

TEST_CASE("tiny cutoff run brackets the exact mixing time") {
    auto d = scratch("cutoff");
    ExperimentConfig c;
    c.n_ladder = {8, 10};
    c.wilson_replicas = 400;
    c.coalescence_replicas = 400;
    c.out_dir = d.string();
    int rows = 0;
    auto rep = run_cutoff_profile(c, [&](const CutoffRow&) { ++rows; });
    CHECK(rows == 2);
    REQUIRE(rep.rows.size() == 2);
    CHECK(rep.bracket_ok());
    for (const auto& r : rep.rows) {
        REQUIRE(r.exact_tmix.has_value());
        CHECK(r.lower <= *r.exact_tmix * 1.1);
        CHECK(r.upper >= *r.exact_tmix);
        if (r.n * c.delta < 1)
            CHECK(std::isnan(r.pred_extended));
        else
            CHECK(r.pred_extended >= r.pred_gap);
    }
    auto csv = slurp(d / "cutoff.csv");
    CHECK(csv.rfind(cutoff_csv_header(), 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    fs::remove_all(d);
}

TEST_CASE("fast verification suite passes") {
    auto res = run_verify({});
    CHECK(res.size() >= 10);
    for (const auto& r : res) {
        INFO(r.name << ": " << r.detail);
        CHECK(r.passed);
    }
}

TEST_CASE("command line exit codes and outputs") {
    auto d = scratch("cli");
    const std::string out = " --out " + d.string();
    CHECK(run_cli("spectrum -n 8 --delta 0.25" + out) == 0);
    for (auto f : {"eigenvalues.csv", "eigenfunctions.csv", "extended.csv", "manifest.json", "profile.json"})
        CHECK(fs::exists(d / f));
    auto man = json::parse(slurp(d / "manifest.json"));
    CHECK(man["command"] == "spectrum");

    CHECK(run_cli("spectrum -n 1" + out) == 4);
    CHECK(run_cli("nonsense") == 4);
    CHECK(run_cli("mix-exact -n 40 -k 20" + out) == 3);
    CHECK(run_cli("mix-exact -n 8 -k 4 --t-max 40 --points 40" + out) == 0);
    CHECK(fs::exists(d / "mixing_curve.csv"));
    CHECK(run_cli("estimate --what heat -n 8 -k 4 -t 1 --replicas 200" + out) == 0);
    CHECK(fs::exists(d / "estimate.csv"));

    std::ofstream(d / "bad.json") << R"({"n_sites": 3, "resistances": [1.0, -2.0]})";
    CHECK(run_cli("verify fast --profile " + (d / "bad.json").string() + out) == 2);
    fs::remove_all(d);
}
