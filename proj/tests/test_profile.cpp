#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>

#include "sepmix/errors.hpp"
#include "sepmix/profile.hpp"

using namespace sepmix;

TEST_CASE("homogeneous profile has unit rates") {
    auto p = build_profile({}, 5);
    CHECK(p.n_sites() == 5);
    CHECK(p.rates() == std::vector<double>{1, 1, 1, 1});
}

TEST_CASE("explicit list is rates, stored as reciprocal resistances") {
    ProfileSpec s;
    s.kind = ProfileKind::explicit_rates;
    s.rates = {2, 0.5, 1};
    auto p = build_profile(s, 4);
    CHECK(p.resistances() == std::vector<double>{0.5, 2, 1});
    for (int x = 1; x < 4; ++x)
        CHECK(std::abs(p.rate(x) * p.resistance(x) - 1) <= 1e-14);
}

TEST_CASE("nonpositive entries are rejected with their index") {
    ProfileSpec s;
    s.kind = ProfileKind::explicit_rates;
    s.rates = {1, 0, 1};
    try {
        build_profile(s, 4);
        FAIL("accepted a zero rate");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("edge 2") != std::string::npos);
    }
    CHECK_THROWS_AS(ConductanceProfile::from_resistances({1.0, -1.0}), ConfigError);
    CHECK_THROWS_AS(ConductanceProfile::from_resistances({}), ConfigError);
}

TEST_CASE("invalid distribution parameters are rejected") {
    ProfileSpec s;
    s.kind = ProfileKind::iid_uniform;
    s.a = -1;
    CHECK_THROWS_AS(build_profile(s, 10), ConfigError);
    s.kind = ProfileKind::iid_discrete;
    s.values = {1, 2};
    s.probs = {0.5, 0.4};
    CHECK_THROWS_AS(build_profile(s, 10), ConfigError);
    s.kind = ProfileKind::one_slow_bond;
    s.slow_position = 10;
    CHECK_THROWS_AS(build_profile(s, 10), ConfigError);
    CHECK_THROWS_AS(build_profile({}, 1), ConfigError);
}

TEST_CASE("random profiles are reproducible and seed-dependent") {
    ProfileSpec s;
    s.kind = ProfileKind::iid_uniform;
    s.seed = 42;
    auto a = build_profile(s, 300), b = build_profile(s, 300);
    CHECK(a.resistances() == b.resistances());
    s.seed = 43;
    CHECK(build_profile(s, 300).resistances() != a.resistances());
    for (double r : a.resistances())
        CHECK((r >= 0.5 && r <= 1.5));
}

TEST_CASE("prefix of a random profile does not depend on N") {
    ProfileSpec s;
    s.kind = ProfileKind::iid_uniform;
    auto a = build_profile(s, 64), b = build_profile(s, 1024);
    CHECK(std::equal(a.resistances().begin(), a.resistances().end(), b.resistances().begin()));
}

TEST_CASE("iid-discrete draws only the listed values with roughly the right weights") {
    ProfileSpec s;
    s.kind = ProfileKind::iid_discrete;
    s.values = {0.5, 2.0};
    s.probs = {0.75, 0.25};
    auto p = build_profile(s, 20001);
    double hi = 0;
    for (double r : p.resistances()) {
        CHECK((r == 0.5 || r == 2.0));
        hi += r == 2.0;
    }
    double frac = hi / 20000, se = std::sqrt(0.25 * 0.75 / 20000);
    CHECK(std::abs(frac - 0.25) <= 4 * se);
}

TEST_CASE("one slow bond") {
    ProfileSpec s;
    s.kind = ProfileKind::one_slow_bond;
    s.slow_position = 3;
    s.slow_resistance = 7;
    auto p = build_profile(s, 6);
    CHECK(p.resistances() == std::vector<double>{1, 1, 7, 1, 1});
}

TEST_CASE("normalize divides by the empirical mean") {
    ProfileSpec s;
    s.kind = ProfileKind::iid_uniform;
    s.a = 1;
    s.b = 3;
    s.normalize = true;
    auto p = build_profile(s, 101);
    double mean = std::accumulate(p.resistances().begin(), p.resistances().end(), 0.0) / 100;
    CHECK(mean == doctest::Approx(1).epsilon(1e-13));
}

TEST_CASE("law of large numbers discrepancy") {
    auto rep = check_assumptions(ConductanceProfile::homogeneous(100), 50);
    CHECK(rep.lln_discrepancy == 0);
    CHECK(rep.min_resistance == 1);
    CHECK(rep.max_resistance == 1);

    auto twos = ConductanceProfile::from_resistances(std::vector<double>(10, 2.0));
    CHECK(check_assumptions(twos, 5).lln_discrepancy == doctest::Approx(10.0 / 11).epsilon(1e-14));

    ProfileSpec s;
    s.kind = ProfileKind::iid_uniform;
    s.seed = 2024;
    CHECK(check_assumptions(build_profile(s, 10000), 5000).lln_discrepancy < 0.05);
}

TEST_CASE("assumption report: k range and particle-hole symmetry") {
    auto p = ConductanceProfile::homogeneous(10);
    CHECK_THROWS_AS(check_assumptions(p, 10), ConfigError);
    CHECK_THROWS_AS(check_assumptions(p, 0), ConfigError);
    ProfileSpec s;
    s.kind = ProfileKind::iid_uniform;
    auto q = build_profile(s, 40);
    auto a = check_assumptions(q, 7), b = check_assumptions(q, 33);
    CHECK(a.lln_discrepancy == b.lln_discrepancy);
    CHECK(a.max_resistance == b.max_resistance);
    CHECK(a.min_resistance == b.min_resistance);
    CHECK(a.upsilon_margin == b.upsilon_margin);
    AssumptionParams params;
    params.rho = 0.5;
    params.c_rho = 1;
    CHECK(check_assumptions(p, 4, params).k_range_ok);
    CHECK_FALSE(check_assumptions(p, 2, params).k_range_ok);
    CHECK_FALSE(check_assumptions(p, 6, params).k_range_ok);
}

TEST_CASE("profile file roundtrip keeps resistances exactly") {
    ProfileSpec s;
    s.kind = ProfileKind::iid_uniform;
    auto p = build_profile(s, 17);
    auto dir = std::filesystem::temp_directory_path() / "sepmix_profile_test";
    auto path = (dir / "p.json").string();
    save_profile(p, path);
    CHECK(load_profile(path).resistances() == p.resistances());
    CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
    CHECK_THROWS_AS(profile_from_json(nlohmann::json{{"n_sites", 3}, {"resistances", {1.0}}}), ConfigError);
    CHECK_THROWS_AS(profile_from_json(nlohmann::json{{"n_sites", 3}, {"resistances", {1.0, -1.0}}}), ConfigError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("kind names") {
    for (auto k : {ProfileKind::homogeneous, ProfileKind::iid_uniform, ProfileKind::iid_discrete,
                   ProfileKind::explicit_rates, ProfileKind::one_slow_bond})
        CHECK(parse_profile_kind(to_string(k)) == k);
    CHECK_THROWS_AS(parse_profile_kind("gaussian"), ConfigError);
}
