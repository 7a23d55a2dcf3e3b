#include <doctest.h>

#include <bit>
#include <cmath>

#include "sepmix/errors.hpp"
#include "sepmix/estimators.hpp"
#include "sepmix/exact.hpp"
#include "sepmix/spectral.hpp"

using namespace sepmix;

namespace {

ConductanceProfile test_profile(int n, std::uint64_t seed = 17) {
    ProfileSpec s;
    s.kind = ProfileKind::iid_uniform;
    s.seed = seed;
    return build_profile(s, n);
}

}  // namespace

TEST_CASE("Welford against two-pass") {
    std::vector<double> xs{3, 1, 4, 1, 5, 9, 2, 6};
    Welford w;
    double m = 0;
    for (double x : xs) {
        w.add(x);
        m += x;
    }
    m /= xs.size();
    double v = 0;
    for (double x : xs)
        v += (x - m) * (x - m);
    v /= xs.size() - 1;
    CHECK(w.mean() == doctest::Approx(m));
    CHECK(w.variance() == doctest::Approx(v));
    CHECK(w.se() == doctest::Approx(std::sqrt(v / 8)));
}

TEST_CASE("replica results do not depend on the thread count") {
    auto p = test_profile(12);
    auto a = coalescence_times(p, 6, 24, 5, 0, 1);
    auto b = coalescence_times(p, 6, 24, 5, 0, 3);
    CHECK(a.T == b.T);
    auto sq = run_replicas(100, 4, [](std::size_t i) { return i * i; });
    for (std::size_t i = 0; i < 100; ++i)
        CHECK(sq[i] == i * i);
}

TEST_CASE("two-phase marginals against enumeration") {
    for (auto [n, k] : {std::pair{8, 2}, std::pair{10, 3}, std::pair{12, 6}}) {
        std::vector<double> want(n, 0);
        double count = 0;
        for (std::uint64_t m = 0; m < (1ULL << n); ++m) {
            if (std::popcount(m) != 2 * k)
                continue;
            count += 1;
            int kept = 0;
            for (int x = 1; x <= n && kept < k; ++x)
                if ((m >> (x - 1)) & 1) {
                    want[x - 1] += 1;
                    ++kept;
                }
        }
        auto got = two_phase_marginals(n, k);
        double tot = 0;
        for (int x = 0; x < n; ++x) {
            CHECK(got[x] == doctest::Approx(want[x] / count).epsilon(1e-12).scale(1e-15));
            tot += got[x];
        }
        CHECK(tot == doctest::Approx(k));
    }
    Stream rng(1, Tag::two_phase, 0);
    CHECK_THROWS_AS(sample_two_phase(10, 6, rng), ConfigError);
}

TEST_CASE("two-phase samples have the marginals") {
    const int n = 16, k = 3, reps = 40000;
    auto marg = two_phase_marginals(n, k);
    std::vector<double> hits(n, 0);
    for (int i = 0; i < reps; ++i) {
        auto occ = draw_start(n, k, StartKind::two_phase, 4, i);
        int c = 0;
        for (int x = 1; x <= n; ++x) {
            hits[x - 1] += occ[x];
            c += occ[x];
        }
        REQUIRE(c == k);
    }
    for (int x = 0; x < n; ++x) {
        double se = std::sqrt(std::max(marg[x] * (1 - marg[x]), 1e-9) / reps);
        CHECK(std::abs(hits[x] / reps - marg[x]) <= 5 * se);
    }
}

TEST_CASE("two-phase covariance: exact vs Monte Carlo, diagonal, bound") {
    auto ex = two_phase_covariance_audit(12, 1, CovarianceMode::exact, 1);
    auto mc = two_phase_covariance_audit(12, 1, CovarianceMode::mc, 1, 200000);
    double z = 0;
    for (std::size_t i = 0; i < ex.cov.size(); ++i)
        if (mc.cov_se[i] > 0)
            z = std::max(z, std::abs(ex.cov[i] - mc.cov[i]) / mc.cov_se[i]);
    CHECK(z < 5);
    auto e2 = two_phase_covariance_audit(12, 3, CovarianceMode::exact, 1);
    CHECK(e2.diag_sum <= 3 + 1e-12);
    CHECK(e2.sum_abs_cov <= e2.bound);
    CHECK(e2.bound == doctest::Approx(4096 * std::pow(3.0, 1.9)));
    CHECK_THROWS_AS(two_phase_covariance_audit(40, 10, CovarianceMode::exact, 1, 1000, 0.1, 1000), CapacityError);
}

TEST_CASE("start kinds") {
    for (auto s : {StartKind::wedge, StartKind::vee, StartKind::two_phase, StartKind::stationary})
        CHECK(parse_start_kind(to_string(s)) == s);
    auto w = draw_start(6, 2, StartKind::wedge, 1, 0);
    CHECK(std::vector<std::uint8_t>(w.begin() + 1, w.begin() + 7) == std::vector<std::uint8_t>{1, 1, 0, 0, 0, 0});
    auto v = draw_start(6, 2, StartKind::vee, 1, 0);
    CHECK(std::vector<std::uint8_t>(v.begin() + 1, v.begin() + 7) == std::vector<std::uint8_t>{0, 0, 0, 0, 1, 1});
    CHECK(draw_start(9, 4, StartKind::stationary, 3, 7) == draw_start(9, 4, StartKind::stationary, 3, 7));
}

TEST_CASE("Wilson: mean follows the exponential law, stationary mean is zero") {
    auto p = test_profile(16, 2);
    WilsonOptions o;
    o.replicas = 20000;
    o.seed = 3;
    o.grid = {0.0, 5.0, 20.0, 60.0};
    auto r = wilson_lower_estimate(p, 8, o);
    REQUIRE(r.points.size() == 4);
    for (const auto& pt : r.points)
        CHECK(std::abs(pt.mean - pt.exact_mean) <= 4.5 * pt.se + 1e-12);
    CHECK(std::abs(r.stationary_mean) <= 4.5 * r.stationary_se);
    CHECK(r.lambda1 == doctest::Approx(solve_neumann(p, 1).eigenvalues[1]));
}

TEST_CASE("Wilson standard error scales like replicas^-1/2") {
    auto p = test_profile(12, 2);
    WilsonOptions o;
    o.grid = {10.0};
    o.replicas = 2000;
    double se1 = wilson_lower_estimate(p, 6, o).points[0].se;
    o.replicas = 8000;
    double se4 = wilson_lower_estimate(p, 6, o).points[0].se;
    CHECK(se1 / se4 == doctest::Approx(2).epsilon(0.15));
}

TEST_CASE("Wilson estimate is below the exact mixing time") {
    auto p = ConductanceProfile::homogeneous(8);
    auto ch = build_chain(p, 4);
    std::vector<double> g;
    for (int i = 0; i <= 120; ++i)
        g.push_back(0.5 * i);
    const double tmix = mixing_time(ch, tv_curve(ch, Starts::extremal, g), 0.25);
    WilsonOptions o;
    o.replicas = 4000;
    auto r = wilson_lower_estimate(p, 4, o);
    const double step = r.points.size() > 1 ? r.points[1].t - r.points[0].t : 0;
    CHECK(r.estimate <= tmix + step);
    CHECK(r.estimate > 0);
}

TEST_CASE("coalescence summary") {
    auto p = test_profile(10);
    auto s = coalescence_times(p, 5, 400, 8);
    CHECK(s.T.size() == 400);
    CHECK(std::is_sorted(s.T.begin(), s.T.end()));
    CHECK(s.survival(0) == 1);
    CHECK(s.survival(s.T.back()) == 0);
    double q = s.quantile_upper(0.25);
    CHECK(s.survival(q) <= 0.25);
    CHECK(s.survival(q * (1 - 1e-12)) > 0.25);
    auto c = coalescence_times(p, 5, 50, 8, 1e-3);
    CHECK(c.censored == 50);
    CHECK(std::isinf(c.quantile_upper(0.25)));
}

TEST_CASE("coalescence dominates total variation") {
    auto p = test_profile(8, 4);
    auto ch = build_chain(p, 4);
    auto s = coalescence_times(p, 4, 4000, 2);
    std::vector<double> g{1, 4, 10, 20, 40};
    auto curve = tv_curve(ch, Starts::extremal, g);
    for (std::size_t i = 0; i < g.size(); ++i)
        CHECK(curve.d[i] <= s.survival(g[i]) + 3 * s.survival_se(g[i]) + 1e-12);
}

TEST_CASE("bracket") {
    auto p = test_profile(16, 3);
    auto z = bracket_variance(p, 8, 0.0, StartKind::wedge, 10, 1);
    CHECK(z.jumps.value == 0);
    CHECK(z.direct.value == 0);
    for (auto prof : {ConductanceProfile::homogeneous(16), p}) {
        auto r = bracket_variance(prof, 8, 15.0, StartKind::wedge, 400, 2);
        CHECK(r.direct.value <= r.bound.value + 3 * r.direct.stderr_);
        CHECK(r.bound.value <= r.bound_trivial + 1e-9);
        CHECK(std::abs(r.jumps.value - r.compensator.value) <=
              4 * std::hypot(r.jumps.stderr_, r.compensator.stderr_));
    }
}

TEST_CASE("area audit") {
    auto p = test_profile(32, 5);
    AreaOptions same;
    same.mu_at_wedge = true;
    same.grid_points = 4;
    auto z = area_supermartingale_audit(p, 16, 20.0, 10, 1, same);
    CHECK(z.h0_nonzero == 0);
    for (double a : z.mean_A)
        CHECK(a == 0);

    AreaOptions o;
    o.grid_points = 5;
    auto r = area_supermartingale_audit(p, 16, 0.5 / solve_extended(p, 0.5).lambda_bar1, 400, 2, o);
    CHECK(r.negative_events == 0);
    CHECK(r.coalesced_nonzero == 0);
    CHECK(r.events_checked > 0);
    CHECK(r.decay_ok());
    CHECK(r.mean_A[0] > 0);
}

TEST_CASE("stationary monotone runs are short") {
    auto e = stationary_q_exceedance(64, 32, 2000, 3);
    CHECK(e.value < 1e-2);
}

TEST_CASE("heat mean") {
    auto p = test_profile(16, 6);
    auto r0 = heat_mean_check(p, 8, 0.0, 10, 1);
    CHECK(r0.max_abs_dev < 1e-12);
    auto r = heat_mean_check(p, 8, 6.0, 20000, 2);
    CHECK(r.within_4sigma);
    CHECK(r.max_z < 4);
    CHECK(r.envelope_ok);
    auto p32 = test_profile(32, 6);
    for (double t : {1.0, 50.0, 400.0}) {
        auto h = heat_solution(p32, height_of(extremal(32, 16, Extremal::max)), t);
        double mx = 0;
        for (double v : h)
            mx = std::max(mx, std::abs(v));
        CHECK(mx <= heat_envelope(p32, 16, t));
    }
}
