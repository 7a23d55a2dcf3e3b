// The verification suite behind `sepmix verify`. Each check is a small,
// self-contained invariant test; the full suite widens the sizes.
#include <chrono>
#include <cmath>
#include <sstream>

#include "sepmix/errors.hpp"
#include "sepmix/estimators.hpp"
#include "sepmix/exact.hpp"
#include "sepmix/experiments.hpp"
#include "sepmix/spectral.hpp"

namespace sepmix {

namespace {

using Outcome = std::pair<bool, std::string>;

std::string num(double v) {
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

ConductanceProfile random_profile(std::uint64_t seed, int n) {
    ProfileSpec s;
    s.kind = ProfileKind::iid_uniform;
    s.a = 0.5;
    s.b = 2.0;
    s.seed = seed;
    return build_profile(s, n);
}

std::vector<ConductanceProfile> profile_matrix(int n, int randoms, std::uint64_t seed) {
    std::vector<ConductanceProfile> out{ConductanceProfile::homogeneous(n)};
    for (int i = 0; i < randoms; ++i)
        out.push_back(random_profile(derive_key(seed, Tag::profile, static_cast<std::uint64_t>(n * 1000 + i)), n));
    return out;
}

Outcome lln_zero() {
    auto rep = check_assumptions(ConductanceProfile::homogeneous(100), 50);
    return {rep.lln_discrepancy == 0 && rep.min_resistance == 1 && rep.max_resistance == 1,
            "discrepancy " + num(rep.lln_discrepancy)};
}

Outcome profile_reproducible(std::uint64_t seed) {
    ProfileSpec s;
    s.kind = ProfileKind::iid_uniform;
    s.seed = seed;
    auto a = build_profile(s, 500), b = build_profile(s, 500);
    return {a.resistances() == b.resistances(), "500 resistances compared bitwise"};
}

Outcome negative_rejected() {
    try {
        ConductanceProfile::from_resistances({1.0, -2.0, 1.0});
    } catch (const ConfigError& e) {
        return {true, e.what()};
    }
    return {false, "negative resistance accepted"};
}

Outcome height_roundtrip(int n, int k) {
    auto top = height_of(extremal(n, k, Extremal::max));
    auto bot = height_of(extremal(n, k, Extremal::min));
    std::size_t count = 0;
    for (const auto& c : enumerate_states(n, k)) {
        auto h = height_of(c);
        if (!(config_of(h) == c) || !leq(h, top) || !leq(bot, h))
            return {false, "failed at " + c.str()};
        ++count;
    }
    return {count == binomial(n, k), std::to_string(count) + " states"};
}

Outcome homogeneous_spectra() {
    double worst = 0;
    for (int n : {4, 8, 64}) {
        auto p = ConductanceProfile::homogeneous(n);
        int top = std::min(3, n - 1);
        auto ne = solve_neumann(p, top);
        auto di = solve_dirichlet(p, top);
        for (int i = 1; i <= top; ++i) {
            double ref = homogeneous_eigenvalue(n, i);
            worst = std::max({worst, rel(ne.eigenvalues[i], ref), rel(di.eigenvalues[i - 1], ref)});
        }
    }
    return {worst <= 1e-10, "max relative error " + num(worst)};
}

Outcome shooting_dense(int count, int n_max, std::uint64_t seed) {
    double worst = 0;
    for (int s = 0; s < count; ++s) {
        int n = 3 + static_cast<int>(keyed_uniform(seed, Tag::replica, static_cast<std::uint64_t>(s)) * (n_max - 2));
        auto p = random_profile(derive_key(seed, Tag::profile, static_cast<std::uint64_t>(s)), n);
        auto a = solve_dirichlet(p, n - 1, DirichletMethod::dense);
        auto b = solve_dirichlet(p, n - 1, DirichletMethod::shooting);
        for (int i = 0; i < n - 1; ++i)
            worst = std::max(worst, rel(b.eigenvalues[i], a.eigenvalues[i]));
    }
    return {worst <= 1e-9, std::to_string(count) + " profiles, max relative gap " + num(worst)};
}

Outcome extended_consistent(std::uint64_t seed) {
    auto p = random_profile(seed, 64);
    auto e = solve_extended(p, 0.25);
    return {e.delta_min > 0 && e.delta_min <= e.delta_max,
            "lambda_bar1 " + num(e.lambda_bar1) + ", delta_min " + num(e.delta_min)};
}

Outcome monotone_coupling(int n, int k, std::uint64_t seed) {
    auto states = enumerate_states(n, k);
    auto p = random_profile(seed, n);
    CoupledEnsemble ens(p, states, seed);
    std::vector<HeightFunction> h0;
    for (const auto& c : states)
        h0.push_back(height_of(c));
    for (int step = 1; step <= 10; ++step) {
        ens.evolve_until(2.0 * step);
        std::vector<HeightFunction> h;
        for (std::size_t i = 0; i < ens.size(); ++i)
            h.push_back(ens.member(i).height(k));
        for (std::size_t a = 0; a < h.size(); ++a)
            for (std::size_t b = 0; b < h.size(); ++b)
                if (leq(h0[a], h0[b]) && !leq(h[a], h[b]))
                    return {false, "order broken between " + states[a].str() + " and " + states[b].str()};
    }
    return {true, std::to_string(states.size()) + " members, " + std::to_string(ens.event_count()) + " rings"};
}

Outcome censoring_blocks(std::uint64_t seed) {
    auto p = ConductanceProfile::homogeneous(10);
    auto start = extremal(10, 5, Extremal::max);
    CoupledEnsemble ens(p, {start}, seed);
    auto scheme = CensoringScheme::block_all(10, 0.0, 50.0);
    evolve_censored(ens, scheme, 50.0);
    return {ens.config(0) == start && ens.event_count() > 0,
            std::to_string(ens.event_count()) + " rings, all blocked"};
}

Outcome generator_symmetric() {
    auto ch = build_chain(random_profile(7, 9), 4);
    double worst = 0;
    std::vector<double> ones(ch.size(), 1.0);
    for (double v : apply_generator(ch, ones))
        worst = std::max(worst, std::abs(v));
    for (std::size_t i = 0; i < ch.size(); ++i)
        for (std::size_t e = ch.row_ptr[i]; e < ch.row_ptr[i + 1]; ++e) {
            std::size_t j = ch.col[e];
            bool found = false;
            for (std::size_t f = ch.row_ptr[j]; f < ch.row_ptr[j + 1]; ++f)
                found = found || (ch.col[f] == i && ch.rate[f] == ch.rate[e]);
            if (!found)
                return {false, "asymmetric entry at " + ch.config(i).str()};
        }
    return {worst <= 1e-12 * ch.lambda && ch.size() == binomial(9, 4), "row sum max " + num(worst)};
}

Outcome gap_independent(int n_lo, int n_hi, int randoms, std::uint64_t seed) {
    double worst = 0;
    int chains = 0;
    for (int n = n_lo; n <= n_hi; ++n)
        for (const auto& p : profile_matrix(n, randoms, seed)) {
            double l1 = solve_neumann(p, 1).eigenvalues[1];
            for (int k = 1; k <= n - 1; ++k) {
                worst = std::max(worst, rel(gap_of(build_chain(p, k)), l1));
                ++chains;
            }
        }
    return {worst <= 1e-8, std::to_string(chains) + " chains, max relative gap " + num(worst)};
}

Outcome lifted_functions(int n_max, std::uint64_t seed) {
    int lifts = 0;
    for (int n = 4; n <= n_max; ++n)
        for (const auto& p : profile_matrix(n, 1, seed)) {
            auto es = solve_neumann(p, 3);
            for (int k = 1; k <= n - 1; ++k) {
                auto ch = build_chain(p, k);
                for (int i = 1; i <= 3; ++i, ++lifts)
                    lift_eigenfunction(ch, es.functions[i], es.eigenvalues[i]);
            }
        }
    return {true, std::to_string(lifts) + " lifts within residual"};
}

Outcome two_particle(int n) {
    std::vector<std::pair<int, int>> idx;
    for (int j = 1; j <= std::min(5, n - 1); ++j)
        for (int i = 0; i < j; ++i)
            idx.emplace_back(i, j);
    auto rep = two_particle_check(random_profile(11, n), idx);
    return {rep.max_orth_error <= 1e-8 && rep.basis_count == rep.offdiag_states,
            "residual " + num(rep.max_residual) + ", orthogonality " + num(rep.max_orth_error)};
}

Outcome sandwich(int n, int k) {
    auto p = ConductanceProfile::homogeneous(n);
    auto ch = build_chain(p, k);
    double gap = gap_of(ch);
    std::vector<double> grid;
    for (int i = 0; i <= 400; ++i)
        grid.push_back(i * 0.05 / gap);
    auto curve = tv_curve(ch, Starts::extremal, grid);
    std::string detail;
    for (double eps : {0.05, 0.25}) {
        double t = mixing_time(ch, curve, eps);
        double lo = std::log(1 / (2 * eps)) / gap, hi = std::log(binomial_real(n, k) / (2 * eps)) / gap;
        detail += "eps " + num(eps) + ": " + num(lo) + " <= " + num(t) + " <= " + num(hi) + "; ";
        if (!(lo <= t && t <= hi))
            return {false, detail};
    }
    return {true, detail};
}

Outcome extremal_audit(int n_max, int randoms, std::uint64_t seed) {
    double worst = 0;
    int chains = 0;
    std::vector<double> grid{0.5, 1, 2, 4, 8, 16, 32};
    for (int n = 3; n <= n_max; ++n)
        for (const auto& p : profile_matrix(n, randoms, seed))
            for (int k = 1; k <= n - 1; ++k) {
                auto ch = build_chain(p, k);
                auto a = tv_curve(ch, Starts::all, grid), b = tv_curve(ch, Starts::extremal, grid);
                for (std::size_t i = 0; i < grid.size(); ++i)
                    worst = std::max(worst, a.d[i] - b.d[i]);
                ++chains;
            }
    return {worst <= 1e-10, std::to_string(chains) + " chains, max excess of all-starts " + num(worst)};
}

Outcome uniformization_semigroup() {
    auto ch = build_chain(random_profile(5, 8), 4);
    auto d0 = point_mass(ch, extremal(8, 4, Extremal::max));
    auto a = distribution_at(ch, d0, 3.0);
    auto b = distribution_at(ch, distribution_at(ch, d0, 1.0), 2.0);
    double worst = 0, sum = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(a[i] - b[i]));
        sum += a[i];
    }
    return {worst <= 1e-11 && std::abs(sum - 1) <= 1e-12, "P_3 vs P_2 P_1 max diff " + num(worst)};
}

Outcome heat_mean(std::size_t replicas, std::uint64_t seed) {
    auto rep = heat_mean_check(ConductanceProfile::homogeneous(8), 4, 1.0, replicas, seed);
    return {rep.within_4sigma && rep.envelope_ok, "max z " + num(rep.max_z)};
}

Outcome covariance_modes(std::uint64_t seed) {
    auto ex = two_phase_covariance_audit(12, 2, CovarianceMode::exact, seed);
    auto mc = two_phase_covariance_audit(12, 2, CovarianceMode::mc, seed, 40000);
    double z = 0;
    for (std::size_t e = 0; e < ex.cov.size(); ++e)
        if (mc.cov_se[e] > 0)
            z = std::max(z, std::abs(ex.cov[e] - mc.cov[e]) / mc.cov_se[e]);
    // 144 entries: allow the max of that many normals
    return {ex.sum_abs_cov <= ex.bound && ex.diag_sum <= 2 + 1e-12 && z <= 4.5,
            "exact " + num(ex.sum_abs_cov) + ", max entry z " + num(z)};
}

Outcome wilson_mean(std::size_t replicas, std::uint64_t seed) {
    auto p = ConductanceProfile::homogeneous(16);
    double lam = solve_neumann(p, 1).eigenvalues[1];
    WilsonOptions o;
    o.replicas = replicas;
    o.seed = seed;
    o.grid = {1 / lam};
    auto w = wilson_lower_estimate(p, 8, o);
    const auto& pt = w.points[0];
    double z = std::abs(pt.mean - pt.exact_mean) / pt.se;
    double zs = std::abs(w.stationary_mean) / w.stationary_se;
    return {z <= 3 && zs <= 3, "mean z " + num(z) + ", stationary z " + num(zs)};
}

Outcome area_audit(std::size_t replicas, std::uint64_t seed) {
    auto p = random_profile(seed, 32);
    auto ext = solve_extended(p, 0.5);
    auto rep = area_supermartingale_audit(p, 16, 0.5 / ext.lambda_bar1, replicas, seed);
    return {rep.decay_ok() && rep.negative_events == 0 && rep.coalesced_nonzero == 0,
            std::to_string(rep.events_checked) + " events, negatives " + std::to_string(rep.negative_events)};
}

}  // namespace

std::vector<CheckResult> run_verify(const VerifyOptions& opt) {
    struct Entry {
        std::string name, module, property;
        std::function<Outcome()> fn;
    };
    const bool full = opt.full;
    const std::uint64_t s = opt.seed;
    std::vector<Entry> checks;
    if (!opt.profile_file.empty())
        checks.push_back({"input-profile", "conductance-env", "positive finite resistances", [&] {
                             auto p = load_profile(opt.profile_file);
                             return Outcome{true, "N = " + std::to_string(p.n_sites())};
                         }});
    checks.push_back({"lln-homogeneous", "conductance-env", "homogeneous discrepancy is zero", lln_zero});
    checks.push_back({"profile-reproducible", "conductance-env", "same seed gives identical resistances",
                     [=] { return profile_reproducible(s); }});
    checks.push_back({"negative-rejected", "conductance-env", "nonpositive resistance rejected", negative_rejected});
    checks.push_back({"height-roundtrip", "config-state", "height/config bijection and extremal bounds",
                     [=] { return height_roundtrip(full ? 14 : 10, full ? 7 : 5); }});
    checks.push_back({"homogeneous-spectra", "spectral-core", "closed-form eigenvalues", homogeneous_spectra});
    checks.push_back({"shooting-dense", "spectral-core", "angle-count eigenvalues equal dense eigenvalues",
                     [=] { return shooting_dense(full ? 100 : 8, full ? 128 : 48, s); }});
    checks.push_back({"extended-segment", "spectral-core", "extended eigenfunction monotone, extrema consistent",
                     [=] { return extended_consistent(s); }});
    checks.push_back({"monotone-coupling", "coupling-dynamics", "grand coupling preserves the height order",
                     [=] { return monotone_coupling(full ? 10 : 8, full ? 5 : 4, s); }});
    checks.push_back({"censoring-blocks", "coupling-dynamics", "blocked rings never flip", [=] {
                         return censoring_blocks(s);
                     }});
    checks.push_back({"generator-symmetric", "exact-chain", "symmetric generator with zero row sums",
                     generator_symmetric});
    checks.push_back({"gap-independent-of-k", "exact-chain", "k-particle gap equals one-particle gap",
                     [=] { return gap_independent(5, full ? 9 : 7, full ? 20 : 2, s); }});
    checks.push_back({"lifted-eigenfunctions", "exact-chain", "lifted one-particle eigenfunctions are eigenfunctions",
                     [=] { return lifted_functions(full ? 9 : 7, s); }});
    checks.push_back({"two-particle-basis", "exact-chain", "product eigenfunctions and their orthogonality",
                     [=] { return two_particle(full ? 12 : 8); }});
    checks.push_back({"uniformization-semigroup", "exact-chain", "propagator composes", uniformization_semigroup});
    checks.push_back({"mixing-sandwich", "exact-chain", "gap sandwich on the mixing time", [] { return sandwich(8, 4); }});
    checks.push_back({"extremal-start-audit", "exact-chain", "extremal starts attain the worst case (audited)",
                     [=] { return extremal_audit(full ? 8 : 6, full ? 20 : 2, s); }});
    checks.push_back({"heat-mean", "mc-estimators", "MC mean height matches the heat solution",
                     [=] { return heat_mean(full ? 100000 : 20000, s); }});
    checks.push_back({"covariance-modes", "mc-estimators", "two-phase covariance: exact vs MC, bound, diagonal",
                     [=] { return covariance_modes(s); }});
    checks.push_back({"wilson-mean", "mc-estimators", "Wilson statistic decays at the gap rate",
                     [=] { return wilson_mean(full ? 100000 : 20000, s); }});
    if (full)
        checks.push_back({"area-supermartingale", "mc-estimators", "weighted area decays, stays nonnegative",
                         [=] { return area_audit(2000, s); }});

    std::vector<CheckResult> out;
    for (const auto& sp : checks) {
        CheckResult r{sp.name, sp.module, sp.property, false, "", 0};
        auto t0 = std::chrono::steady_clock::now();
        try {
            auto [ok, detail] = sp.fn();
            r.passed = ok;
            r.detail = detail;
        } catch (const std::exception& e) {
            r.passed = false;
            r.detail = e.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace sepmix
