#include "sepmix/estimators.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

#include "sepmix/errors.hpp"
#include "sepmix/spectral.hpp"

namespace sepmix {

unsigned default_threads() {
    unsigned h = std::thread::hardware_concurrency();
    return h ? h : 1;
}

StartKind parse_start_kind(const std::string& s) {
    if (s == "wedge")
        return StartKind::wedge;
    if (s == "vee")
        return StartKind::vee;
    if (s == "two-phase")
        return StartKind::two_phase;
    if (s == "stationary")
        return StartKind::stationary;
    throw ConfigError("unknown start '" + s + "' (wedge, vee, two-phase, stationary)");
}

std::string to_string(StartKind s) {
    switch (s) {
    case StartKind::wedge: return "wedge";
    case StartKind::vee: return "vee";
    case StartKind::two_phase: return "two-phase";
    case StartKind::stationary: return "stationary";
    }
    return "?";
}

WilsonThreshold parse_wilson_threshold(const std::string& s) {
    if (s == "midway")
        return WilsonThreshold::midway;
    if (s == "dense")
        return WilsonThreshold::dense;
    if (s == "sparse")
        return WilsonThreshold::sparse;
    throw ConfigError("unknown threshold '" + s + "' (midway, dense, sparse)");
}

std::vector<std::uint8_t> sample_two_phase(int n, int k, Stream& rng) {
    if (2 * k > n)
        throw ConfigError("two-phase sampler needs 2k <= N");
    std::vector<std::uint8_t> occ;
    std::vector<int> scratch;
    sample_uniform(n, 2 * k, rng, occ, scratch);
    int kept = 0;
    for (int x = 1; x <= n; ++x)
        if (occ[x]) {
            if (kept < k)
                ++kept;
            else
                occ[x] = 0;
        }
    return occ;
}

namespace {

double log_binom(int n, int k) {
    if (k < 0 || k > n)
        return -std::numeric_limits<double>::infinity();
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

std::vector<double> principal(const ConductanceProfile& p, double& lambda1) {
    auto es = solve_neumann(p, 1);
    lambda1 = es.eigenvalues[1];
    return es.functions[1];
}

double q_of(const std::vector<std::uint8_t>& occ, int n) {
    std::vector<std::uint8_t> v(occ.begin(), occ.begin() + n + 1);
    return max_monotone_run(v).q;
}

}  // namespace

std::vector<double> two_phase_marginals(int n, int k) {
    if (2 * k > n)
        throw ConfigError("two-phase measure needs 2k <= N");
    std::vector<double> m(n, 0.0);
    const double total = log_binom(n, 2 * k);
    for (int x = 1; x <= n; ++x) {
        // x chosen with at most k-1 chosen sites to its left
        double s = 0;
        for (int j = 0; j <= k - 1; ++j) {
            double lb = log_binom(x - 1, j) + log_binom(n - x, 2 * k - 1 - j) - total;
            if (std::isfinite(lb))
                s += std::exp(lb);
        }
        m[x - 1] = s;
    }
    return m;
}

std::vector<std::uint8_t> draw_start(int n, int k, StartKind kind, std::uint64_t seed, std::uint64_t index) {
    std::vector<std::uint8_t> occ(n + 2, 0);
    switch (kind) {
    case StartKind::wedge:
        for (int x = 1; x <= k; ++x)
            occ[x] = 1;
        break;
    case StartKind::vee:
        for (int x = n - k + 1; x <= n; ++x)
            occ[x] = 1;
        break;
    case StartKind::two_phase: {
        Stream rng(seed, Tag::two_phase, index);
        occ = sample_two_phase(n, k, rng);
        break;
    }
    case StartKind::stationary: {
        Stream rng(seed, Tag::stationary, index);
        std::vector<int> scratch;
        sample_uniform(n, k, rng, occ, scratch);
        break;
    }
    }
    return occ;
}

double wilson_value(const std::vector<std::uint8_t>& occ, const std::vector<double>& g) {
    double f = 0;
    for (std::size_t x = 1; x <= g.size(); ++x)
        if (occ[x])
            f += g[x - 1];
    return f;
}

// ---- Wilson -------------------------------------------------------------------------

WilsonResult wilson_lower_estimate(const ConductanceProfile& p, int k, const WilsonOptions& opt) {
    const int n = p.n_sites();
    if (k < 2 || k > n - 1)
        throw ConfigError("Wilson estimate needs 2 <= k <= N-1");
    if (!(opt.eps > 0 && opt.eps < 1))
        throw ConfigError("eps must lie in (0,1)");
    if (opt.replicas < 2)
        throw ConfigError("need at least two replicas");
    WilsonResult res;
    res.replicas = opt.replicas;
    res.seed = opt.seed;
    auto g = principal(p, res.lambda1);
    const double lam = res.lambda1;
    res.start = k >= opt.sparse_fraction * n ? StartKind::wedge : StartKind::two_phase;
    if (res.start == StartKind::two_phase && 2 * k > n)
        res.start = StartKind::wedge;

    double mean0 = 0;
    if (res.start == StartKind::wedge) {
        for (int x = 1; x <= k; ++x)
            mean0 += g[x - 1];
    } else {
        auto m = two_phase_marginals(n, k);
        for (int x = 1; x <= n; ++x)
            mean0 += m[x - 1] * g[x - 1];
    }

    std::vector<double> grid = opt.grid;
    if (grid.empty()) {
        double top = 1.5 * std::log(static_cast<double>(k)) / (2 * lam);
        for (int i = 1; i <= 40; ++i)
            grid.push_back(top * i / 40);
    }
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (grid[i] < 0 || (i && grid[i] <= grid[i - 1]))
            throw ConfigError("Wilson grid must be increasing and nonnegative");

    const MarkovSimulator sim(p);
    struct Rep {
        std::vector<double> f;
        double mu = 0;
    };
    auto reps = run_replicas(opt.replicas, opt.threads, [&](std::size_t i) {
        Rep r;
        auto occ = draw_start(n, k, res.start, opt.seed, i);
        double f = wilson_value(occ, g);
        Stream rng(opt.seed, Tag::trajectory, i);
        double t = 0;
        for (double tg : grid) {
            sim.run(occ, t, tg, rng, [&](double, int x) {
                f += (occ[x] ? g[x - 1] : -g[x - 1]) + (occ[x + 1] ? g[x] : -g[x]);
            });
            t = tg;
            r.f.push_back(f);
        }
        auto mu = draw_start(n, k, StartKind::stationary, opt.seed, i);
        r.mu = wilson_value(mu, g);
        return r;
    });

    Welford st;
    for (const auto& r : reps)
        st.add(r.mu);
    res.stationary_mean = st.mean();
    res.stationary_se = st.se();

    const double nr = static_cast<double>(opt.replicas);
    bool any_uncertified_sep = false;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        WilsonPoint pt;
        pt.t = grid[j];
        pt.exact_mean = std::exp(-lam * pt.t) * mean0;
        switch (opt.threshold) {
        case WilsonThreshold::midway: pt.threshold = 0.5 * pt.exact_mean; break;
        case WilsonThreshold::dense: pt.threshold = 4 * std::sqrt(n / opt.eps); break;
        case WilsonThreshold::sparse: pt.threshold = std::exp(opt.c_eps / 2) * std::sqrt(double(k)) / 2; break;
        }
        Welford w;
        double above = 0, above_mu = 0;
        for (const auto& r : reps) {
            w.add(r.f[j]);
            above += r.f[j] >= pt.threshold;
            above_mu += r.mu >= pt.threshold;
        }
        pt.mean = w.mean();
        pt.se = w.se();
        pt.p_start = above / nr;
        pt.p_mu = above_mu / nr;
        pt.sigma = std::sqrt(pt.p_start * (1 - pt.p_start) / nr + pt.p_mu * (1 - pt.p_mu) / nr);
        double sep = pt.p_start - pt.p_mu;
        pt.certified = sep - 3 * pt.sigma >= 1 - opt.eps;
        if (pt.certified)
            res.estimate = std::max(res.estimate, pt.t);
        else if (sep >= 1 - opt.eps)
            any_uncertified_sep = true;
        res.points.push_back(pt);
    }
    res.flagged = res.estimate == 0 || any_uncertified_sep;
    return res;
}

// ---- coalescence ------------------------------------------------------------------

double CoalescenceSummary::survival(double t) const {
    auto it = std::upper_bound(T.begin(), T.end(), t);
    return static_cast<double>(T.end() - it) / static_cast<double>(T.size());
}

double CoalescenceSummary::survival_se(double t) const {
    double s = survival(t);
    return std::sqrt(s * (1 - s) / static_cast<double>(T.size()));
}

double CoalescenceSummary::quantile_upper(double eps) const {
    if (T.empty())
        throw ConfigError("no coalescence samples");
    const std::size_t n = T.size();
    auto allowed = static_cast<std::size_t>(std::floor(eps * static_cast<double>(n)));
    if (allowed >= n)
        return 0.0;
    // need #{T_i > t} <= allowed
    std::size_t idx = n - allowed - 1;
    if (T[idx] >= max_time && censored > allowed)
        return std::numeric_limits<double>::infinity();
    return T[idx];
}

CoalescenceSummary coalescence_times(const ConductanceProfile& p, int k, std::size_t replicas, std::uint64_t seed,
                                     double max_time, unsigned threads) {
    if (replicas < 1)
        throw ConfigError("need at least one replica");
    CoalescenceSummary s;
    s.seed = seed;
    s.max_time = max_time > 0 ? max_time : default_max_time(p, k);
    auto recs = run_replicas(replicas, threads, [&](std::size_t i) {
        return run_coalescence(p, k, CoalescenceMode::top_bottom, s.max_time, seed, i);
    });
    for (const auto& r : recs) {
        s.T.push_back(r.T);
        s.censored += r.censored;
    }
    std::sort(s.T.begin(), s.T.end());
    return s;
}

// ---- bracket ----------------------------------------------------------------------

BracketReport bracket_variance(const ConductanceProfile& p, int k, double t0, StartKind start, std::size_t replicas,
                               std::uint64_t seed, unsigned threads) {
    const int n = p.n_sites();
    if (!(t0 >= 0))
        throw ConfigError("t0 must be nonnegative");
    if (k < 1 || k > n - 1)
        throw ConfigError("need 1 <= k <= N-1");
    if (replicas < 2)
        throw ConfigError("need at least two replicas");
    BracketReport rep;
    rep.t0 = t0;
    rep.start = start;
    rep.replicas = replicas;
    rep.seed = seed;
    double lam = 0;
    auto g = principal(p, lam);
    std::vector<double> wc(n + 1, 0.0), wr(n + 1, 0.0);
    double rsum = 0;
    for (int x = 1; x < n; ++x) {
        double d = g[x - 1] - g[x];
        wc[x] = p.rate(x) * d * d;
        wr[x] = p.resistance(x);
        rsum += wr[x];
    }
    const double pre = 4 * std::numbers::pi * std::numbers::pi / (double(n) * n);
    rep.bound_trivial = t0 > 0 ? pre * rsum * (1 - std::exp(-2 * lam * t0)) / (2 * lam) : 0.0;

    const MarkovSimulator sim(p);
    struct Rep {
        double jumps = 0, comp = 0, direct = 0, bound = 0;
    };
    auto reps = run_replicas(replicas, threads, [&](std::size_t i) {
        Rep r;
        if (t0 == 0)
            return r;
        auto occ = draw_start(n, k, start, seed, i);
        const double f0 = wilson_value(occ, g);
        double f = f0;
        double rc = 0, rr = 0;
        for (int x = 1; x < n; ++x)
            if (occ[x] != occ[x + 1]) {
                rc += wc[x];
                rr += wr[x];
            }
        auto weight = [&](double a, double b) {
            return (std::exp(2 * lam * (b - t0)) - std::exp(2 * lam * (a - t0))) / (2 * lam);
        };
        double last = 0;
        Stream rng(seed, Tag::trajectory, i);
        auto edge_flip = [&](int e) {
            if (e < 1 || e >= n)
                return;
            double s = occ[e] != occ[e + 1] ? 1.0 : -1.0;  // state after the swap
            rc += s * wc[e];
            rr += s * wr[e];
        };
        sim.run(occ, 0.0, t0, rng, [&](double t, int x) {
            double w = weight(last, t);
            r.comp += w * rc;
            r.bound += w * rr;
            last = t;
            double df = (occ[x] ? g[x - 1] : -g[x - 1]) + (occ[x + 1] ? g[x] : -g[x]);
            f += df;
            double jm = std::exp(lam * (t - t0)) * df;
            r.jumps += jm * jm;
            edge_flip(x - 1);
            edge_flip(x + 1);
        });
        double w = weight(last, t0);
        r.comp += w * rc;
        r.bound += w * rr;
        r.bound *= pre;
        double m = f - std::exp(-lam * t0) * f0;
        r.direct = m * m;
        return r;
    });
    Welford a, b, c, d;
    for (const auto& r : reps) {
        a.add(r.jumps);
        b.add(r.comp);
        c.add(r.direct);
        d.add(r.bound);
    }
    rep.jumps = {"bracket_jumps", a.mean(), a.se(), replicas, seed};
    rep.compensator = {"bracket_compensator", b.mean(), b.se(), replicas, seed};
    rep.direct = {"martingale_square", c.mean(), c.se(), replicas, seed};
    rep.bound = {"bracket_bound", d.mean(), d.se(), replicas, seed};
    return rep;
}

// ---- area -------------------------------------------------------------------------

bool AreaReport::decay_ok() const {
    return std::all_of(decay.begin(), decay.end(), [](const AreaDecayCheck& c) { return c.ok; });
}

AreaReport area_supermartingale_audit(const ConductanceProfile& p, int k, double horizon, std::size_t replicas,
                                      std::uint64_t seed, const AreaOptions& opt) {
    const int n = p.n_sites();
    if (k < 1 || k > n - 1)
        throw ConfigError("need 1 <= k <= N-1");
    if (!(horizon > 0) || opt.grid_points < 2 || replicas < 2)
        throw ConfigError("area audit needs horizon > 0, at least 2 grid points and 2 replicas");
    auto ext = solve_extended(p, opt.delta);
    AreaReport rep;
    rep.delta = opt.delta;
    rep.lambda_bar1 = ext.lambda_bar1;
    rep.delta_min = ext.delta_min;
    rep.replicas = replicas;
    rep.seed = seed;
    for (std::size_t j = 0; j < opt.grid_points; ++j)
        rep.grid.push_back(horizon * static_cast<double>(j) / static_cast<double>(opt.grid_points - 1));
    rep.q_threshold = double(n) / k * std::pow(std::log(double(n)), 1 + opt.q_exponent);

    const auto wedge = extremal(n, k, Extremal::max);
    struct Rep {
        std::vector<double> A, H, Q;
        std::uint64_t events = 0, negative = 0, coalesced_nonzero = 0, q_exceed = 0;
        bool h0_nonzero = false;
    };
    auto reps = run_replicas(replicas, opt.threads, [&](std::size_t i) {
        Rep r;
        Configuration mu = wedge;
        if (!opt.mu_at_wedge) {
            Stream srng(seed, Tag::stationary, i);
            mu = sample_uniform(n, k, srng);
        }
        CoupledEnsemble ens(p, {wedge, mu}, seed, i);
        std::vector<int> D(n + 1, 0);
        double A = 0, scale = 0;
        for (int x = 1; x < n; ++x) {
            D[x] = ens.member(0).prefix[x] - ens.member(1).prefix[x];
            A += ext.bar(x) * D[x];
            scale += ext.bar(x) * std::abs(D[x]);
        }
        A /= ext.delta_min;
        scale = 1e-9 * (1 + scale / ext.delta_min);
        auto sample = [&] {
            double h = 0;
            for (int x = 1; x < n; ++x)
                h = std::max(h, ext.bar(x) * D[x]);
            r.A.push_back(A);
            r.H.push_back(h);
            double q = q_of(ens.member(1).occ, n);
            r.Q.push_back(q);
            r.q_exceed += q > rep.q_threshold;
        };
        sample();
        r.h0_nonzero = opt.mu_at_wedge && r.H[0] != 0;
        for (std::size_t j = 1; j < rep.grid.size(); ++j) {
            ens.evolve_until(rep.grid[j], nullptr, [&](const Ring& ring, int applied) {
                if (!applied)
                    return;
                const int x = ring.x;
                int nd = ens.member(0).prefix[x] - ens.member(1).prefix[x];
                A += ext.bar(x) * (nd - D[x]) / ext.delta_min;
                D[x] = nd;
                ++r.events;
                if (A < -scale)
                    ++r.negative;
                if (ens.member(0).area == ens.member(1).area && std::abs(A) > scale)
                    ++r.coalesced_nonzero;
            });
            sample();
        }
        return r;
    });

    const std::size_t gp = rep.grid.size();
    std::uint64_t q_exceed = 0;
    for (std::size_t j = 0; j < gp; ++j) {
        Welford a, h, q;
        for (const auto& r : reps) {
            a.add(r.A[j]);
            h.add(r.H[j]);
            q.add(r.Q[j]);
        }
        rep.mean_A.push_back(a.mean());
        rep.se_A.push_back(a.se());
        rep.mean_H.push_back(h.mean());
        rep.mean_Q.push_back(q.mean());
    }
    for (const auto& r : reps) {
        rep.events_checked += r.events;
        rep.negative_events += r.negative;
        rep.coalesced_nonzero += r.coalesced_nonzero;
        rep.h0_nonzero += r.h0_nonzero;
        q_exceed += r.q_exceed;
    }
    rep.q_exceed_freq = static_cast<double>(q_exceed) / static_cast<double>(gp * replicas);
    for (std::size_t j = 0; j + 1 < gp; ++j) {
        AreaDecayCheck c;
        c.t = rep.grid[j];
        c.s = rep.grid[j + 1] - rep.grid[j];
        const double f = std::exp(-rep.lambda_bar1 * c.s);
        Welford d;
        for (const auto& r : reps)
            d.add(r.A[j + 1] - f * r.A[j]);
        c.mean_next = rep.mean_A[j + 1];
        c.rhs = f * rep.mean_A[j];
        c.diff_mean = d.mean();
        c.diff_se = d.se();
        c.ok = c.diff_mean <= 3 * c.diff_se + 1e-12 * (1 + std::abs(c.rhs));
        rep.decay.push_back(c);
    }
    return rep;
}

Estimate stationary_q_exceedance(int n, int k, std::size_t samples, std::uint64_t seed, double q_exponent) {
    if (k < 1 || k > n - 1 || samples < 1)
        throw ConfigError("need 1 <= k <= N-1 and samples >= 1");
    const double thr = double(n) / k * std::pow(std::log(double(n)), 1 + q_exponent);
    Stream rng(seed, Tag::stationary, 0);
    std::vector<std::uint8_t> occ;
    std::vector<int> scratch;
    double hits = 0;
    for (std::size_t i = 0; i < samples; ++i) {
        sample_uniform(n, k, rng, occ, scratch);
        hits += q_of(occ, n) > thr;
    }
    double pr = hits / static_cast<double>(samples);
    return {"q_exceedance", pr, std::sqrt(pr * (1 - pr) / static_cast<double>(samples)), samples, seed};
}

// ---- covariance -------------------------------------------------------------------

CovarianceReport two_phase_covariance_audit(int n, int k, CovarianceMode mode, std::uint64_t seed,
                                            std::size_t samples, double delta, std::size_t budget) {
    if (k < 1 || 2 * k > n)
        throw ConfigError("covariance audit needs 1 <= k and 2k <= N");
    CovarianceReport rep;
    rep.mode = mode;
    rep.n = n;
    rep.k = k;
    rep.delta = delta;
    rep.bound = std::pow(2.0, 12) * std::pow(double(k), 2 - delta);
    const std::size_t nn = static_cast<std::size_t>(n);
    std::vector<double> m1(nn, 0.0), m2(nn * nn, 0.0);
    rep.cov.assign(nn * nn, 0.0);
    rep.cov_se.assign(nn * nn, 0.0);

    if (mode == CovarianceMode::exact) {
        if (n > 63)
            throw CapacityError("exact covariance enumeration needs N <= 63");
        std::uint64_t count = binomial(n, 2 * k);
        if (count > budget)
            throw CapacityError("binomial(" + std::to_string(n) + "," + std::to_string(2 * k) + ") = " +
                                std::to_string(count) + " exceeds budget " + std::to_string(budget));
        const double w = 1.0 / static_cast<double>(count);
        std::vector<int> pos;
        for (std::uint64_t mask : enumerate_masks(n, 2 * k)) {
            pos.clear();
            for (std::uint64_t m = mask; m && static_cast<int>(pos.size()) < k; m &= m - 1)
                pos.push_back(std::countr_zero(m));
            for (int a : pos) {
                m1[a] += w;
                for (int b : pos)
                    m2[a * nn + b] += w;
            }
        }
        rep.samples = count;
        for (std::size_t a = 0; a < nn; ++a)
            for (std::size_t b = 0; b < nn; ++b)
                rep.cov[a * nn + b] = m2[a * nn + b] - m1[a] * m1[b];
    } else {
        if (samples < 2)
            throw ConfigError("MC covariance needs at least two samples");
        Stream rng(seed, Tag::two_phase, 0);
        std::vector<std::vector<std::uint8_t>> draws;
        draws.reserve(samples);
        for (std::size_t s = 0; s < samples; ++s) {
            auto occ = sample_two_phase(n, k, rng);
            draws.emplace_back(occ.begin() + 1, occ.begin() + 1 + n);
            for (std::size_t a = 0; a < nn; ++a)
                m1[a] += draws.back()[a];
        }
        const double ns = static_cast<double>(samples);
        for (double& v : m1)
            v /= ns;
        std::vector<double> sum(nn * nn, 0.0), sq(nn * nn, 0.0);
        std::vector<double> c(nn);
        for (const auto& d : draws) {
            for (std::size_t a = 0; a < nn; ++a)
                c[a] = d[a] - m1[a];
            for (std::size_t a = 0; a < nn; ++a)
                for (std::size_t b = 0; b < nn; ++b) {
                    double v = c[a] * c[b];
                    sum[a * nn + b] += v;
                    sq[a * nn + b] += v * v;
                }
        }
        for (std::size_t e = 0; e < nn * nn; ++e) {
            double mean = sum[e] / ns;
            double var = (sq[e] / ns - mean * mean) * ns / (ns - 1);
            rep.cov[e] = mean;
            rep.cov_se[e] = std::sqrt(std::max(var, 0.0) / ns);
        }
        rep.samples = samples;
    }
    rep.marginals = m1;
    for (std::size_t a = 0; a < nn; ++a) {
        rep.diag_sum += rep.cov[a * nn + a];
        for (std::size_t b = 0; b < nn; ++b)
            rep.sum_abs_cov += std::abs(rep.cov[a * nn + b]);
    }
    return rep;
}

// ---- heat ---------------------------------------------------------------------------

double heat_envelope(const ConductanceProfile& p, int k, double t, double rho) {
    double ups = *std::min_element(p.resistances().begin(), p.resistances().end());
    double k0 = std::ceil(std::sqrt(2 + 3 / rho));
    auto dir = solve_dirichlet(p, 1);
    return 64.0 / std::sqrt(ups) * (k0 + 1) * k * std::exp(-dir.eigenvalues[0] * t);
}

HeatReport heat_mean_check(const ConductanceProfile& p, int k, double t, std::size_t replicas, std::uint64_t seed,
                           unsigned threads) {
    const int n = p.n_sites();
    if (!(t >= 0))
        throw ConfigError("t must be nonnegative");
    if (k < 0 || k > n || replicas < 2)
        throw ConfigError("need 0 <= k <= N and at least two replicas");
    HeatReport rep;
    rep.t = t;
    rep.replicas = replicas;
    rep.seed = seed;
    const auto wedge = extremal(n, k, Extremal::max);
    rep.spectral = heat_solution(p, height_of(wedge), t);
    const MarkovSimulator sim(p);
    auto reps = run_replicas(replicas, threads, [&](std::size_t i) {
        auto occ = draw_start(n, k, StartKind::wedge, seed, i);
        Stream rng(seed, Tag::trajectory, i);
        sim.run(occ, 0.0, t, rng);
        std::vector<double> h(n + 1, 0.0);
        int s = 0;
        for (int x = 1; x <= n; ++x) {
            s += occ[x];
            h[x] = s - double(k) * x / n;
        }
        h[n] = 0;
        return h;
    });
    rep.mc_mean.assign(n + 1, 0.0);
    rep.mc_se.assign(n + 1, 0.0);
    rep.within_4sigma = true;
    for (int x = 0; x <= n; ++x) {
        Welford w;
        for (const auto& h : reps)
            w.add(h[x]);
        rep.mc_mean[x] = w.mean();
        rep.mc_se[x] = w.se();
        double dev = std::abs(w.mean() - rep.spectral[x]);
        rep.max_abs_dev = std::max(rep.max_abs_dev, dev);
        if (w.se() > 0) {
            rep.max_z = std::max(rep.max_z, dev / w.se());
        } else if (dev > 1e-9) {
            rep.max_z = std::numeric_limits<double>::infinity();
        }
        rep.max_spectral = std::max(rep.max_spectral, rep.spectral[x]);
    }
    rep.within_4sigma = rep.max_z <= 4;
    rep.envelope = heat_envelope(p, k, t);
    rep.envelope_ok = rep.max_spectral <= rep.envelope;
    return rep;
}

}  // namespace sepmix
