#include "sepmix/coupling.hpp"

#include <algorithm>
#include <cmath>

#include "sepmix/errors.hpp"
#include "sepmix/spectral.hpp"

namespace sepmix {

MarkovSimulator::MarkovSimulator(const ConductanceProfile& p) : n_(p.n_sites()) {
    const int m = n_ - 1;
    total_ = 0;
    for (double c : p.rates())
        total_ += c;
    // Vose alias table over edges 1..N-1
    prob_.assign(m, 0.0);
    alias_.assign(m, 0);
    std::vector<double> scaled(m);
    std::vector<int> small, large;
    for (int i = 0; i < m; ++i) {
        scaled[i] = p.rates()[i] * m / total_;
        (scaled[i] < 1.0 ? small : large).push_back(i);
    }
    while (!small.empty() && !large.empty()) {
        int s = small.back(), l = large.back();
        small.pop_back();
        large.pop_back();
        prob_[s] = scaled[s];
        alias_[s] = l;
        scaled[l] = (scaled[l] + scaled[s]) - 1.0;
        (scaled[l] < 1.0 ? small : large).push_back(l);
    }
    for (int i : large)
        prob_[i] = 1.0;
    for (int i : small)
        prob_[i] = 1.0;
}

int MarkovSimulator::pick_edge(Stream& rng) const {
    const auto m = static_cast<std::uint64_t>(prob_.size());
    auto i = static_cast<int>(rng.below(m));
    return 1 + (rng.uniform() < prob_[i] ? i : alias_[i]);
}

Configuration step_markov(const ConductanceProfile& p, const Configuration& cfg, double horizon, Stream& rng) {
    if (!(horizon >= 0))
        throw ConfigError("horizon must be nonnegative");
    if (cfg.n() != p.n_sites())
        throw ConfigError("configuration and profile disagree on N");
    const int n = cfg.n();
    std::vector<std::uint8_t> occ(n + 2, 0);
    for (int x = 1; x <= n; ++x)
        occ[x] = cfg[x];
    MarkovSimulator sim(p);
    sim.run(occ, 0.0, horizon, rng);
    Configuration out(n);
    for (int x = 1; x <= n; ++x)
        if (occ[x])
            out.set(x, true);
    return out;
}

std::vector<Center> clock_centers(int n, int k) {
    std::vector<Center> out;
    for (int x = 1; x <= n - 1; ++x) {
        int lo = std::max(0, x - n + k), hi = std::min(x - 1, k - 1);
        for (int j = lo; j <= hi; ++j)
            out.push_back({x, j});
    }
    return out;
}

ClockField::ClockField(const ConductanceProfile& p, int k, std::uint64_t seed, std::uint64_t index, ClockMode mode)
    : mode_(mode), rng_(seed, Tag::clocks, index), picker_(p) {
    if (mode == ClockMode::per_column) {
        next_t_ = rng_.exponential() / (2 * picker_.total_rate());
        return;
    }
    centers_ = clock_centers(p.n_sites(), k);
    std::vector<Entry> init;
    for (std::size_t i = 0; i < centers_.size(); ++i) {
        double c = p.rate(centers_[i].x);
        rate_.push_back(c);
        rate_.push_back(c);
    }
    for (std::size_t s = 0; s < rate_.size(); ++s)
        init.emplace_back(rng_.exponential() / rate_[s], static_cast<int>(s));
    heap_ = decltype(heap_)(std::greater<>(), std::move(init));
    if (heap_.empty())
        heap_.emplace(std::numeric_limits<double>::infinity(), -1);
}

Ring ClockField::next() {
    Ring r;
    if (mode_ == ClockMode::per_column) {
        r.t = next_t_;
        r.x = picker_.pick_edge(rng_);
        r.dir = rng_.coin() ? Dir::up : Dir::down;
        r.j = -1;
        next_t_ += rng_.exponential() / (2 * picker_.total_rate());
        return r;
    }
    auto [t, s] = heap_.top();
    heap_.pop();
    if (s < 0) {
        heap_.emplace(t, s);
        return Ring{t, 0, Dir::up, -1};
    }
    const Center& c = centers_[s / 2];
    r.t = t;
    r.x = c.x;
    r.j = c.j;
    r.dir = (s % 2 == 0) ? Dir::up : Dir::down;
    heap_.emplace(t + rng_.exponential() / rate_[s], s);
    return r;
}

void CensoringScheme::add(double t0, double t1, std::vector<int> columns, std::vector<Center> centers) {
    if (!(t0 < t1))
        throw ConfigError("censoring interval must have t0 < t1");
    for (const auto& iv : intervals_)
        if (t0 < iv.t1 && iv.t0 < t1)
            throw ConfigError("censoring intervals overlap");
    Interval iv{t0, t1, std::move(columns), std::set<Center>(centers.begin(), centers.end())};
    intervals_.push_back(std::move(iv));
    std::sort(intervals_.begin(), intervals_.end(), [](const auto& a, const auto& b) { return a.t0 < b.t0; });
}

bool CensoringScheme::blocked(double t, int x, int j) const {
    for (const auto& iv : intervals_) {
        if (t < iv.t0)
            return false;
        if (t < iv.t1) {
            if (std::find(iv.columns.begin(), iv.columns.end(), x) != iv.columns.end())
                return true;
            return iv.centers.count(Center{x, j}) > 0;
        }
    }
    return false;
}

double t_delta(double delta, double lambda_bar1, int k) {
    return (1 + delta) / (2 * lambda_bar1) * std::log(static_cast<double>(k));
}

CensoringScheme CensoringScheme::skeleton_scheme(int n, int k, double delta, double lambda_bar1) {
    CensoringScheme s;
    double a = t_delta(delta / 2, lambda_bar1, k), b = t_delta(delta, lambda_bar1, k);
    if (b > a)
        s.add(a, b, skeleton_columns(n, delta));
    return s;
}

CensoringScheme CensoringScheme::block_all(int n, double t0, double t1) {
    CensoringScheme s;
    std::vector<int> cols;
    for (int x = 1; x < n; ++x)
        cols.push_back(x);
    s.add(t0, t1, std::move(cols));
    return s;
}

std::uint64_t zobrist_key(int x) { return splitmix64(0x5a0b0157ULL + static_cast<std::uint64_t>(x)); }

PathState PathState::from(const Configuration& c) {
    const int n = c.n();
    std::vector<std::uint8_t> occ(n + 2, 0);
    for (int x = 1; x <= n; ++x)
        occ[x] = c[x];
    return from_occupancy(occ, n);
}

PathState PathState::from_occupancy(const std::vector<std::uint8_t>& occ, int n) {
    PathState s;
    s.occ.assign(n + 2, 0);
    s.prefix.assign(n + 1, 0);
    for (int x = 1; x <= n; ++x) {
        s.occ[x] = occ[x];
        s.prefix[x] = s.prefix[x - 1] + occ[x];
        s.area += s.prefix[x];
        if (occ[x])
            s.zobrist ^= zobrist_key(x);
    }
    return s;
}

Configuration PathState::config() const {
    const int nn = n();
    Configuration c(nn);
    for (int x = 1; x <= nn; ++x)
        if (occ[x])
            c.set(x, true);
    return c;
}

HeightFunction PathState::height(int k) const {
    HeightFunction h;
    h.n = n();
    h.k = k;
    h.scaled.resize(h.n + 1);
    for (int x = 0; x <= h.n; ++x)
        h.scaled[x] = static_cast<std::int64_t>(h.n) * prefix[x] - static_cast<std::int64_t>(k) * x;
    return h;
}

CoupledEnsemble::CoupledEnsemble(const ConductanceProfile& p, const std::vector<Configuration>& members,
                                 std::uint64_t seed, std::uint64_t index, ClockMode mode)
    : k_(members.empty() ? 0 : members.front().k()),
      clocks_(p, members.empty() ? 0 : members.front().k(), seed, index, mode) {
    for (const auto& c : members) {
        if (c.n() != p.n_sites() || c.k() != k_)
            throw ConfigError("ensemble members must share (N,k) with the profile");
        members_.push_back(PathState::from(c));
    }
}

std::uint64_t CoupledEnsemble::states_hash() const {
    std::uint64_t h = 0;
    for (const auto& m : members_)
        h = splitmix64(h ^ m.zobrist);
    return h;
}

void CoupledEnsemble::evolve_logged(double t_end, const CensoringScheme* scheme, std::vector<EventRecord>& log) {
    evolve_until(t_end, scheme, [&](const Ring& r, int applied) {
        log.push_back({r.t, r.x, r.dir, applied, states_hash()});
    });
}

void evolve_coupled(CoupledEnsemble& ens, double horizon) { ens.evolve_until(horizon, nullptr); }

void evolve_censored(CoupledEnsemble& ens, const CensoringScheme& scheme, double horizon) {
    ens.evolve_until(horizon, &scheme);
}

CoalescenceRecord run_coalescence(const ConductanceProfile& p, int k, CoalescenceMode mode, double max_time,
                                  std::uint64_t seed, std::uint64_t index, ClockMode clocks) {
    const int n = p.n_sites();
    if (k < 0 || k > n)
        throw ConfigError("need 0 <= k <= N");
    if (!(max_time > 0))
        throw ConfigError("max_time must be positive");
    CoalescenceRecord rec;
    const bool with_mu = mode == CoalescenceMode::top_vs_stationary;
    if (k == 0 || k == n) {
        if (with_mu)
            rec.T1 = rec.T2 = 0;
        return rec;
    }
    std::vector<PathState> m;
    m.push_back(PathState::from(extremal(n, k, Extremal::max)));
    m.push_back(PathState::from(extremal(n, k, Extremal::min)));
    if (with_mu) {
        Stream srng(seed, Tag::stationary, index);
        m.push_back(PathState::from(sample_uniform(n, k, srng)));
        if (m[0].area == m[2].area)
            rec.T1 = 0;
        if (m[1].area == m[2].area)
            rec.T2 = 0;
    }
    ClockField field(p, k, seed, index, clocks);
    // members stay ordered, so equal area means equal path
    while (true) {
        if (field.peek_time() > max_time) {
            rec.censored = true;
            rec.T = max_time;
            if (with_mu) {
                if (std::isnan(rec.T1))
                    rec.T1 = max_time;
                if (std::isnan(rec.T2))
                    rec.T2 = max_time;
            }
            return rec;
        }
        Ring r = field.next();
        for (auto& s : m)
            apply_ring(s, r, nullptr);
        ++rec.event_count;
        if (with_mu) {
            if (std::isnan(rec.T1) && m[0].area == m[2].area)
                rec.T1 = r.t;
            if (std::isnan(rec.T2) && m[1].area == m[2].area)
                rec.T2 = r.t;
        }
        if (m[0].area == m[1].area) {
            rec.T = r.t;
            return rec;
        }
    }
}

double default_max_time(const ConductanceProfile& p, int k) {
    auto es = solve_neumann(p, 1);
    return 20.0 / es.eigenvalues[1] * std::log(static_cast<double>(std::max(k, 2)));
}

}  // namespace sepmix
