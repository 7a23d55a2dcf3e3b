// Trajectories: a direct Gillespie simulator, and the corner-flip graphical
// construction that drives many paths with one clock realization.
#pragma once

#include <cstdint>
#include <limits>
#include <queue>
#include <set>
#include <utility>
#include <vector>

#include "sepmix/config.hpp"
#include "sepmix/profile.hpp"
#include "sepmix/rng.hpp"

namespace sepmix {

// ---- direct simulation -------------------------------------------------

// Each edge rings at rate c(x,x+1) and swaps the contents of x, x+1.
class MarkovSimulator {
public:
    explicit MarkovSimulator(const ConductanceProfile& p);

    double total_rate() const { return total_; }
    int pick_edge(Stream& rng) const;  // proportional to c

    // advance occ[1..N] over [t0, t1); on_jump(t, x) after every effective swap
    template <class F>
    void run(std::vector<std::uint8_t>& occ, double t0, double t1, Stream& rng, F&& on_jump) const {
        double t = t0 + rng.exponential() / total_;
        while (t < t1) {
            int x = pick_edge(rng);
            if (occ[x] != occ[x + 1]) {
                std::swap(occ[x], occ[x + 1]);
                on_jump(t, x);
            }
            t += rng.exponential() / total_;
        }
    }
    void run(std::vector<std::uint8_t>& occ, double t0, double t1, Stream& rng) const {
        run(occ, t0, t1, rng, [](double, int) {});
    }

private:
    int n_;
    double total_;
    std::vector<double> prob_;  // alias table
    std::vector<int> alias_;
};

Configuration step_markov(const ConductanceProfile& p, const Configuration& cfg, double horizon, Stream& rng);

// ---- graphical construction -----------------------------------------------

enum class Dir : std::uint8_t { up = 0, down = 1 };

// Corner center at column x between the heights j - kx/N and j + 1 - kx/N,
// j = number of particles in [1, x-1] of a path presenting that corner.
struct Center {
    int x;
    int j;
    auto operator<=>(const Center&) const = default;
};

std::vector<Center> clock_centers(int n, int k);

enum class ClockMode { per_column, literal };

struct Ring {
    double t;
    int x;
    Dir dir;
    int j;  // -1 for a column ring: resolved against each path's own corner
};

class ClockField {
public:
    ClockField(const ConductanceProfile& p, int k, std::uint64_t seed, std::uint64_t index,
               ClockMode mode = ClockMode::per_column);

    double peek_time() const { return mode_ == ClockMode::per_column ? next_t_ : heap_.top().first; }
    Ring next();
    ClockMode mode() const { return mode_; }
    std::size_t center_count() const { return centers_.size(); }

private:
    using Entry = std::pair<double, int>;
    ClockMode mode_;
    Stream rng_;
    // per-column mode: superposition of the column clocks, total rate 2 sum c
    MarkovSimulator picker_;
    double next_t_ = 0;
    std::vector<double> rate_;      // literal mode, per stream
    std::vector<Center> centers_;   // literal mode; stream 2i is up, 2i+1 down
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap_;
};

// Piecewise-constant blocked sets on disjoint right-open time intervals.
class CensoringScheme {
public:
    struct Interval {
        double t0, t1;
        std::vector<int> columns;   // every center in these columns
        std::set<Center> centers;   // individual centers
    };

    void add(double t0, double t1, std::vector<int> columns, std::vector<Center> centers = {});
    bool empty() const { return intervals_.empty(); }
    bool blocked(double t, int x, int j) const;
    const std::vector<Interval>& intervals() const { return intervals_; }

    // block columns ceil(i delta N) during [t_{delta/2}, t_delta)
    static CensoringScheme skeleton_scheme(int n, int k, double delta, double lambda_bar1);
    static CensoringScheme block_all(int n, double t0, double t1);

private:
    std::vector<Interval> intervals_;
};

// (1 + delta) / (2 lambda_bar1) * log k
double t_delta(double delta, double lambda_bar1, int k);

// occupancy plus prefix counts S(x) = particles in [1,x], updated per flip
struct PathState {
    std::vector<std::uint8_t> occ;  // 1..N, with sentinels
    std::vector<int> prefix;        // 0..N
    std::int64_t area = 0;          // sum of prefix
    std::uint64_t zobrist = 0;

    static PathState from(const Configuration& c);
    static PathState from_occupancy(const std::vector<std::uint8_t>& occ, int n);
    Configuration config() const;
    HeightFunction height(int k) const;
    int n() const { return static_cast<int>(prefix.size()) - 1; }
};

std::uint64_t zobrist_key(int x);

// flips the corner if the ring applies to this path; returns +1/-1/0
inline int apply_ring(PathState& s, const Ring& r, const CensoringScheme* scheme) {
    const int x = r.x;
    int j;
    if (r.dir == Dir::up) {
        if (!(s.occ[x] == 0 && s.occ[x + 1] == 1))
            return 0;
        j = s.prefix[x];
    } else {
        if (!(s.occ[x] == 1 && s.occ[x + 1] == 0))
            return 0;
        j = s.prefix[x] - 1;
    }
    if (r.j >= 0 && r.j != j)
        return 0;
    if (scheme && scheme->blocked(r.t, x, j))
        return 0;
    std::swap(s.occ[x], s.occ[x + 1]);
    s.zobrist ^= zobrist_key(x) ^ zobrist_key(x + 1);
    const int d = r.dir == Dir::up ? 1 : -1;
    s.prefix[x] += d;
    s.area += d;
    return d;
}

struct EventRecord {
    double t;
    int x;
    Dir dir;
    int applied;  // number of members flipped
    std::uint64_t states_hash;
};

class CoupledEnsemble {
public:
    CoupledEnsemble(const ConductanceProfile& p, const std::vector<Configuration>& members, std::uint64_t seed,
                    std::uint64_t index = 0, ClockMode mode = ClockMode::per_column);

    double time() const { return time_; }
    std::size_t size() const { return members_.size(); }
    int k() const { return k_; }
    const PathState& member(std::size_t i) const { return members_[i]; }
    Configuration config(std::size_t i) const { return members_[i].config(); }
    std::uint64_t event_count() const { return events_; }
    std::uint64_t states_hash() const;

    // process every ring with time < t_end; on_event(ring, applied) after each
    template <class F>
    void evolve_until(double t_end, const CensoringScheme* scheme, F&& on_event) {
        if (scheme && scheme->empty())
            scheme = nullptr;
        while (clocks_.peek_time() < t_end) {
            Ring r = clocks_.next();
            int applied = 0;
            for (auto& m : members_)
                applied += apply_ring(m, r, scheme) != 0;
            ++events_;
            time_ = r.t;
            on_event(r, applied);
        }
        time_ = std::max(time_, t_end);
    }
    void evolve_until(double t_end, const CensoringScheme* scheme = nullptr) {
        evolve_until(t_end, scheme, [](const Ring&, int) {});
    }

    // event log rows (t, x, dir, applied, member_states_hash)
    void evolve_logged(double t_end, const CensoringScheme* scheme, std::vector<EventRecord>& log);

private:
    int k_;
    ClockField clocks_;
    std::vector<PathState> members_;
    double time_ = 0;
    std::uint64_t events_ = 0;
};

// advance to absolute time `horizon`
void evolve_coupled(CoupledEnsemble& ens, double horizon);
void evolve_censored(CoupledEnsemble& ens, const CensoringScheme& scheme, double horizon);

enum class CoalescenceMode { top_bottom, top_vs_stationary };

struct CoalescenceRecord {
    double T = 0;   // wedge meets vee
    double T1 = std::numeric_limits<double>::quiet_NaN();  // wedge meets the mu-started path
    double T2 = std::numeric_limits<double>::quiet_NaN();  // vee meets the mu-started path
    std::uint64_t event_count = 0;
    bool censored = false;
};

CoalescenceRecord run_coalescence(const ConductanceProfile& p, int k, CoalescenceMode mode, double max_time,
                                  std::uint64_t seed, std::uint64_t index = 0,
                                  ClockMode clocks = ClockMode::per_column);

// 20 / lambda_1 * log max(k, 2)
double default_max_time(const ConductanceProfile& p, int k);

}  // namespace sepmix
