// Monte Carlo estimators: Wilson lower bound, coalescence upper bound, the
// martingale bracket, the weighted-area supermartingale audit, the two-phase
// measure and its covariance audit, and the heat-equation mean check.
#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "sepmix/config.hpp"
#include "sepmix/coupling.hpp"
#include "sepmix/profile.hpp"

namespace sepmix {

class Welford {
public:
    void add(double x) {
        ++n_;
        double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }
    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double sd() const { return std::sqrt(variance()); }
    double se() const { return n_ ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

private:
    std::size_t n_ = 0;
    double mean_ = 0, m2_ = 0;
};

struct Estimate {
    std::string quantity;
    double value = 0, stderr_ = 0;
    std::size_t replicas = 0;
    std::uint64_t seed = 0;
};

unsigned default_threads();

// fn(i) for i in [0, count), results in index order whatever the scheduling
template <class F>
auto run_replicas(std::size_t count, unsigned threads, F&& fn) {
    using R = decltype(fn(std::size_t{0}));
    std::vector<R> out(count);
    if (threads == 0)
        threads = default_threads();
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < count;)
            out[i] = fn(i);
    };
    if (threads <= 1) {
        work();
        return out;
    }
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back(work);
    for (auto& th : pool)
        th.join();
    return out;
}

// ---- starts and the two-phase measure ----------------------------------------

enum class StartKind { wedge, vee, two_phase, stationary };
StartKind parse_start_kind(const std::string& s);
std::string to_string(StartKind s);

// occupancy with sentinels, occ[1..N]
std::vector<std::uint8_t> draw_start(int n, int k, StartKind kind, std::uint64_t seed, std::uint64_t index);

// uniform 2k-subset, keep the k leftmost; needs 2k <= N
std::vector<std::uint8_t> sample_two_phase(int n, int k, Stream& rng);
// P[x occupied], x = 1..N (entry x-1)
std::vector<double> two_phase_marginals(int n, int k);

double wilson_value(const std::vector<std::uint8_t>& occ, const std::vector<double>& g);

// ---- Wilson lower bound --------------------------------------------------------

enum class WilsonThreshold { midway, dense, sparse };
WilsonThreshold parse_wilson_threshold(const std::string& s);

struct WilsonOptions {
    double eps = 0.25;
    std::size_t replicas = 1000;
    std::uint64_t seed = 1;
    std::vector<double> grid;            // empty: 40 points up to 1.5 log k / (2 lambda_1)
    WilsonThreshold threshold = WilsonThreshold::midway;
    double c_eps = 2.0;                  // constant in the sparse threshold
    double sparse_fraction = 1.0 / 64;   // two-phase start below k = N * fraction
    unsigned threads = 0;
};

struct WilsonPoint {
    double t = 0;
    double threshold = 0;
    double mean = 0, se = 0;        // f at time t from the start
    double exact_mean = 0;          // e^{-lambda_1 t} E f(start)
    double p_start = 0, p_mu = 0;   // P[f >= threshold]
    double sigma = 0;
    bool certified = false;
};

struct WilsonResult {
    double estimate = 0;  // largest certified grid time, 0 if none
    bool flagged = false;
    StartKind start = StartKind::wedge;
    double lambda1 = 0;
    std::size_t replicas = 0;
    std::uint64_t seed = 0;
    double stationary_mean = 0, stationary_se = 0;
    std::vector<WilsonPoint> points;
};

WilsonResult wilson_lower_estimate(const ConductanceProfile& p, int k, const WilsonOptions& opt);

// ---- coalescence upper bound ---------------------------------------------------

struct CoalescenceSummary {
    std::vector<double> T;  // sorted
    std::size_t censored = 0;
    double max_time = 0;
    std::uint64_t seed = 0;
    double survival(double t) const;      // P-hat[T > t]
    double survival_se(double t) const;
    double quantile_upper(double eps) const;  // smallest t with P-hat[T > t] <= eps; inf if censored
};

CoalescenceSummary coalescence_times(const ConductanceProfile& p, int k, std::size_t replicas, std::uint64_t seed,
                                     double max_time = 0, unsigned threads = 0);

// ---- martingale bracket --------------------------------------------------------

struct BracketReport {
    double t0 = 0;
    StartKind start = StartKind::wedge;
    std::size_t replicas = 0;
    std::uint64_t seed = 0;
    Estimate jumps;        // sum of squared jumps of M
    Estimate compensator;  // integral of the bracket rate
    Estimate direct;       // M_{t0}^2
    Estimate bound;        // 4 pi^2 / N^2 integral with the sampled edge disagreement
    double bound_trivial = 0;  // same with disagreement <= 1
};

BracketReport bracket_variance(const ConductanceProfile& p, int k, double t0, StartKind start, std::size_t replicas,
                               std::uint64_t seed, unsigned threads = 0);

// ---- weighted-area supermartingale ---------------------------------------------

struct AreaDecayCheck {
    double t = 0, s = 0;
    double mean_next = 0, rhs = 0;
    double diff_mean = 0, diff_se = 0;  // A_{t+s} - e^{-lambda_bar s} A_t, paired
    bool ok = false;
};

struct AreaReport {
    double delta = 0, lambda_bar1 = 0, delta_min = 0;
    std::size_t replicas = 0;
    std::uint64_t seed = 0;
    std::vector<double> grid;
    std::vector<double> mean_A, se_A, mean_H, mean_Q;
    std::vector<AreaDecayCheck> decay;
    double q_threshold = 0;
    double q_exceed_freq = 0;
    std::uint64_t events_checked = 0;
    std::uint64_t negative_events = 0;
    std::uint64_t coalesced_nonzero = 0;
    std::uint64_t h0_nonzero = 0;  // replicas whose mu member started at the wedge with H(0) != 0
    bool decay_ok() const;
};

struct AreaOptions {
    double delta = 0.5;
    std::size_t grid_points = 10;
    double q_exponent = 1.0;  // Q threshold N/k (log N)^{1 + q_exponent}
    unsigned threads = 0;
    bool mu_at_wedge = false; // start the mu member at the wedge too
};

AreaReport area_supermartingale_audit(const ConductanceProfile& p, int k, double horizon, std::size_t replicas,
                                      std::uint64_t seed, const AreaOptions& opt = {});

// fraction of mu-samples with Q > N/k (log N)^{1+q_exponent}
Estimate stationary_q_exceedance(int n, int k, std::size_t samples, std::uint64_t seed, double q_exponent = 1.0);

// ---- two-phase covariance audit ---------------------------------------------------

enum class CovarianceMode { exact, mc };

struct CovarianceReport {
    CovarianceMode mode = CovarianceMode::exact;
    int n = 0, k = 0;
    double delta = 0.1;
    std::size_t samples = 0;
    double sum_abs_cov = 0;
    double bound = 0;       // 2^12 k^{2 - delta}
    double diag_sum = 0;
    std::vector<double> marginals;
    std::vector<double> cov, cov_se;  // N x N row-major
};

CovarianceReport two_phase_covariance_audit(int n, int k, CovarianceMode mode, std::uint64_t seed,
                                            std::size_t samples = 100000, double delta = 0.1,
                                            std::size_t budget = 2000000);

// ---- heat mean ------------------------------------------------------------------

struct HeatReport {
    double t = 0;
    std::size_t replicas = 0;
    std::uint64_t seed = 0;
    std::vector<double> spectral, mc_mean, mc_se;  // x = 0..N
    double max_abs_dev = 0;
    double max_z = 0;
    double envelope = 0;
    double max_spectral = 0;
    bool within_4sigma = false;
    bool envelope_ok = false;
};

// K0 = ceil(sqrt(2 + 3/rho)), upsilon_bar = min resistance
double heat_envelope(const ConductanceProfile& p, int k, double t, double rho = 1.0);

HeatReport heat_mean_check(const ConductanceProfile& p, int k, double t, std::size_t replicas, std::uint64_t seed,
                           unsigned threads = 0);

}  // namespace sepmix
