#include "sepmix/config.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <cmath>
#include <numeric>

#include "sepmix/errors.hpp"

namespace sepmix {

Configuration::Configuration(int n) : n_(n), k_(0), words_((n + 63) / 64, 0) {
    if (n < 0)
        throw ConfigError("negative segment length");
}

Configuration Configuration::from_string(std::string_view bits) {
    Configuration c(static_cast<int>(bits.size()));
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] == '1')
            c.set(static_cast<int>(i) + 1, true);
        else if (bits[i] != '0')
            throw ConfigError("configuration string must be 0/1");
    }
    return c;
}

Configuration Configuration::from_positions(int n, const std::vector<int>& pos) {
    Configuration c(n);
    for (int x : pos) {
        if (x < 1 || x > n || c[x])
            throw ConfigError("bad particle position " + std::to_string(x));
        c.set(x, true);
    }
    return c;
}

Configuration Configuration::from_mask(int n, std::uint64_t mask) {
    Configuration c(n);
    c.words_[0] = mask;
    c.k_ = std::popcount(mask);
    return c;
}

void Configuration::set(int x, bool v) {
    std::uint64_t& w = words_[(x - 1) >> 6];
    const std::uint64_t bit = std::uint64_t{1} << ((x - 1) & 63);
    if (((w & bit) != 0) == v)
        return;
    w ^= bit;
    k_ += v ? 1 : -1;
}

void Configuration::swap_sites(int x) {
    bool a = (*this)[x], b = (*this)[x + 1];
    if (a != b) {
        set(x, b);
        set(x + 1, a);
    }
}

std::vector<int> Configuration::positions() const {
    std::vector<int> p;
    p.reserve(k_);
    for (int x = 1; x <= n_; ++x)
        if ((*this)[x])
            p.push_back(x);
    return p;
}

std::string Configuration::str() const {
    std::string s(n_, '0');
    for (int x = 1; x <= n_; ++x)
        if ((*this)[x])
            s[x - 1] = '1';
    return s;
}

std::uint64_t Configuration::hash() const {
    std::uint64_t h = splitmix64(static_cast<std::uint64_t>(n_));
    for (auto w : words_)
        h = splitmix64(h ^ w);
    return h;
}

std::uint64_t Configuration::mask() const {
    if (n_ > 64)
        throw CapacityError("mask needs N <= 64");
    return words_.empty() ? 0 : words_[0];
}

std::vector<double> HeightFunction::values() const {
    std::vector<double> v(scaled.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = static_cast<double>(scaled[i]) / n;
    return v;
}

HeightFunction height_of(const Configuration& cfg) {
    HeightFunction h;
    h.n = cfg.n();
    h.k = cfg.k();
    h.scaled.assign(h.n + 1, 0);
    std::int64_t s = 0;
    for (int x = 1; x <= h.n; ++x) {
        s += cfg[x] ? 1 : 0;
        h.scaled[x] = static_cast<std::int64_t>(h.n) * s - static_cast<std::int64_t>(h.k) * x;
    }
    return h;
}

Configuration config_of(const HeightFunction& h) {
    Configuration c(h.n);
    const std::int64_t up = h.n - h.k, down = -h.k;
    if (h.scaled.size() != static_cast<std::size_t>(h.n) + 1 || h.scaled[0] != 0 || h.scaled[h.n] != 0)
        throw InvariantError("height function must vanish at both ends");
    for (int x = 1; x <= h.n; ++x) {
        std::int64_t d = h.scaled[x] - h.scaled[x - 1];
        if (d == up)
            c.set(x, true);
        else if (d != down)
            throw InvariantError("height increment outside {1-k/N, -k/N} at x=" + std::to_string(x));
    }
    return c;
}

bool leq(const HeightFunction& a, const HeightFunction& b) {
    if (a.n != b.n || a.k != b.k)
        throw ConfigError("order comparison needs equal (N,k)");
    for (int x = 1; x <= a.n; ++x)
        if (a.scaled[x] > b.scaled[x])
            return false;
    return true;
}

bool leq(const Configuration& a, const Configuration& b) {
    if (a.n() != b.n() || a.k() != b.k())
        throw ConfigError("order comparison needs equal (N,k)");
    int sa = 0, sb = 0;
    for (int x = 1; x <= a.n(); ++x) {
        sa += a[x];
        sb += b[x];
        if (sa > sb)
            return false;
    }
    return true;
}

Configuration extremal(int n, int k, Extremal which) {
    if (k < 0 || k > n)
        throw ConfigError("need 0 <= k <= N");
    Configuration c(n);
    for (int i = 1; i <= k; ++i)
        c.set(which == Extremal::max ? i : n - k + i, true);
    return c;
}

MonotoneRuns max_monotone_run(const std::vector<std::uint8_t>& occ) {
    MonotoneRuns r;
    int run = 0;
    int prev = -1;
    for (std::size_t x = 1; x < occ.size(); ++x) {
        int v = occ[x];
        run = (v == prev) ? run + 1 : 1;
        prev = v;
        if (v)
            r.q1 = std::max(r.q1, run);
        else
            r.q2 = std::max(r.q2, run);
    }
    r.q = std::max(r.q1, r.q2);
    return r;
}

MonotoneRuns max_monotone_run(const HeightFunction& h) {
    std::vector<std::uint8_t> occ(h.n + 1, 0);
    for (int x = 1; x <= h.n; ++x)
        occ[x] = h.scaled[x] - h.scaled[x - 1] == h.n - h.k;
    return max_monotone_run(occ);
}

std::vector<int> skeleton_columns(int n, double delta) {
    if (!(delta > 0 && delta < 1))
        throw ConfigError("skeleton spacing must lie in (0,1)");
    const int m = static_cast<int>(std::floor(1.0 / delta + 1e-12));
    std::vector<int> cols;
    for (int i = 1; i <= m - 1; ++i) {
        double v = i * delta * n;
        cols.push_back(static_cast<int>(std::ceil(v - 1e-9 * std::max(1.0, v))));
    }
    return cols;
}

std::vector<double> skeleton(const HeightFunction& h, double delta) {
    std::vector<double> out;
    for (int x : skeleton_columns(h.n, delta))
        out.push_back(h.at(x));
    return out;
}

std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n)
        return 0;
    k = std::min(k, n - k);
    unsigned __int128 r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
        if (r > std::numeric_limits<std::uint64_t>::max())
            throw CapacityError("binomial(" + std::to_string(n) + "," + std::to_string(k) + ") overflows");
    }
    return static_cast<std::uint64_t>(r);
}

double binomial_real(int n, int k) {
    if (k < 0 || k > n)
        return 0;
    return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

std::vector<std::uint64_t> enumerate_masks(int n, int k) {
    if (n > 63)
        throw CapacityError("enumeration needs N <= 63");
    if (k < 0 || k > n)
        throw ConfigError("need 0 <= k <= N");
    std::vector<std::uint64_t> out;
    out.reserve(binomial(n, k));
    if (k == 0) {
        out.push_back(0);
        return out;
    }
    // Gosper's hack walks k-subsets in colex order
    std::uint64_t v = (std::uint64_t{1} << k) - 1;
    const std::uint64_t limit = std::uint64_t{1} << n;
    while (v < limit) {
        out.push_back(v);
        std::uint64_t t = v | (v - 1);
        v = (t + 1) | (((~t & -~t) - 1) >> (std::countr_zero(v) + 1));
    }
    return out;
}

std::vector<Configuration> enumerate_states(int n, int k) {
    std::vector<Configuration> out;
    for (auto m : enumerate_masks(n, k))
        out.push_back(Configuration::from_mask(n, m));
    return out;
}

void sample_uniform(int n, int k, Stream& rng, std::vector<std::uint8_t>& occ, std::vector<int>& scratch) {
    scratch.resize(n);
    std::iota(scratch.begin(), scratch.end(), 1);
    occ.assign(n + 2, 0);
    for (int i = 0; i < k; ++i) {
        int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
        std::swap(scratch[i], scratch[j]);
        occ[scratch[i]] = 1;
    }
}

Configuration sample_uniform(int n, int k, Stream& rng) {
    std::vector<std::uint8_t> occ;
    std::vector<int> scratch;
    sample_uniform(n, k, rng, occ, scratch);
    Configuration c(n);
    for (int x = 1; x <= n; ++x)
        if (occ[x])
            c.set(x, true);
    return c;
}

}  // namespace sepmix
