// Particle configurations on 1..N, their height functions and the order
// between them. Heights are kept as integers scaled by N: n(x) = N*h(x).
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sepmix/rng.hpp"

namespace sepmix {

class Configuration {
public:
    Configuration() = default;
    explicit Configuration(int n);  // empty

    static Configuration from_string(std::string_view bits);          // "110010"
    static Configuration from_positions(int n, const std::vector<int>& pos);  // 1-based
    static Configuration from_mask(int n, std::uint64_t mask);      // bit x-1 is site x

    int n() const { return n_; }
    int k() const { return k_; }
    bool operator[](int x) const { return (words_[(x - 1) >> 6] >> ((x - 1) & 63)) & 1U; }
    void set(int x, bool v);
    void swap_sites(int x);  // contents of x and x+1

    std::vector<int> positions() const;
    std::string str() const;
    std::uint64_t hash() const;
    std::uint64_t mask() const;  // only for n <= 64

    bool operator==(const Configuration& o) const { return n_ == o.n_ && words_ == o.words_; }

private:
    int n_ = 0;
    int k_ = 0;
    std::vector<std::uint64_t> words_;
};

struct HeightFunction {
    int n = 0;
    int k = 0;
    std::vector<std::int64_t> scaled;  // n(0..N)

    double at(int x) const { return static_cast<double>(scaled[x]) / n; }
    std::vector<double> values() const;
};

HeightFunction height_of(const Configuration& cfg);
Configuration config_of(const HeightFunction& h);

// h^a <= h^b pointwise
bool leq(const HeightFunction& a, const HeightFunction& b);
bool leq(const Configuration& a, const Configuration& b);

enum class Extremal { max, min };
Configuration extremal(int n, int k, Extremal which);

struct MonotoneRuns {
    int q1 = 0;  // longest run of particles (up-steps)
    int q2 = 0;  // longest run of holes (down-steps)
    int q = 0;
};
MonotoneRuns max_monotone_run(const HeightFunction& h);
MonotoneRuns max_monotone_run(const std::vector<std::uint8_t>& occ);  // occ[1..N]

// columns ceil(i*delta*N), i = 1..floor(1/delta)-1
std::vector<int> skeleton_columns(int n, double delta);
std::vector<double> skeleton(const HeightFunction& h, double delta);

std::uint64_t binomial(int n, int k);
double binomial_real(int n, int k);

// all of Omega_{N,k} in colex order of the occupied set (n <= 63)
std::vector<std::uint64_t> enumerate_masks(int n, int k);
std::vector<Configuration> enumerate_states(int n, int k);

// uniform k-subset by partial Fisher-Yates
Configuration sample_uniform(int n, int k, Stream& rng);
void sample_uniform(int n, int k, Stream& rng, std::vector<std::uint8_t>& occ, std::vector<int>& scratch);

}  // namespace sepmix
