// Keyed random streams. A stream is addressed by (seed, tag, index), so
// profiles, trajectories and replicas never draw from overlapping sequences.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace sepmix {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// purpose tags
enum class Tag : std::uint64_t {
    profile = 0x70726f66,
    trajectory = 0x7472616a,
    stationary = 0x73746174,
    clocks = 0x636c6f63,
    two_phase = 0x74776f70,
    replica = 0x7265706c,
};

inline std::uint64_t derive_key(std::uint64_t seed, Tag tag, std::uint64_t index) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(tag));
    return splitmix64(h ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

// counter-based uniform in [0,1): a pure function of the key
inline double keyed_uniform(std::uint64_t seed, Tag tag, std::uint64_t index) {
    return static_cast<double>(derive_key(seed, tag, index) >> 11) * 0x1.0p-53;
}

// xoshiro256** seeded from a derived key
class Stream {
public:
    using result_type = std::uint64_t;

    Stream(std::uint64_t seed, Tag tag, std::uint64_t index) {
        std::uint64_t k = derive_key(seed, tag, index);
        for (auto& w : s_) {
            k = splitmix64(k);
            w = k;
        }
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        const std::uint64_t out = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return out;
    }

    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    // rate-1 exponential; 1-u is in (0,1]
    double exponential() { return -std::log1p(-uniform()); }

    bool coin() { return ((*this)() >> 63) != 0; }

    // uniform integer in [0, n), Lemire's method
    std::uint64_t below(std::uint64_t n) {
        unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            const std::uint64_t thresh = (0 - n) % n;
            while (lo < thresh) {
                m = static_cast<unsigned __int128>((*this)()) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

}  // namespace sepmix
