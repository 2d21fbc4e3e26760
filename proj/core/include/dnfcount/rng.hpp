#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "dnfcount/stats.hpp"

namespace dnfc {

// SplitMix64, used only to derive per-stream seeds from a master seed.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic 64-bit generator. Streams are derived with SplitMix64 from
// (master seed, stream index), so parallel workers get independent,
// reproducible sequences. Core generator: mt19937_64.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    static Rng stream(uint64_t master, uint64_t index) {
        uint64_t s = master + 0x9e3779b97f4a7c15ULL * (index + 1);
        return Rng(splitmix64(s));
    }

    uint64_t next_u64() { return gen_(); }

    // uniform in [0,1), 53-bit resolution
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // uniform integer in [lo, hi] inclusive
    int uniform_int(int lo, int hi) {
        uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
        uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return lo + static_cast<int>(x % span);
    }

    bool coin() { return (gen_() & 1u) != 0; }

    // standard normal via inverse transform
    double normal() {
        double u;
        do {
            u = uniform();
        } while (u <= 0.0);
        return inverse_normal_cdf(u);
    }

    // Exp(1) via inverse transform
    double exponential() {
        double u = uniform();
        return -std::log(1.0 - u);
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace dnfc
