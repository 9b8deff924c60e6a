#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace d2dsim {

// splitmix64 step; used to derive independent stream seeds from a run seed.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t mix_seed(uint64_t a, uint64_t b) {
    return splitmix64(a ^ splitmix64(b));
}

// Deterministic random source. The distribution transforms are implemented
// here (not via std::*_distribution, whose output is implementation-defined)
// so that a given seed produces the same draw sequence on every toolchain.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform_real(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // Uniform integer on [lo, hi], unbiased via rejection.
    int64_t uniform_int(int64_t lo, int64_t hi) {
        if (lo > hi) throw std::invalid_argument("uniform_int: lo > hi");
        uint64_t range = static_cast<uint64_t>(hi) - static_cast<uint64_t>(lo) + 1;
        if (range == 0) return static_cast<int64_t>(next_u64());  // full 64-bit span
        uint64_t rem = (std::numeric_limits<uint64_t>::max() % range + 1) % range;
        uint64_t v;
        do {
            v = next_u64();
        } while (rem != 0 && v > std::numeric_limits<uint64_t>::max() - rem);
        return lo + static_cast<int64_t>(v % range);
    }

    // Box-Muller; the spare variate is cached.
    double normal(double mean, double stddev) {
        if (has_spare_) {
            has_spare_ = false;
            return mean + stddev * spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log1p(-u1));
        double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return mean + stddev * r * std::cos(a);
    }

    double exponential(double rate = 1.0) {
        return -std::log1p(-uniform01()) / rate;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace d2dsim
