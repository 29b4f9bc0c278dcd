#pragma once

#include <cmath>
#include <cstdint>

namespace asp {

// Deterministic, platform-independent random source (splitmix64 core).
// std::uniform_real_distribution is implementation-defined, so all sampling
// helpers are written out explicitly; two runs with the same seed produce
// bit-identical streams on any platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : seed_(seed), state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). n == 0 returns 0.
    std::uint64_t uniform_index(std::uint64_t n) {
        if (n == 0) return 0;
        // Multiply-shift; bias is negligible for n << 2^64.
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Standard normal via Box-Muller (cached spare).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double two_pi = 6.283185307179586476925286766559;
        spare_ = r * std::sin(two_pi * u2);
        has_spare_ = true;
        return r * std::cos(two_pi * u2);
    }

    // Independent child stream; derived from the original seed, not from the
    // current state, so forks are stable no matter how much the parent drew.
    Rng child(std::uint64_t tag) const {
        std::uint64_t z = seed_ ^ (0xD1B54A32D192ED03ULL * (tag + 0x632BE59BD9B4E019ULL));
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return Rng(z ^ (z >> 31));
    }

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_ = 0;
    std::uint64_t state_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace asp
