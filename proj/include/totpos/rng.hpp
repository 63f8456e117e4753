#pragma once

#include <cmath>
#include <cstdint>

namespace totpos {

/// Counter-based generator: the k-th output is a SplitMix64 mix of
/// seed + k * golden gamma, so identical (algorithm, seed) pairs reproduce
/// identical streams bit-for-bit. Integer path only; no hidden global state.
class SeededRng {
public:
    static constexpr const char* algorithm = "splitmix64";

    explicit SeededRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t counter() const { return counter_; }

    std::uint64_t next_u64() {
        std::uint64_t z = seed_ + (++counter_) * 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1), 53 mantissa bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via the polar (Marsaglia) method; pairs are cached.
    double next_normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * next_double() - 1.0;
            v = 2.0 * next_double() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Stable per-task seed derivation for sweep/replicate task grids.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t task_index) {
    return base + task_index;
}

}  // namespace totpos
