#pragma once

// Counter-based randomness: every draw is a pure function of
// (seed, stream, counter), so results are platform independent and do not
// depend on evaluation order.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace sis {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class CounterRng {
public:
    explicit constexpr CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : key_(mix64(seed ^ mix64(stream + 0x632be59bd9b4e019ULL))) {}

    constexpr std::uint64_t bits(std::uint64_t counter) const noexcept { return mix64(key_ + mix64(counter)); }

    /// Uniform in [0, 1) with 53 random bits.
    constexpr double uniform(std::uint64_t counter) const noexcept {
        return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
    }

    constexpr CounterRng split(std::uint64_t stream) const noexcept { return CounterRng(key_, stream); }

private:
    std::uint64_t key_;
};

/// Sequential wrapper for code that just wants "the next number".
class RngStream {
public:
    explicit RngStream(CounterRng rng) : rng_(rng) {}
    RngStream(std::uint64_t seed, std::uint64_t stream) : rng_(seed, stream) {}
    double uniform() noexcept { return rng_.uniform(counter_++); }
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    std::uint64_t bits() noexcept { return rng_.bits(counter_++); }

private:
    CounterRng rng_;
    std::uint64_t counter_ = 0;
};

/// Halton points in [0,1)^d with a seeded Cranley-Patterson rotation.
class HaltonSequence {
public:
    HaltonSequence(std::size_t dim, std::uint64_t seed) : shift_(dim) {
        const CounterRng rng(seed, 0x4a1701);
        for (std::size_t d = 0; d < dim; ++d) shift_[d] = rng.uniform(d);
    }

    std::vector<double> point(std::uint64_t index) const {
        std::vector<double> p(shift_.size());
        for (std::size_t d = 0; d < p.size(); ++d) {
            const double v = radical_inverse(index, prime(d)) + shift_[d];
            p[d] = v - std::floor(v);
        }
        return p;
    }

private:
    // d-th prime by trial division
    static std::uint64_t prime(std::size_t d) {
        std::uint64_t candidate = 2;
        for (std::size_t found = 0;; ++candidate) {
            bool is_prime = true;
            for (std::uint64_t f = 2; f * f <= candidate; ++f)
                if (candidate % f == 0) {
                    is_prime = false;
                    break;
                }
            if (is_prime && found++ == d) return candidate;
        }
    }

    static double radical_inverse(std::uint64_t i, std::uint64_t base) {
        double inv = 1.0 / static_cast<double>(base), f = inv, r = 0.0;
        while (i > 0) {
            r += f * static_cast<double>(i % base);
            i /= base;
            f *= inv;
        }
        return r;
    }

    std::vector<double> shift_;
};

} // namespace sis
