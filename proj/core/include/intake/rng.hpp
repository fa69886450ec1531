#pragma once

#include <cmath>
#include <cstdint>

namespace intake {

// Deterministic RNG utilities. Everything that needs randomness derives a
// stream key from (seed, epoch, step, index, ...) through mix64, so any step
// of a run can be replayed bit-identically without replaying what came
// before it. std::uniform_*_distribution is deliberately avoided: its output
// is not pinned across standard library implementations.

// splitmix64 finalizer. Good avalanche, cheap, stable across platforms.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    return mix64(mix64(a) ^ (0x9e3779b97f4a7c15ULL + b));
}

constexpr std::uint64_t mix64(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix64(mix64(a, b) ^ (0xd6e8feb86659fd93ULL + c));
}

constexpr std::uint64_t mix64(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                              std::uint64_t d) {
    return mix64(mix64(a, b, c) ^ (0xa0761d6478bd642fULL + d));
}

// Counter-based generator: state advances by hashing, so copies are cheap
// and two generators built from the same key always agree.
class Rng {
public:
    explicit Rng(std::uint64_t key) : state_(mix64(key, 0x243f6a8885a308d3ULL)) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_);
    }

    // Uniform in [0, 1). 53 mantissa bits, same value on every platform.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [lo, hi).
    double next_double(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // Uniform integer in [0, n). Plain modulo: n is always tiny relative to
    // 2^64 here, so the bias is far below any tolerance in this project.
    std::uint64_t next_below(std::uint64_t n) {
        return n == 0 ? 0 : next_u64() % n;
    }

    // Standard normal via Box-Muller. Deterministic within a build, which is
    // what the replay guarantees require.
    double next_gaussian() {
        double u1 = next_double();
        double u2 = next_double();
        if (u1 < 1e-300) u1 = 1e-300;
        constexpr double two_pi = 6.283185307179586476925286766559;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

private:
    std::uint64_t state_;
};

// FNV-1a over bytes. Used for content hashes (template banks, schemas) that
// must be stable across runs and platforms.
constexpr std::uint64_t fnv1a(const char* data, std::size_t n,
                              std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (std::size_t i = 0; i < n; ++i) {
        h ^= static_cast<unsigned char>(data[i]);
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace intake
