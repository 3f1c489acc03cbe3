#pragma once

#include <cstdint>
#include <random>

namespace edgebal::simnet {

// Deterministic random stream. mt19937_64's output sequence is pinned by
// the standard; bounded sampling is done by rejection here because the
// standard distributions are not portable across library implementations.
class DetRng {
public:
    DetRng(std::uint64_t seed, std::uint64_t stream) : eng_(mix(seed ^ (stream * kStreamSalt))) {}

    std::uint64_t next() { return eng_(); }

    // Uniform integer in [lo, hi], inclusive.
    std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi) {
        std::uint64_t span = hi - lo + 1;
        if (span == 0) return next();  // full range
        std::uint64_t limit = std::uint64_t(-1) - (std::uint64_t(-1) % span);
        std::uint64_t v;
        do {
            v = next();
        } while (v >= limit);
        return lo + v % span;
    }

    std::int64_t uniform_i64(std::int64_t lo, std::int64_t hi) {
        return static_cast<std::int64_t>(
            uniform(static_cast<std::uint64_t>(lo), static_cast<std::uint64_t>(hi)));
    }

    // True with probability p_ppm / 1'000'000.
    bool bernoulli_ppm(std::int64_t p_ppm) {
        if (p_ppm <= 0) return false;
        if (p_ppm >= 1'000'000) return true;
        return uniform(0, 999'999) < static_cast<std::uint64_t>(p_ppm);
    }

private:
    static constexpr std::uint64_t kStreamSalt = 0x9e3779b97f4a7c15ULL;

    // splitmix64 finalizer; spreads weak seeds before feeding the engine.
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::mt19937_64 eng_;
};

}  // namespace edgebal::simnet
