#pragma once

#include <cstdint>
#include <stdexcept>

namespace edgebal {

// Load value in integer parts-per-million of one node's capacity.
// 1'000'000 == the whole node; values above it express oversubscription.
// All arithmetic on fractions is exact integer arithmetic so that every
// node computes identical plans from identical inputs.
struct ResourceFraction {
    static constexpr std::int64_t kUnit = 1'000'000;
    static constexpr std::int64_t kMax = 10'000'000;

    std::int64_t ppm = 0;

    constexpr ResourceFraction() = default;
    explicit constexpr ResourceFraction(std::int64_t v) : ppm(v) {}

    [[nodiscard]] constexpr bool valid() const { return ppm >= 0 && ppm <= kMax; }
    [[nodiscard]] static ResourceFraction checked(std::int64_t v) {
        ResourceFraction f{v};
        if (!f.valid()) throw std::out_of_range("resource fraction out of [0, 10e6] ppm");
        return f;
    }

    auto operator<=>(const ResourceFraction&) const = default;
};

// Scalarization weights over the four resource dimensions, in ppm summing
// to one unit. The default scores CPU only, matching the simulation setup.
struct ResourceWeights {
    std::int64_t cpu = ResourceFraction::kUnit;
    std::int64_t ram = 0;
    std::int64_t disk = 0;
    std::int64_t network = 0;

    [[nodiscard]] bool valid() const {
        return cpu >= 0 && ram >= 0 && disk >= 0 && network >= 0 &&
               cpu + ram + disk + network == ResourceFraction::kUnit;
    }
    static ResourceWeights cpu_only() { return {}; }
};

}  // namespace edgebal
