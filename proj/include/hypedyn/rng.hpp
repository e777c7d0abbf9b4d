#pragma once

#include <cstdint>
#include <initializer_list>

namespace hypedyn {

/// SplitMix64 finalizer (Steele, Lea & Flood 2014). Bijective on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derive a child seed from a base seed and a sequence of indices.
///
/// Each index is folded in with a SplitMix64 round, so the result depends on
/// the index values and their order but never on evaluation order across
/// threads. Used for per-(grid value, run) seeds in ensemble scans.
constexpr std::uint64_t mix_seed(std::uint64_t base,
                                 std::initializer_list<std::uint64_t> indices) noexcept {
    std::uint64_t h = splitmix64(base);
    for (std::uint64_t i : indices) {
        h = splitmix64(h ^ splitmix64(i + 0x632be59bd9b4e019ULL));
    }
    return h;
}

}  // namespace hypedyn
