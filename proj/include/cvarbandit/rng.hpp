#pragma once

#include <cstdint>
#include <random>

namespace cvarbandit {

using Rng = std::mt19937_64;

/// Labels of the disjoint random streams used inside one run.
enum class Stream : std::uint64_t {
    arm_params = 1,
    loss_draws = 2,
    variance_shocks = 3,
    exploration = 4,
    tie_break = 5,
};

/// splitmix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Counter-based split: the stream is a pure function of (seed, run, label, cell).
/// Different tuples give statistically independent engines.
inline Rng make_stream(std::uint64_t master_seed, std::uint64_t run, Stream label,
                       std::uint64_t cell = 0) {
    std::uint64_t h = mix64(master_seed);
    h = mix64(h ^ mix64(run + 0x632be59bd9b4e019ULL));
    h = mix64(h ^ mix64(static_cast<std::uint64_t>(label) * 0x8cb92ba72f3d8dd7ULL));
    h = mix64(h ^ mix64(cell + 0x2545f4914f6cdd1dULL));
    std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32),
                      static_cast<std::uint32_t>(run), static_cast<std::uint32_t>(label)};
    return Rng(seq);
}

}  // namespace cvarbandit
