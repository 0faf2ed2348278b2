#pragma once

// Stable derivation of independent generator streams from a master seed.
//
// trial_seed(m, t)   = mix64(m ^ mix64(t))
// stream_seed(s, k)  = mix64(s + 0x9e3779b97f4a7c15 * (k + 1))
//
// mix64 is the splitmix64 finalizer. These formulas are part of the output
// format: changing them changes every published trace.

#include <cstdint>

namespace beamsim {

constexpr std::uint64_t mix64(std::uint64_t x) {
    std::uint64_t z = x + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial_index) {
    return mix64(master_seed ^ mix64(trial_index));
}

enum class Stream : std::uint64_t {
    channel = 0,      // initial realization, churn, phase drift
    initial_phases = 1,
    noise = 2,
    transmitters = 3,  // perturbations drawn by the transmitters themselves
};

constexpr std::uint64_t stream_seed(std::uint64_t trial, Stream stream) {
    return mix64(trial + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(stream) + 1));
}

}  // namespace beamsim
