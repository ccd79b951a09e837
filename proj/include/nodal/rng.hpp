#pragma once

#include <cstdint>
#include <random>

namespace nodal {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; a bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Seed of the i-th independent stream. Depends only on (seed, index), so
// per-sample draws do not depend on how samples are scheduled over workers.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) noexcept;

Rng make_stream(std::uint64_t seed, std::uint64_t index);

}  // namespace nodal
