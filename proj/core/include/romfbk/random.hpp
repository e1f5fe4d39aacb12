#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace romfbk {

/// Named sub-seed derived from the global seed (FNV-1a of the name, mixed
/// with splitmix64).
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view name);

/// Uniform double in [0, 1) from the top 53 bits; portable across standard
/// library implementations.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// Standard normal draw via Box-Muller on uniform01; portable.
double standard_normal(std::mt19937_64& rng);

}  // namespace romfbk
