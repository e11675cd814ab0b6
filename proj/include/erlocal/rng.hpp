#pragma once

#include <cstdint>

namespace erlocal {

// SplitMix64 finalizer: a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Child seed for stream `stream` of `seed`. Used for per-trial and
/// per-block seeds so that results never depend on scheduling order.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return mix64(seed ^ mix64(stream ^ 0xD1B54A32D192ED03ULL));
}

/// Counter-based uniform on [0, 1) keyed by (seed, i, j).
constexpr double counter_uniform(std::uint64_t seed, std::uint64_t i, std::uint64_t j) noexcept {
  const std::uint64_t bits = mix64(derive_seed(seed, i) ^ mix64(j + 0x632BE59BD9B4E019ULL));
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace erlocal
