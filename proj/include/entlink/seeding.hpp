#pragma once

#include <cstdint>

namespace entlink {

// SplitMix64 finalizer. Used to derive independent per-trial / per-stream
// seeds from a root seed so results never depend on scheduling order.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index,
                                    std::uint64_t stream = 0) noexcept {
  return mix_seed(mix_seed(root ^ mix_seed(index)) + stream);
}

}  // namespace entlink
