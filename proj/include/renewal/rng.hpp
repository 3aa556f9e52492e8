#pragma once

#include <cstdint>
#include <random>

namespace renewal {

/// All simulation randomness comes from std::mt19937_64, whose output
/// sequence is fixed by the C++ standard. Streams are keyed by
/// (seed, index) through a SplitMix64 finalizer, and every variate is built
/// from raw 64-bit draws by the conversions below (never by the
/// implementation-defined std distributions), so results are identical
/// across platforms and independent of thread scheduling.
using Engine = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for sub-stream `index` of `seed`.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline Engine make_stream(std::uint64_t seed, std::uint64_t index) {
  return Engine(mix_seed(seed, index));
}

/// Uniform on [0, 1): top 53 bits.
inline double uniform01(Engine& e) {
  return static_cast<double>(e() >> 11) * 0x1.0p-53;
}

/// Uniform on the open interval (0, 1).
inline double uniform_open(Engine& e) {
  return (static_cast<double>(e() >> 11) + 0.5) * 0x1.0p-53;
}

__extension__ using uint128 = unsigned __int128;

/// Uniform integer in [0, n), n >= 1 (Lemire's multiply-and-reject).
inline std::uint64_t uniform_index(Engine& e, std::uint64_t n) {
  uint128 m = static_cast<uint128>(e()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<uint128>(e()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace renewal
