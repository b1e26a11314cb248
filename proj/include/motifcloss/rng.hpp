#pragma once

#include <cstdint>
#include <limits>

namespace motifcloss {

// Counter-friendly SplitMix64 stream (Vigna's public-domain mixer).
//
// Every stochastic routine in the library owns an RngStream derived from
// (user seed, fixed salt, task index).  Because derivation is a pure function
// of those values, work items can be handed to any thread in any order and
// still draw identical variates -- the basis of the byte-for-byte determinism
// guarantee.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(seed) {}

  // Statelessly derives an independent stream for a (salt, index) pair.
  static RngStream derive(std::uint64_t seed, std::uint64_t salt,
                          std::uint64_t index = 0) {
    std::uint64_t s = mix(seed + 0x9e3779b97f4a7c15ull);
    s = mix(s ^ mix(salt + 0xbf58476d1ce4e5b9ull));
    s = mix(s ^ mix(index + 0x94d049bb133111ebull));
    return RngStream(s);
  }

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform on the half-open interval (0, 1]; never returns 0.
  double uniform_positive() { return 1.0 - uniform01(); }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, bound).  Lemire multiply-shift; the O(2^-64)
  // modulo bias is irrelevant here and rejection-free draws keep streams
  // aligned across platforms.
  std::uint64_t below(std::uint64_t bound) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * bound) >> 64);
  }

  bool coin() { return (next() >> 63) != 0; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

// Fixed salts keeping the library's independent consumers on disjoint streams.
namespace rng_salt {
inline constexpr std::uint64_t kClossSample = 0x10;
inline constexpr std::uint64_t kRandomize = 0x20;
inline constexpr std::uint64_t kEnsembleMember = 0x21;
inline constexpr std::uint64_t kBoundTrial = 0x30;
inline constexpr std::uint64_t kReference = 0x40;
inline constexpr std::uint64_t kCondenseRound = 0x50;
}  // namespace rng_salt

}  // namespace motifcloss
