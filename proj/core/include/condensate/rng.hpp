#pragma once

#include <cstdint>

namespace condensate {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30U)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27U)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31U);
}

/// Counter-based random stream.
///
/// Output k of a stream is mix64(key + (k + 1) * golden), i.e. SplitMix64 addressed by
/// counter, so any draw can be reproduced from (key, k) alone. substream(seed, i) gives
/// the stream used for work item i; split() derives independent child streams.
class Stream {
 public:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

  explicit Stream(std::uint64_t key) noexcept : key_(key) {}

  static Stream substream(std::uint64_t seed, std::uint64_t index) noexcept {
    return Stream(mix64(mix64(seed) ^ mix64(index * kGolden + 0x6a09e667f3bcc909ULL)));
  }

  Stream split(std::uint64_t tag) const noexcept {
    return Stream(mix64(key_ ^ mix64(tag + 0x3c6ef372fe94f82bULL)));
  }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * kGolden);
  }

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept { return (static_cast<double>(next_u64() >> 11U) + 0.5) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal() noexcept;

  /// Exponential with the given rate.
  double exponential(double rate) noexcept;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

/// Standard normal conditioned on z >= lower.
///
/// For lower > 0 uses exponential-proposal rejection with the optimal rate
/// (lower + sqrt(lower^2 + 4)) / 2, which stays efficient for thresholds far in the
/// tail. For lower <= 0 plain rejection from the normal is used.
double truncated_normal_lower(Stream& rng, double lower) noexcept;

}  // namespace condensate
