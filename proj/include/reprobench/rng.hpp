#pragma once

#include <cstdint>

namespace reprobench {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-based 64-bit generator ("CBR64").
///
/// The i-th output (i = 1, 2, ...) of a generator keyed by `key` is
///
///     mix64(key + i * 0x9E3779B97F4A7C15)
///
/// and the key for `(seed, stream)` is
///
///     mix64(seed ^ mix64(stream + 0x632BE59BD9B4E019)).
///
/// The full state is the pair (key, counter), so a generator can be
/// serialized, resumed or fast-forwarded exactly. Nothing here depends on
/// the standard library's engines or distributions, which are not
/// guaranteed to agree across implementations.
class CounterRng {
 public:
  static constexpr std::uint64_t kIncrement = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kStreamSalt = 0x632BE59BD9B4E019ULL;

  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : key_(derive_key(seed, stream)) {}

  static CounterRng from_state(std::uint64_t key, std::uint64_t counter) noexcept {
    CounterRng rng(0);
    rng.key_ = key;
    rng.counter_ = counter;
    return rng;
  }

  static constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) noexcept {
    return mix64(seed ^ mix64(stream + kStreamSalt));
  }

  std::uint64_t next_u64() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * kIncrement);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double next_double() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in (0, 1].
  double next_open_closed() noexcept {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n) by 128-bit multiply-high. n must be > 0.
  std::uint64_t next_below(std::uint64_t n) noexcept {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Standard normal via Box-Muller (cosine branch). Consumes two outputs.
  double next_gaussian() noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace reprobench
