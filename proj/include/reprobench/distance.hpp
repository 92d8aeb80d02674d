#pragma once

#include <cstddef>
#include <span>

namespace reprobench {

// Scoring kernels shared by every index. Accumulation is in double over
// four interleaved lanes (lane = i mod 4), combined as (l0 + l1) + (l2 + l3).
// The fixed order is part of the contract: scores are bit-identical on any
// platform that honours IEEE-754 double arithmetic without contraction.

inline double l2_squared(std::span<const float> a, std::span<const float> b) noexcept {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  const std::size_t n = a.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (std::size_t j = 0; j < 4; ++j) {
      const double d = static_cast<double>(a[i + j]) - static_cast<double>(b[i + j]);
      lane[j] += d * d;
    }
  }
  for (; i < n; ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    lane[i % 4] += d * d;
  }
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

inline double dot(std::span<const float> a, std::span<const float> b) noexcept {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  const std::size_t n = a.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (std::size_t j = 0; j < 4; ++j) {
      lane[j] += static_cast<double>(a[i + j]) * static_cast<double>(b[i + j]);
    }
  }
  for (; i < n; ++i) lane[i % 4] += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

}  // namespace reprobench
