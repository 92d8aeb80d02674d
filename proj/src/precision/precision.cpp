#include "reprobench/precision.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <string>

#include "reprobench/errors.hpp"
#include "reprobench/metrics.hpp"

namespace reprobench {

namespace {

int min_normal_exponent(const PrecisionFormat& f) noexcept {
  return 2 - (1 << (f.exponent_bits - 1));  // -14 for 5 bits, -126 for 8 bits
}

int max_exponent(const PrecisionFormat& f) noexcept { return (1 << (f.exponent_bits - 1)) - 1; }

// Unbiased exponent of the binade holding |v|, floored at the smallest
// normal exponent so subnormals share its spacing.
int binade(double v, const PrecisionFormat& f) noexcept {
  int e = 0;
  (void)std::frexp(v, &e);
  return std::max(e - 1, min_normal_exponent(f));
}

}  // namespace

PrecisionFormat format_of(Precision tag) noexcept {
  switch (tag) {
    case Precision::FP32: return {Precision::FP32, 23, 8, true};
    case Precision::FP16: return {Precision::FP16, 10, 5, true};
    case Precision::BF16: return {Precision::BF16, 7, 8, true};
    case Precision::TF32: return {Precision::TF32, 10, 8, true};
  }
  return {Precision::FP32, 23, 8, true};
}

double max_finite(Precision tag) noexcept {
  const auto f = format_of(tag);
  return std::ldexp(2.0 - std::ldexp(1.0, -f.mantissa_bits), max_exponent(f));
}

double grid_spacing(float x, Precision tag) noexcept {
  const auto f = format_of(tag);
  const double v = std::fabs(static_cast<double>(x));
  const int e = v == 0.0 ? min_normal_exponent(f) : binade(v, f);
  return std::ldexp(1.0, e - f.mantissa_bits);
}

float quantize_value(float x, Precision tag) {
  if (std::isnan(x)) throw ValidationError("quantize: NaN input");
  if (tag == Precision::FP32 || x == 0.0f || std::isinf(x)) {
    if (std::isinf(x) && tag != Precision::FP32) {
      return static_cast<float>(std::copysign(max_finite(tag), static_cast<double>(x)));
    }
    return x;
  }
  const auto f = format_of(tag);
  const double v = static_cast<double>(x);
  const double spacing = std::ldexp(1.0, binade(std::fabs(v), f) - f.mantissa_bits);
  // Division and multiplication by a power of two are exact; nearbyint
  // rounds half to even under the default rounding mode.
  double q = std::nearbyint(v / spacing) * spacing;
  const double limit = max_finite(tag);
  if (std::fabs(q) > limit) q = std::copysign(limit, v);
  return static_cast<float>(q);
}

EmbeddingMatrix quantize(const EmbeddingMatrix& m, Precision tag) {
  if (m.precision() != Precision::FP32) {
    throw ValidationError("quantize: input must be FP32, got " + std::string(to_string(m.precision())));
  }
  if (tag == Precision::FP32) return m;
  std::vector<float> out;
  out.reserve(m.data().size());
  for (float v : m.data()) out.push_back(quantize_value(v, tag));
  return EmbeddingMatrix(m.rows(), m.dims(), std::move(out), tag);
}

DriftMatrix drift_matrix(const EmbeddingMatrix& m) {
  DriftMatrix dm;
  std::array<EmbeddingMatrix, 4> copies;
  for (std::size_t i = 0; i < 4; ++i) copies[i] = quantize(m, dm.formats[i]);
  for (std::size_t i = 0; i < 4; ++i) {
    dm.l2[i][i] = 0.0;
    dm.cosine[i][i] = 1.0;
    for (std::size_t j = i + 1; j < 4; ++j) {
      const auto drift = embedding_drift(copies[i], copies[j]);
      dm.l2[i][j] = dm.l2[j][i] = drift.mean_l2;
      dm.cosine[i][j] = dm.cosine[j][i] = drift.mean_cosine;
    }
  }
  return dm;
}

ConfigReproStats same_config_repro(const EmbeddingSource& source, Precision format,
                                   const SeedPolicy& policy, std::size_t n_runs) {
  if (n_runs < 2) throw ValidationError("same_config_repro: n_runs must be >= 2");
  ConfigReproStats stats;
  stats.format = format;
  stats.policy = policy;
  stats.n_runs = n_runs;

  std::vector<EmbeddingMatrix> runs;
  runs.reserve(n_runs);
  for (std::size_t r = 0; r < n_runs; ++r) {
    const std::uint64_t seed = effective_seed(policy, r);
    const auto t0 = std::chrono::steady_clock::now();
    runs.push_back(quantize(source(seed), format));
    const auto t1 = std::chrono::steady_clock::now();
    stats.effective_seeds.push_back(seed);
    stats.latency_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }

  double l2_sum = 0.0;
  double cos_sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < n_runs; ++a) {
    for (std::size_t b = a + 1; b < n_runs; ++b) {
      const auto drift = embedding_drift(runs[a], runs[b]);
      l2_sum += drift.mean_l2;
      cos_sum += drift.mean_cosine;
      stats.reproducible = stats.reproducible && runs[a] == runs[b];
      ++pairs;
    }
  }
  stats.mean_l2 = l2_sum / static_cast<double>(pairs);
  stats.mean_cosine = cos_sum / static_cast<double>(pairs);
  return stats;
}

}  // namespace reprobench
