#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "reprobench/config.hpp"
#include "reprobench/types.hpp"

namespace reprobench {

struct PrecisionFormat {
  Precision tag;
  int mantissa_bits;
  int exponent_bits;
  bool has_subnormals;
};

/// FP32 (23, 8), FP16 (10, 5), BF16 (7, 8), TF32 (10, 8).
PrecisionFormat format_of(Precision tag) noexcept;
inline constexpr std::array<Precision, 4> kAllPrecisions = {Precision::FP32, Precision::FP16,
                                                            Precision::BF16, Precision::TF32};

/// Largest finite magnitude of the format.
double max_finite(Precision tag) noexcept;

/// Rounds a float onto the format grid, half to even. Magnitudes beyond
/// the largest finite value clamp to it (sign kept). FP16 keeps
/// subnormals; the 8-bit-exponent formats inherit float32's range.
/// Throws ValidationError for NaN.
float quantize_value(float x, Precision tag);

/// Distance between adjacent grid points around x (x on the grid or not).
double grid_spacing(float x, Precision tag) noexcept;

/// Element-wise quantize_value. Input must be tagged FP32.
EmbeddingMatrix quantize(const EmbeddingMatrix& m, Precision tag);

struct DriftMatrix {
  std::array<Precision, 4> formats = kAllPrecisions;
  std::array<std::array<double, 4>, 4> l2{};
  std::array<std::array<double, 4>, 4> cosine{};
};

/// Mean row-wise L2 / cosine between every pair of quantized copies of m.
DriftMatrix drift_matrix(const EmbeddingMatrix& m);

/// Produces an embedding matrix for one run. The argument is the run's
/// effective seed; sources that ignore it are run-seed independent.
using EmbeddingSource = std::function<EmbeddingMatrix(std::uint64_t run_seed)>;

struct ConfigReproStats {
  Precision format = Precision::FP32;
  SeedPolicy policy;
  std::size_t n_runs = 0;
  double mean_l2 = 0.0;      // mean over run pairs of embedding_drift L2
  double mean_cosine = 1.0;  // mean over run pairs of embedding_drift cosine
  bool reproducible = true;  // every pair bit-identical
  std::vector<std::uint64_t> effective_seeds;
  std::vector<double> latency_ms;  // generation + quantization per run
};

/// Regenerates and quantizes n_runs times under the policy and compares
/// all run pairs.
ConfigReproStats same_config_repro(const EmbeddingSource& source, Precision format,
                                   const SeedPolicy& policy, std::size_t n_runs);

}  // namespace reprobench
