#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>

#include "reprobench/types.hpp"

namespace reprobench {

struct SyntheticSpec {
  std::uint64_t seed = 42;
  std::size_t n_docs = 10000;
  std::size_t n_queries = 100;
  std::size_t dims = 128;
  std::size_t clusters = 32;
  /// Norm scale of the isotropic noise around a unit cluster center
  /// (per-coordinate sigma = noise / sqrt(dims)). Queries use half of it.
  double noise = 0.5;
};

/// Seeded Gaussian-mixture corpus on the unit sphere.
///
/// Centers, documents and queries come from independent streams of the
/// seed, so e.g. changing n_queries leaves the documents untouched.
std::pair<DocumentCorpus, QuerySet> gen_synthetic(const SyntheticSpec& spec);

/// n x dims matrix of unit-normalized standard Gaussian rows.
EmbeddingMatrix unit_gaussian_matrix(std::uint64_t seed, std::size_t n, std::size_t dims);

}  // namespace reprobench
