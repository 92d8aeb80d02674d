#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace reprobench {

enum class Precision : std::uint8_t { FP32 = 0, FP16 = 1, BF16 = 2, TF32 = 3 };

std::string_view to_string(Precision p);
/// Accepts "FP32"/"fp32" etc.
Precision parse_precision(std::string_view name);

/// Row-major block of finite float32 values.
///
/// A matrix tagged with a narrow precision stores full-width floats that
/// all lie on that format's grid; the constructor checks this.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t rows, std::size_t dims, std::vector<float> data,
                  Precision tag = Precision::FP32);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dims() const noexcept { return dims_; }
  Precision precision() const noexcept { return tag_; }
  std::span<const float> data() const noexcept { return data_; }
  std::span<const float> row(std::size_t i) const noexcept {
    return std::span<const float>(data_).subspan(i * dims_, dims_);
  }
  /// Rows [first, first + count) as a new matrix with the same tag.
  EmbeddingMatrix slice(std::size_t first, std::size_t count) const;

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t dims_ = 1;
  std::vector<float> data_;
  Precision tag_ = Precision::FP32;
};

/// Vectors with unique opaque ids, one per row.
class VectorSet {
 public:
  VectorSet() = default;
  VectorSet(std::vector<std::string> ids, EmbeddingMatrix embeddings);

  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const EmbeddingMatrix& embeddings() const noexcept { return embeddings_; }
  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t dims() const noexcept { return embeddings_.dims(); }
  bool empty() const noexcept { return ids_.empty(); }
  VectorSet slice(std::size_t first, std::size_t count) const;

  friend bool operator==(const VectorSet&, const VectorSet&) = default;

 private:
  std::vector<std::string> ids_;
  EmbeddingMatrix embeddings_;
};

struct DocumentCorpus : VectorSet {
  using VectorSet::VectorSet;
  DocumentCorpus(VectorSet v) : VectorSet(std::move(v)) {}  // NOLINT(google-explicit-constructor)
};

struct QuerySet : VectorSet {
  using VectorSet::VectorSet;
  QuerySet(VectorSet v) : VectorSet(std::move(v)) {}  // NOLINT(google-explicit-constructor)
};

/// "d000042"-style ids whose byte order equals numeric order.
std::string padded_id(char prefix, std::size_t index, std::size_t total);

enum class MetricKind : std::uint8_t { Distance, InnerProduct };

struct ResultEntry {
  std::string doc_id;
  double score = 0.0;
  friend bool operator==(const ResultEntry&, const ResultEntry&) = default;
};

struct ResultList {
  std::string query_id;
  std::vector<ResultEntry> entries;
  /// Fewer than k documents were available.
  bool short_list = false;
  friend bool operator==(const ResultList&, const ResultList&) = default;
};

/// Strict weak order defining the canonical result order: better score
/// first, ties broken by ascending doc_id bytes.
bool canonical_less(const ResultEntry& a, const ResultEntry& b, MetricKind metric) noexcept;

/// Sorts entries into canonical order. Throws ValidationError on a
/// non-finite score. The output does not depend on the input order.
std::vector<ResultEntry> canonical_sort(std::vector<ResultEntry> entries, MetricKind metric);

/// Bit-level equality of two result lists (ids, order and score bits).
bool identical_results(const ResultList& a, const ResultList& b) noexcept;

}  // namespace reprobench
