#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "reprobench/bytes.hpp"
#include "reprobench/config.hpp"
#include "reprobench/types.hpp"

namespace reprobench {

/// nlist x d cluster centers.
struct CentroidSet {
  std::size_t nlist = 0;
  std::size_t dims = 0;
  std::vector<float> data;

  std::span<const float> row(std::size_t i) const {
    return std::span<const float>(data).subspan(i * dims, dims);
  }
  friend bool operator==(const CentroidSet&, const CentroidSet&) = default;
};

/// Seeded k-means++ initialization followed by exactly `iters` Lloyd
/// steps. Ties go to the lower centroid index; a cluster that empties is
/// re-seeded with the point farthest from its current centroid.
CentroidSet kmeans(const EmbeddingMatrix& data, std::size_t nlist, std::size_t iters,
                   std::uint64_t seed);

/// Mean L2 between greedily matched centroids, averaged over all run
/// pairs. Each centroid of the first set, in index order, takes its
/// nearest still-unmatched centroid of the second.
double centroid_stability(std::span<const CentroidSet> runs);

/// Common state and contract of every index: append-only storage of
/// (id, vector) rows, read-only thread-safe search, canonical result order.
class VectorIndex {
 public:
  virtual ~VectorIndex() = default;
  VectorIndex(const VectorIndex&) = delete;
  VectorIndex& operator=(const VectorIndex&) = delete;

  const IndexParams& params() const noexcept { return params_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t dims() const noexcept { return dims_; }
  MetricKind metric() const noexcept { return index_metric(params_); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  std::span<const float> vector(std::size_t internal) const noexcept {
    return std::span<const float>(vectors_).subspan(internal * dims_, dims_);
  }

  /// Appends documents. Ids must be new; dims must match. Stored vectors
  /// are never modified.
  void add(const DocumentCorpus& docs);

  /// Top-k for one query vector, canonically sorted.
  std::vector<ResultEntry> search_one(std::span<const float> query, std::size_t k) const;

  /// Per-query top-k. Parallelism is across queries only, so the output
  /// is identical for any thread count.
  std::vector<ResultList> search(const QuerySet& queries, std::size_t k,
                                 std::size_t threads = 1) const;

  virtual std::optional<CentroidSet> centroids() const { return std::nullopt; }

  /// Structure-specific payload for serialization.
  virtual void save_structure(ByteWriter& out) const = 0;

 protected:
  VectorIndex(IndexParams params, std::uint64_t seed, std::size_t dims)
      : params_(std::move(params)), seed_(seed), dims_(dims) {}

  /// Inverse of save_structure; rows are already restored.
  virtual void load_structure(ByteReader& in) = 0;
  /// Called after the rows [first, size()) were appended.
  virtual void on_added(std::size_t first) = 0;
  /// Candidates as (internal index, score); need not be sorted or truncated.
  virtual std::vector<std::pair<std::uint32_t, double>> candidates(std::span<const float> query,
                                                                  std::size_t k) const = 0;

  /// Exact top-k over the given internal indices, canonically ordered.
  std::vector<ResultEntry> top_k(std::vector<std::pair<std::uint32_t, double>> scored,
                                 std::size_t k) const;

  void append_rows(const DocumentCorpus& docs);

  IndexParams params_;
  std::uint64_t seed_;
  std::size_t dims_;
  std::vector<std::string> ids_;
  std::vector<float> vectors_;
  std::unordered_set<std::string> id_lookup_;

  friend std::unique_ptr<VectorIndex> load_index(std::istream& in);
};

/// Builds an index over the corpus. Same params, corpus and seed give a
/// structurally identical index.
std::unique_ptr<VectorIndex> build_index(const IndexParams& params, const DocumentCorpus& corpus,
                                         std::uint64_t seed);

/// "VXIX" blob: magic, u16 version, params, seed, rows, structure.
void save_index(const VectorIndex& index, std::ostream& out);
std::unique_ptr<VectorIndex> load_index(std::istream& in);

inline constexpr std::uint16_t kIndexFormatVersion = 1;

/// Binary encoding of IndexParams shared by the index blob and the
/// distributed wire format.
void encode_index_params(ByteWriter& out, const IndexParams& params);
IndexParams decode_index_params(ByteReader& in);

}  // namespace reprobench
