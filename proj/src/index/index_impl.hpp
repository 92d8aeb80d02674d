#pragma once

#include <memory>
#include <vector>

#include "reprobench/index.hpp"
#include "reprobench/rng.hpp"

namespace reprobench::detail {

using Scored = std::vector<std::pair<std::uint32_t, double>>;

class FlatIndex final : public VectorIndex {
 public:
  FlatIndex(IndexParams params, std::uint64_t seed, std::size_t dims)
      : VectorIndex(std::move(params), seed, dims) {}
  void save_structure(ByteWriter&) const override {}

 protected:
  void load_structure(ByteReader&) override {}
  void on_added(std::size_t) override {}
  Scored candidates(std::span<const float> query, std::size_t k) const override;
};

class IvfIndex final : public VectorIndex {
 public:
  IvfIndex(IvfParams params, std::uint64_t seed, std::size_t dims)
      : VectorIndex(params, seed, dims), ivf_(params) {}

  /// Resolves nlist/nprobe against the corpus size and trains the
  /// coarse quantizer. Centroids are frozen afterwards.
  void train(const EmbeddingMatrix& data);
  std::optional<CentroidSet> centroids() const override { return centroids_; }
  void save_structure(ByteWriter& out) const override;

  std::size_t nlist() const noexcept { return nlist_; }
  std::size_t nprobe() const noexcept { return nprobe_; }

 protected:
  void load_structure(ByteReader& in) override;
  void on_added(std::size_t first) override;
  Scored candidates(std::span<const float> query, std::size_t k) const override;

 private:
  std::uint32_t nearest_centroid(std::span<const float> v) const;

  IvfParams ivf_;
  std::size_t nlist_ = 0;
  std::size_t nprobe_ = 0;
  CentroidSet centroids_;
  std::vector<std::vector<std::uint32_t>> lists_;
};

class HnswIndex final : public VectorIndex {
 public:
  HnswIndex(HnswParams params, std::uint64_t seed, std::size_t dims)
      : VectorIndex(params, seed, dims), hnsw_(params), level_rng_(seed) {}
  void save_structure(ByteWriter& out) const override;

 protected:
  void load_structure(ByteReader& in) override;
  void on_added(std::size_t first) override;
  Scored candidates(std::span<const float> query, std::size_t k) const override;

 private:
  static constexpr std::uint32_t kNone = 0xFFFFFFFFu;
  static constexpr int kMaxLevel = 30;

  struct Visited {
    std::vector<std::uint32_t> mark;
    std::uint32_t epoch = 0;
    void reset(std::size_t n);
  };

  int draw_level();
  void insert(std::uint32_t node, Visited& visited);
  std::size_t max_degree(int layer) const noexcept { return layer == 0 ? 2 * hnsw_.M : hnsw_.M; }
  /// Beam search restricted to one layer; result ascending by (distance, index).
  Scored search_layer(std::span<const float> q, const Scored& entry, std::size_t ef, int layer,
                      Visited& visited) const;
  std::uint32_t greedy_descend(std::span<const float> q, int from, int to, Visited& visited) const;

  HnswParams hnsw_;
  CounterRng level_rng_;
  std::vector<int> levels_;
  std::vector<std::vector<std::vector<std::uint32_t>>> links_;  // [node][layer]
  std::uint32_t entry_ = kNone;
  int max_level_ = -1;
};

class LshIndex final : public VectorIndex {
 public:
  LshIndex(LshParams params, std::uint64_t seed, std::size_t dims);
  void save_structure(ByteWriter& out) const override;

 protected:
  void load_structure(ByteReader& in) override;
  void on_added(std::size_t first) override;
  Scored candidates(std::span<const float> query, std::size_t k) const override;

 private:
  std::vector<std::uint64_t> encode(std::span<const float> v) const;

  LshParams lsh_;
  std::size_t words_ = 0;
  std::vector<float> hyperplanes_;   // n_bits x dims
  std::vector<std::uint64_t> codes_;  // rows x words_
};

/// Empty index of the right concrete type (no rows, untrained).
std::unique_ptr<VectorIndex> make_empty_index(const IndexParams& params, std::uint64_t seed,
                                              std::size_t dims);

}  // namespace reprobench::detail
