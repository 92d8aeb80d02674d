#include <algorithm>
#include <cmath>
#include <thread>

#include "index_impl.hpp"
#include "reprobench/distance.hpp"
#include "reprobench/errors.hpp"

namespace reprobench {

void VectorIndex::append_rows(const DocumentCorpus& docs) {
  if (docs.empty()) return;
  if (docs.dims() != dims_) {
    throw ValidationError("dims mismatch: index has " + std::to_string(dims_) + ", documents have " +
                          std::to_string(docs.dims()));
  }
  for (const auto& id : docs.ids()) {
    if (id_lookup_.count(id) != 0) throw ValidationError("duplicate id '" + id + "'");
  }
  ids_.reserve(ids_.size() + docs.size());
  for (const auto& id : docs.ids()) {
    ids_.push_back(id);
    id_lookup_.insert(id);
  }
  const auto data = docs.embeddings().data();
  vectors_.insert(vectors_.end(), data.begin(), data.end());
}

void VectorIndex::add(const DocumentCorpus& docs) {
  const std::size_t first = size();
  append_rows(docs);
  if (size() > first) on_added(first);
}

std::vector<ResultEntry> VectorIndex::top_k(detail::Scored scored, std::size_t k) const {
  const MetricKind m = metric();
  auto better = [this, m](const std::pair<std::uint32_t, double>& a,
                          const std::pair<std::uint32_t, double>& b) {
    if (a.second != b.second) return m == MetricKind::Distance ? a.second < b.second : a.second > b.second;
    return ids_[a.first] < ids_[b.first];
  };
  const std::size_t keep = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(),
                    better);
  std::vector<ResultEntry> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) out.push_back({ids_[scored[i].first], scored[i].second});
  return out;
}

std::vector<ResultEntry> VectorIndex::search_one(std::span<const float> query, std::size_t k) const {
  if (k < 1) throw ValidationError("k must be >= 1");
  if (query.size() != dims_) throw ValidationError("query dims mismatch");
  if (ids_.empty()) return {};
  return top_k(candidates(query, k), k);
}

std::vector<ResultList> VectorIndex::search(const QuerySet& queries, std::size_t k,
                                            std::size_t threads) const {
  if (k < 1) throw ValidationError("k must be >= 1");
  if (!queries.empty() && queries.dims() != dims_) {
    throw ValidationError("query dims " + std::to_string(queries.dims()) + " != index dims " +
                          std::to_string(dims_));
  }
  std::vector<ResultList> out(queries.size());
  auto work = [&](std::size_t begin, std::size_t step) {
    for (std::size_t i = begin; i < queries.size(); i += step) {
      out[i].query_id = queries.ids()[i];
      out[i].entries = search_one(queries.embeddings().row(i), k);
      out[i].short_list = out[i].entries.size() < k;
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, queries.size()));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }
  return out;
}

namespace detail {

Scored FlatIndex::candidates(std::span<const float> query, std::size_t) const {
  Scored out(size());
  const bool ip = metric() == MetricKind::InnerProduct;
  for (std::size_t i = 0; i < size(); ++i) {
    out[i] = {static_cast<std::uint32_t>(i), ip ? dot(query, vector(i)) : l2_squared(query, vector(i))};
  }
  return out;
}

std::unique_ptr<VectorIndex> make_empty_index(const IndexParams& params, std::uint64_t seed,
                                              std::size_t dims) {
  if (const auto* p = std::get_if<IvfParams>(&params)) return std::make_unique<IvfIndex>(*p, seed, dims);
  if (const auto* p = std::get_if<HnswParams>(&params)) return std::make_unique<HnswIndex>(*p, seed, dims);
  if (const auto* p = std::get_if<LshParams>(&params)) return std::make_unique<LshIndex>(*p, seed, dims);
  return std::make_unique<FlatIndex>(params, seed, dims);
}

}  // namespace detail

std::unique_ptr<VectorIndex> build_index(const IndexParams& params, const DocumentCorpus& corpus,
                                         std::uint64_t seed) {
  validate(params);
  if (corpus.empty()) throw ValidationError("build_index: empty corpus");
  auto index = detail::make_empty_index(params, seed, corpus.dims());
  if (auto* ivf = dynamic_cast<detail::IvfIndex*>(index.get())) ivf->train(corpus.embeddings());
  index->add(corpus);
  return index;
}

}  // namespace reprobench
