#include <algorithm>
#include <unordered_map>

#include "reprobench/distributed.hpp"
#include "reprobench/errors.hpp"
#include "reprobench/rng.hpp"

namespace reprobench {

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t node_seed(std::uint64_t seed, std::uint32_t node_id) noexcept { return seed ^ node_id; }

std::vector<std::vector<std::size_t>> ShardAssignment::rows_by_node() const {
  std::vector<std::vector<std::size_t>> out(n_nodes);
  for (std::size_t i = 0; i < node_of.size(); ++i) out[node_of[i]].push_back(i);
  return out;
}

namespace {

// Node of position `pos` in a range split of n items over `nodes`.
std::uint32_t range_node(std::size_t pos, std::size_t n, std::size_t nodes) {
  const std::size_t small = n / nodes;
  const std::size_t extra = n % nodes;  // nodes [0, extra) hold small + 1
  const std::size_t big_span = extra * (small + 1);
  if (pos < big_span) return static_cast<std::uint32_t>(pos / (small + 1));
  return static_cast<std::uint32_t>(extra + (pos - big_span) / small);
}

}  // namespace

ShardAssignment shard(const DocumentCorpus& corpus, std::size_t n_nodes,
                      const ShardingStrategy& strategy) {
  if (n_nodes < 1) throw ValidationError("shard: n_nodes must be >= 1");
  const std::size_t n = corpus.size();
  ShardAssignment a;
  a.n_nodes = n_nodes;
  a.node_of.resize(n);
  switch (strategy.kind) {
    case ShardingStrategy::Kind::Hash:
      for (std::size_t i = 0; i < n; ++i) {
        a.node_of[i] = static_cast<std::uint32_t>(fnv1a64(corpus.ids()[i]) % n_nodes);
      }
      break;
    case ShardingStrategy::Kind::Range:
      for (std::size_t i = 0; i < n; ++i) a.node_of[i] = range_node(i, n, n_nodes);
      break;
    case ShardingStrategy::Kind::Random: {
      std::vector<std::size_t> perm(n);
      for (std::size_t i = 0; i < n; ++i) perm[i] = i;
      CounterRng rng(strategy.seed);
      for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = rng.next_below(i);
        std::swap(perm[i - 1], perm[j]);
      }
      for (std::size_t pos = 0; pos < n; ++pos) a.node_of[perm[pos]] = range_node(pos, n, n_nodes);
      break;
    }
  }
  return a;
}

ResultList merge_candidates(std::span<const CandidateBatch> batches, std::size_t k,
                            MetricKind metric) {
  if (k < 1) throw ValidationError("merge_candidates: k must be >= 1");
  ResultList out;
  if (batches.empty()) return out;
  out.query_id = batches.front().query_id;
  std::vector<ResultEntry> all;
  for (const auto& b : batches) {
    if (b.query_id != out.query_id) {
      throw ValidationError("merge_candidates: mixed query ids '" + out.query_id + "' and '" +
                            b.query_id + "'");
    }
    all.insert(all.end(), b.entries.begin(), b.entries.end());
  }
  all = canonical_sort(std::move(all), metric);
  // A document reported twice keeps its best-ranked entry.
  std::unordered_map<std::string_view, bool> seen;
  for (const auto& e : all) {
    if (out.entries.size() == k) break;
    if (seen.emplace(e.doc_id, true).second) out.entries.push_back(e);
  }
  out.short_list = out.entries.size() < k;
  return out;
}

}  // namespace reprobench
