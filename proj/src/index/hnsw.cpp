#include <algorithm>
#include <cmath>
#include <queue>

#include "index_impl.hpp"
#include "reprobench/distance.hpp"
#include "reprobench/errors.hpp"

namespace reprobench::detail {

namespace {

using Candidate = std::pair<double, std::uint32_t>;  // (distance, node)

}  // namespace

void HnswIndex::Visited::reset(std::size_t n) {
  if (mark.size() < n) mark.resize(n, 0);
  if (++epoch == 0) {
    std::fill(mark.begin(), mark.end(), 0);
    epoch = 1;
  }
}

int HnswIndex::draw_level() {
  // level = floor(-ln(u) * mL), u in (0, 1], mL = 1 / ln(M)
  const double ml = 1.0 / std::log(static_cast<double>(hnsw_.M));
  const double level = std::floor(-std::log(level_rng_.next_open_closed()) * ml);
  return static_cast<int>(std::min<double>(level, kMaxLevel));
}

Scored HnswIndex::search_layer(std::span<const float> q, const Scored& entry, std::size_t ef,
                               int layer, Visited& visited) const {
  visited.reset(size());
  std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> frontier;
  std::priority_queue<Candidate> best;  // max-heap: worst kept result on top
  for (const auto& [node, dist] : entry) {
    if (visited.mark[node] == visited.epoch) continue;
    visited.mark[node] = visited.epoch;
    frontier.emplace(dist, node);
    best.emplace(dist, node);
    if (best.size() > ef) best.pop();
  }
  while (!frontier.empty()) {
    const Candidate current = frontier.top();
    if (best.size() >= ef && current > best.top()) break;
    frontier.pop();
    for (std::uint32_t nb : links_[current.second][static_cast<std::size_t>(layer)]) {
      if (visited.mark[nb] == visited.epoch) continue;
      visited.mark[nb] = visited.epoch;
      const Candidate c{l2_squared(q, vector(nb)), nb};
      if (best.size() < ef || c < best.top()) {
        frontier.push(c);
        best.push(c);
        if (best.size() > ef) best.pop();
      }
    }
  }
  Scored out(best.size());
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = {best.top().second, best.top().first};
    best.pop();
  }
  return out;
}

std::uint32_t HnswIndex::greedy_descend(std::span<const float> q, int from, int to,
                                        Visited& visited) const {
  std::uint32_t cur = entry_;
  Scored ep{{cur, l2_squared(q, vector(cur))}};
  for (int layer = from; layer > to; --layer) {
    ep = search_layer(q, ep, 1, layer, visited);
    ep.resize(1);
  }
  return ep.front().first;
}

void HnswIndex::insert(std::uint32_t node, Visited& visited) {
  const int level = draw_level();
  levels_.push_back(level);
  links_.emplace_back(static_cast<std::size_t>(level) + 1);
  if (entry_ == kNone) {
    entry_ = node;
    max_level_ = level;
    return;
  }
  const auto q = vector(node);
  Scored ep{{greedy_descend(q, max_level_, level, visited), 0.0}};
  ep.front().second = l2_squared(q, vector(ep.front().first));

  for (int layer = std::min(level, max_level_); layer >= 0; --layer) {
    const auto l = static_cast<std::size_t>(layer);
    Scored found = search_layer(q, ep, hnsw_.ef_construction, layer, visited);
    const std::size_t m = std::min(hnsw_.M, found.size());
    auto& mine = links_[node][l];
    mine.clear();
    for (std::size_t i = 0; i < m; ++i) mine.push_back(found[i].first);

    const std::size_t cap = max_degree(layer);
    for (std::size_t i = 0; i < m; ++i) {
      auto& theirs = links_[found[i].first][l];
      theirs.push_back(node);
      if (theirs.size() <= cap) continue;
      // Keep the cap nearest neighbours of that node.
      const auto base = vector(found[i].first);
      std::vector<Candidate> ranked;
      ranked.reserve(theirs.size());
      for (std::uint32_t x : theirs) ranked.emplace_back(l2_squared(base, vector(x)), x);
      std::sort(ranked.begin(), ranked.end());
      theirs.clear();
      for (std::size_t r = 0; r < cap; ++r) theirs.push_back(ranked[r].second);
    }
    ep = std::move(found);
  }
  if (level > max_level_) {
    entry_ = node;
    max_level_ = level;
  }
}

void HnswIndex::on_added(std::size_t first) {
  Visited visited;
  for (std::size_t i = first; i < size(); ++i) insert(static_cast<std::uint32_t>(i), visited);
}

Scored HnswIndex::candidates(std::span<const float> query, std::size_t k) const {
  Visited visited;
  const std::size_t ef = std::max(hnsw_.ef_search, k);
  const std::uint32_t start = greedy_descend(query, max_level_, 0, visited);
  return search_layer(query, {{start, l2_squared(query, vector(start))}}, ef, 0, visited);
}

void HnswIndex::save_structure(ByteWriter& out) const {
  out.u64(level_rng_.key());
  out.u64(level_rng_.counter());
  out.u32(entry_);
  out.u32(static_cast<std::uint32_t>(max_level_));
  for (std::size_t node = 0; node < size(); ++node) {
    out.u32(static_cast<std::uint32_t>(levels_[node]));
    for (const auto& layer : links_[node]) {
      out.u32(static_cast<std::uint32_t>(layer.size()));
      for (std::uint32_t nb : layer) out.u32(nb);
    }
  }
}

void HnswIndex::load_structure(ByteReader& in) {
  const std::uint64_t key = in.u64();
  const std::uint64_t counter = in.u64();
  level_rng_ = CounterRng::from_state(key, counter);
  entry_ = in.u32();
  max_level_ = static_cast<int>(static_cast<std::int32_t>(in.u32()));
  if ((entry_ == kNone) != (size() == 0) || (entry_ != kNone && entry_ >= size())) {
    throw ValidationError("index file: bad hnsw entry point");
  }
  levels_.assign(size(), 0);
  links_.assign(size(), {});
  for (std::size_t node = 0; node < size(); ++node) {
    const std::uint32_t level = in.u32();
    if (level > static_cast<std::uint32_t>(kMaxLevel)) throw ValidationError("index file: bad hnsw level");
    levels_[node] = static_cast<int>(level);
    links_[node].resize(level + 1);
    for (auto& layer : links_[node]) {
      const std::uint32_t count = in.u32();
      if (count > size()) throw ValidationError("index file: bad hnsw degree");
      layer.resize(count);
      for (auto& nb : layer) {
        nb = in.u32();
        if (nb >= size()) throw ValidationError("index file: hnsw link out of range");
      }
    }
  }
}

}  // namespace reprobench::detail
