#include "reprobench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "reprobench/distance.hpp"
#include "reprobench/errors.hpp"

namespace reprobench {

namespace {

// Counts inversions of `seq` by merge sort.
std::size_t count_inversions(std::vector<std::size_t>& seq, std::vector<std::size_t>& tmp,
                             std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::size_t inv = count_inversions(seq, tmp, lo, mid) + count_inversions(seq, tmp, mid, hi);
  std::size_t i = lo, j = mid, out = lo;
  while (i < mid && j < hi) {
    if (seq[i] <= seq[j]) {
      tmp[out++] = seq[i++];
    } else {
      inv += mid - i;
      tmp[out++] = seq[j++];
    }
  }
  while (i < mid) tmp[out++] = seq[i++];
  while (j < hi) tmp[out++] = seq[j++];
  std::copy(tmp.begin() + static_cast<std::ptrdiff_t>(lo), tmp.begin() + static_cast<std::ptrdiff_t>(hi),
            seq.begin() + static_cast<std::ptrdiff_t>(lo));
  return inv;
}

using QueryIndex = std::unordered_map<std::string_view, const ResultList*>;

QueryIndex index_by_query(const RunRecord& run) {
  QueryIndex idx;
  idx.reserve(run.results.size());
  for (const auto& list : run.results) {
    if (!idx.emplace(list.query_id, &list).second) {
      throw ValidationError("run contains query '" + list.query_id + "' twice");
    }
  }
  return idx;
}

// Aligns every run's lists to the first run's query order.
std::vector<std::vector<const ResultList*>> align_runs(std::span<const RunRecord> runs) {
  if (runs.size() < 2) throw ValidationError("need at least 2 runs");
  std::vector<QueryIndex> indexes;
  indexes.reserve(runs.size());
  for (const auto& run : runs) indexes.push_back(index_by_query(run));
  std::vector<std::vector<const ResultList*>> aligned;
  aligned.reserve(runs.front().results.size());
  for (const auto& list : runs.front().results) {
    std::vector<const ResultList*> row;
    row.reserve(runs.size());
    for (std::size_t r = 0; r < runs.size(); ++r) {
      if (indexes[r].size() != indexes[0].size()) throw ValidationError("runs cover different query sets");
      auto it = indexes[r].find(list.query_id);
      if (it == indexes[r].end()) {
        throw ValidationError("query '" + list.query_id + "' missing from run " + std::to_string(r));
      }
      row.push_back(it->second);
    }
    aligned.push_back(std::move(row));
  }
  return aligned;
}

}  // namespace

IdSet id_set(const ResultList& list) {
  IdSet out;
  for (const auto& e : list.entries) out.insert(e.doc_id);
  return out;
}

double jaccard(const IdSet& a, const IdSet& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& id : a) inter += b.count(id);
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double jaccard(const ResultList& a, const ResultList& b) { return jaccard(id_set(a), id_set(b)); }

Overlap overlap_coefficient(const ResultList& v1, const ResultList& v2) {
  if (v1.entries.empty()) throw ValidationError("overlap_coefficient: V1 list is empty");
  const IdSet in_v2 = id_set(v2);
  Overlap o;
  for (const auto& e : v1.entries) o.count += in_v2.count(e.doc_id);
  o.coefficient = static_cast<double>(o.count) / static_cast<double>(v1.entries.size());
  return o;
}

double kendall_p_value(std::size_t n, std::size_t discordant) {
  if (n < 2) return 1.0;
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  if (n <= 10) {
    // Mahonian numbers: permutations of n items with d inversions.
    const std::size_t max_inv = n * (n - 1) / 2;
    std::vector<double> counts(max_inv + 1, 0.0);
    counts[0] = 1.0;
    for (std::size_t m = 2; m <= n; ++m) {
      std::vector<double> next(max_inv + 1, 0.0);
      for (std::size_t d = 0; d <= max_inv; ++d) {
        if (counts[d] == 0.0) continue;
        for (std::size_t add = 0; add < m && d + add <= max_inv; ++add) next[d + add] += counts[d];
      }
      counts = std::move(next);
    }
    const auto stat = [max_inv](std::size_t d) {
      const auto s = static_cast<long long>(max_inv) - 2 * static_cast<long long>(d);
      return s < 0 ? -s : s;
    };
    const long long observed = stat(discordant);
    double extreme = 0.0;
    double total = 0.0;
    for (std::size_t d = 0; d <= max_inv; ++d) {
      total += counts[d];
      if (stat(d) >= observed) extreme += counts[d];
    }
    return std::min(1.0, extreme / total);
  }
  const double nd = static_cast<double>(n);
  const double tau = (pairs - 2.0 * static_cast<double>(discordant)) / pairs;
  const double z = 3.0 * tau * std::sqrt(nd * (nd - 1.0)) / std::sqrt(2.0 * (2.0 * nd + 5.0));
  return std::min(1.0, std::erfc(std::fabs(z) / std::sqrt(2.0)));
}

KendallTau kendall_tau(const ResultList& a, const ResultList& b) {
  std::unordered_map<std::string_view, std::size_t> pos_in_b;
  pos_in_b.reserve(b.entries.size());
  for (std::size_t i = 0; i < b.entries.size(); ++i) pos_in_b.emplace(b.entries[i].doc_id, i);

  std::vector<std::size_t> seq;  // b-positions of common ids, in a's order
  for (const auto& e : a.entries) {
    auto it = pos_in_b.find(e.doc_id);
    if (it != pos_in_b.end()) seq.push_back(it->second);
  }
  KendallTau out;
  out.n_common = seq.size();
  if (seq.size() < 2) return out;

  std::vector<std::size_t> tmp(seq.size());
  const std::size_t discordant = count_inversions(seq, tmp, 0, seq.size());
  const double pairs = static_cast<double>(out.n_common) * static_cast<double>(out.n_common - 1) / 2.0;
  out.tau = (pairs - 2.0 * static_cast<double>(discordant)) / pairs;
  out.p_value = kendall_p_value(out.n_common, discordant);
  return out;
}

double rbo(const ResultList& a, const ResultList& b, double p, std::size_t depth) {
  if (!(p > 0.0 && p < 1.0)) throw ValidationError("rbo: persistence p must lie in (0, 1)");
  depth = std::min({depth, a.entries.size(), b.entries.size()});
  if (depth == 0) return a.entries.empty() && b.entries.empty() ? 1.0 : 0.0;

  std::unordered_set<std::string_view> seen_a, seen_b;
  std::size_t overlap = 0;
  double weight = 1.0;  // p^(d-1)
  double sum = 0.0;
  bool all_agree = true;
  for (std::size_t d = 1; d <= depth; ++d) {
    const std::string_view x = a.entries[d - 1].doc_id;
    const std::string_view y = b.entries[d - 1].doc_id;
    if (x == y) {
      ++overlap;
    } else {
      overlap += seen_b.count(x);
      overlap += seen_a.count(y);
    }
    seen_a.insert(x);
    seen_b.insert(y);
    all_agree = all_agree && overlap == d;
    sum += weight * static_cast<double>(overlap) / static_cast<double>(d);
    weight *= p;
  }
  if (all_agree) return 1.0;
  const double agreement_at_depth = static_cast<double>(overlap) / static_cast<double>(depth);
  const double value = (1.0 - p) * sum + agreement_at_depth * weight;
  return std::clamp(value, 0.0, 1.0);
}

AgreementScores agreement(const ResultList& a, const ResultList& b, double rbo_p) {
  AgreementScores s;
  if (!a.entries.empty()) {
    const auto o = overlap_coefficient(a, b);
    s.overlap_count = o.count;
    s.overlap_coefficient = o.coefficient;
  }
  s.jaccard = jaccard(a, b);
  s.rbo = rbo(a, b, rbo_p, std::max(a.entries.size(), b.entries.size()));
  const auto t = kendall_tau(a, b);
  s.kendall_tau = t.tau;
  s.tau_p_value = t.p_value;
  return s;
}

double exact_match_rate(std::span<const RunRecord> runs) {
  const auto aligned = align_runs(runs);
  if (aligned.empty()) return 1.0;
  std::size_t matches = 0;
  for (const auto& row : aligned) {
    bool same = true;
    for (std::size_t r = 1; r < row.size() && same; ++r) same = identical_results(*row[0], *row[r]);
    matches += same ? 1 : 0;
  }
  return static_cast<double>(matches) / static_cast<double>(aligned.size());
}

std::vector<double> score_stability(std::span<const RunRecord> runs) {
  const auto aligned = align_runs(runs);
  std::vector<double> out;
  out.reserve(aligned.size());
  std::vector<double> column(runs.size());
  for (const auto& row : aligned) {
    const std::size_t k = row[0]->entries.size();
    for (const auto* list : row) {
      if (list->entries.size() != k) {
        throw ValidationError("score_stability: runs differ in list length for query '" +
                              list->query_id + "'");
      }
    }
    if (k == 0) {
      out.push_back(0.0);
      continue;
    }
    double acc = 0.0;
    for (std::size_t rank = 0; rank < k; ++rank) {
      for (std::size_t r = 0; r < row.size(); ++r) column[r] = row[r]->entries[rank].score;
      acc += population_std(column);
    }
    out.push_back(acc / static_cast<double>(k));
  }
  return out;
}

double vector_l2(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) throw ValidationError("vector_l2: dimension mismatch");
  return std::sqrt(l2_squared(u, v));
}

double vector_cosine(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) throw ValidationError("vector_cosine: dimension mismatch");
  const double nu = dot(u, u);
  const double nv = dot(v, v);
  if (nu == 0.0 || nv == 0.0) throw ValidationError("vector_cosine: zero vector");
  // sqrt(fl(s * s)) == s in IEEE arithmetic, so cosine(u, u) is exactly 1.
  return std::clamp(dot(u, v) / std::sqrt(nu * nv), -1.0, 1.0);
}

Drift embedding_drift(const EmbeddingMatrix& a, const EmbeddingMatrix& b) {
  if (a.rows() != b.rows() || a.dims() != b.dims()) {
    throw ValidationError("embedding_drift: shape mismatch");
  }
  Drift d;
  if (a.rows() == 0) return d;
  double l2 = 0.0;
  double cos = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    l2 += vector_l2(a.row(i), b.row(i));
    cos += vector_cosine(a.row(i), b.row(i));
  }
  d.mean_l2 = l2 / static_cast<double>(a.rows());
  d.mean_cosine = cos / static_cast<double>(a.rows());
  return d;
}

double population_std(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const double pivot = values.front();
  double shifted_sum = 0.0;
  for (double v : values) shifted_sum += v - pivot;
  const double n = static_cast<double>(values.size());
  const double shifted_mean = shifted_sum / n;
  double ss = 0.0;
  for (double v : values) {
    const double d = (v - pivot) - shifted_mean;
    ss += d * d;
  }
  return std::sqrt(ss / n);
}

MetricDistribution summarize(std::span<const double> values) {
  if (values.empty()) throw ValidationError("summarize: no values");
  std::vector<double> sorted(values.begin(), values.end());
  for (double v : sorted) {
    if (!std::isfinite(v)) throw ValidationError("summarize: non-finite value");
  }
  // Sorting first makes every statistic independent of input order.
  std::sort(sorted.begin(), sorted.end());
  MetricDistribution m;
  m.n_queries = sorted.size();
  m.min = sorted.front();
  m.max = sorted.back();
  const std::size_t n = sorted.size();
  m.median = n % 2 == 1 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
  double sum = 0.0;
  for (double v : sorted) sum += v;
  m.mean = std::clamp(sum / static_cast<double>(n), m.min, m.max);
  m.std = population_std(sorted);
  return m;
}

}  // namespace reprobench
