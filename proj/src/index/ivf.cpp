#include <algorithm>
#include <cmath>
#include <limits>

#include "index_impl.hpp"
#include "reprobench/distance.hpp"
#include "reprobench/errors.hpp"

namespace reprobench {

namespace {

std::size_t ceil_sqrt(std::size_t n) {
  auto r = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  while (r * r < n) ++r;
  while (r > 0 && (r - 1) * (r - 1) >= n) --r;
  return r;
}

// Nearest centroid, ties to the lower index.
std::pair<std::uint32_t, double> nearest(std::span<const float> v, const CentroidSet& c) {
  std::uint32_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < c.nlist; ++j) {
    const double d = l2_squared(v, c.row(j));
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::uint32_t>(j);
    }
  }
  return {best, best_d};
}

}  // namespace

CentroidSet kmeans(const EmbeddingMatrix& data, std::size_t nlist, std::size_t iters,
                   std::uint64_t seed) {
  const std::size_t n = data.rows();
  const std::size_t d = data.dims();
  if (nlist < 1) throw ValidationError("kmeans: nlist must be >= 1");
  if (nlist > n) {
    throw ValidationError("kmeans: nlist " + std::to_string(nlist) + " exceeds row count " +
                          std::to_string(n));
  }
  CounterRng rng(seed);
  CentroidSet c{nlist, d, std::vector<float>(nlist * d)};
  auto set_centroid = [&](std::size_t j, std::span<const float> src) {
    std::copy(src.begin(), src.end(), c.data.begin() + static_cast<std::ptrdiff_t>(j * d));
  };

  // k-means++ seeding.
  std::vector<char> chosen(n, 0);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  auto take = [&](std::size_t j, std::size_t point) {
    chosen[point] = 1;
    set_centroid(j, data.row(point));
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], l2_squared(data.row(i), c.row(j)));
  };
  take(0, rng.next_below(n));
  for (std::size_t j = 1; j < nlist; ++j) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = rng.next_double() * total;
      double cumulative = 0.0;
      std::size_t last_positive = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        last_positive = i;
        cumulative += d2[i];
        if (cumulative > target) {
          pick = i;
          break;
        }
      }
      if (pick == n) pick = last_positive;
    }
    if (pick == n) {
      // Remaining points all coincide with chosen centers.
      pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), 0) - chosen.begin());
    }
    take(j, pick);
  }

  // Lloyd iterations, fixed count.
  std::vector<std::uint32_t> assign(n);
  std::vector<double> dist(n);
  std::vector<double> sums(nlist * d);
  std::vector<std::size_t> counts(nlist);
  for (std::size_t it = 0; it < iters; ++it) {
    for (std::size_t i = 0; i < n; ++i) std::tie(assign[i], dist[i]) = nearest(data.row(i), c);
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = data.row(i);
      double* s = sums.data() + static_cast<std::size_t>(assign[i]) * d;
      for (std::size_t k = 0; k < d; ++k) s[k] += static_cast<double>(row[k]);
      ++counts[assign[i]];
    }
    std::vector<char> reseeded(n, 0);
    for (std::size_t j = 0; j < nlist; ++j) {
      if (counts[j] > 0) {
        const double inv = static_cast<double>(counts[j]);
        for (std::size_t k = 0; k < d; ++k) {
          c.data[j * d + k] = static_cast<float>(sums[j * d + k] / inv);
        }
        continue;
      }
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (reseeded[i]) continue;
        if (far == n || dist[i] > dist[far]) far = i;
      }
      if (far == n) continue;
      reseeded[far] = 1;
      set_centroid(j, data.row(far));
    }
  }
  return c;
}

double centroid_stability(std::span<const CentroidSet> runs) {
  if (runs.size() < 2) throw ValidationError("centroid_stability: need at least 2 runs");
  for (const auto& r : runs) {
    if (r.nlist != runs[0].nlist || r.dims != runs[0].dims) {
      throw ValidationError("centroid_stability: centroid sets differ in shape");
    }
  }
  const std::size_t nlist = runs[0].nlist;
  if (nlist == 0) return 0.0;
  double pair_sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < runs.size(); ++a) {
    for (std::size_t b = a + 1; b < runs.size(); ++b) {
      std::vector<char> used(nlist, 0);
      double total = 0.0;
      for (std::size_t i = 0; i < nlist; ++i) {
        std::size_t best = nlist;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < nlist; ++j) {
          if (used[j]) continue;
          const double dd = l2_squared(runs[a].row(i), runs[b].row(j));
          if (dd < best_d) {
            best_d = dd;
            best = j;
          }
        }
        used[best] = 1;
        total += std::sqrt(best_d);
      }
      pair_sum += total / static_cast<double>(nlist);
      ++pairs;
    }
  }
  return pair_sum / static_cast<double>(pairs);
}

namespace detail {

void IvfIndex::train(const EmbeddingMatrix& data) {
  const std::size_t n = data.rows();
  nlist_ = ivf_.nlist != 0 ? ivf_.nlist : ceil_sqrt(n);
  nprobe_ = ivf_.nprobe != 0 ? ivf_.nprobe : std::max<std::size_t>(1, nlist_ / 8);
  if (nprobe_ > nlist_) throw ValidationError("ivf: nprobe must be <= nlist");
  centroids_ = kmeans(data, nlist_, ivf_.kmeans_iters, seed_);
  lists_.assign(nlist_, {});
}

std::uint32_t IvfIndex::nearest_centroid(std::span<const float> v) const {
  return nearest(v, centroids_).first;
}

void IvfIndex::on_added(std::size_t first) {
  if (nlist_ == 0) throw ValidationError("ivf: index is not trained");
  for (std::size_t i = first; i < size(); ++i) {
    lists_[nearest_centroid(vector(i))].push_back(static_cast<std::uint32_t>(i));
  }
}

Scored IvfIndex::candidates(std::span<const float> query, std::size_t) const {
  std::vector<std::pair<double, std::uint32_t>> cd(nlist_);
  for (std::size_t j = 0; j < nlist_; ++j) {
    cd[j] = {l2_squared(query, centroids_.row(j)), static_cast<std::uint32_t>(j)};
  }
  std::partial_sort(cd.begin(), cd.begin() + static_cast<std::ptrdiff_t>(nprobe_), cd.end());
  Scored out;
  for (std::size_t p = 0; p < nprobe_; ++p) {
    for (std::uint32_t member : lists_[cd[p].second]) {
      out.emplace_back(member, l2_squared(query, vector(member)));
    }
  }
  return out;
}

void IvfIndex::save_structure(ByteWriter& out) const {
  out.u64(nlist_);
  out.u64(nprobe_);
  out.f32s(centroids_.data);
  for (const auto& list : lists_) {
    out.u64(list.size());
    for (std::uint32_t m : list) out.u32(m);
  }
}

void IvfIndex::load_structure(ByteReader& in) {
  nlist_ = in.u64();
  nprobe_ = in.u64();
  if (nlist_ == 0 || nprobe_ > nlist_) throw ValidationError("index file: bad ivf sizes");
  centroids_ = CentroidSet{nlist_, dims_, in.f32s(nlist_ * dims_)};
  lists_.assign(nlist_, {});
  for (auto& list : lists_) {
    const std::uint64_t len = in.u64();
    if (len > size()) throw ValidationError("index file: bad ivf list length");
    list.resize(len);
    for (auto& m : list) {
      m = in.u32();
      if (m >= size()) throw ValidationError("index file: ivf member out of range");
    }
  }
}

}  // namespace detail
}  // namespace reprobench
