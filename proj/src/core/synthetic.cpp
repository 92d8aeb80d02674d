#include "reprobench/synthetic.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "reprobench/errors.hpp"
#include "reprobench/rng.hpp"

namespace reprobench {

namespace {

// Stream ids within one generator seed.
constexpr std::uint64_t kCenterStream = 1;
constexpr std::uint64_t kDocStream = 2;
constexpr std::uint64_t kQueryStream = 3;

void normalize(std::span<double> v) {
  double norm2 = 0.0;
  for (double x : v) norm2 += x * x;
  const double norm = std::sqrt(norm2);
  if (norm == 0.0) {
    // Measure-zero event; fall back to the first axis.
    v[0] = 1.0;
    return;
  }
  for (double& x : v) x /= norm;
}

void append_point(CounterRng& rng, std::span<const double> center, double sigma,
                  std::vector<double>& scratch, std::vector<float>& out) {
  for (std::size_t j = 0; j < center.size(); ++j) {
    scratch[j] = center[j] + (sigma > 0.0 ? sigma * rng.next_gaussian() : 0.0);
  }
  normalize(scratch);
  for (double x : scratch) out.push_back(static_cast<float>(x));
}

}  // namespace

std::pair<DocumentCorpus, QuerySet> gen_synthetic(const SyntheticSpec& spec) {
  if (spec.dims == 0) throw ValidationError("gen_synthetic: dims must be >= 1");
  if (spec.n_docs == 0) throw ValidationError("gen_synthetic: n_docs must be >= 1");
  if (spec.n_queries == 0) throw ValidationError("gen_synthetic: n_queries must be >= 1");
  if (spec.clusters == 0 || spec.clusters > spec.n_docs) {
    throw ValidationError("gen_synthetic: clusters must be in [1, n_docs]");
  }
  if (!(spec.noise >= 0.0) || !std::isfinite(spec.noise)) {
    throw ValidationError("gen_synthetic: noise must be finite and >= 0");
  }

  const std::size_t d = spec.dims;
  const double doc_sigma = spec.noise / std::sqrt(static_cast<double>(d));
  const double query_sigma = 0.5 * doc_sigma;

  CounterRng center_rng(spec.seed, kCenterStream);
  std::vector<double> centers(spec.clusters * d);
  for (std::size_t c = 0; c < spec.clusters; ++c) {
    std::span<double> row(centers.data() + c * d, d);
    for (double& x : row) x = center_rng.next_gaussian();
    normalize(row);
  }
  auto center = [&](std::size_t c) { return std::span<const double>(centers.data() + c * d, d); };

  std::vector<double> scratch(d);

  CounterRng doc_rng(spec.seed, kDocStream);
  std::vector<float> docs;
  docs.reserve(spec.n_docs * d);
  std::vector<std::string> doc_ids;
  doc_ids.reserve(spec.n_docs);
  for (std::size_t i = 0; i < spec.n_docs; ++i) {
    const std::size_t c = doc_rng.next_below(spec.clusters);
    append_point(doc_rng, center(c), doc_sigma, scratch, docs);
    doc_ids.push_back(padded_id('d', i, spec.n_docs));
  }

  CounterRng query_rng(spec.seed, kQueryStream);
  std::vector<float> queries;
  queries.reserve(spec.n_queries * d);
  std::vector<std::string> query_ids;
  query_ids.reserve(spec.n_queries);
  for (std::size_t i = 0; i < spec.n_queries; ++i) {
    const std::size_t c = query_rng.next_below(spec.clusters);
    append_point(query_rng, center(c), query_sigma, scratch, queries);
    query_ids.push_back(padded_id('q', i, spec.n_queries));
  }

  return {DocumentCorpus(std::move(doc_ids), EmbeddingMatrix(spec.n_docs, d, std::move(docs))),
          QuerySet(std::move(query_ids), EmbeddingMatrix(spec.n_queries, d, std::move(queries)))};
}

EmbeddingMatrix unit_gaussian_matrix(std::uint64_t seed, std::size_t n, std::size_t dims) {
  if (dims == 0) throw ValidationError("unit_gaussian_matrix: dims must be >= 1");
  CounterRng rng(seed);
  std::vector<double> scratch(dims);
  std::vector<float> out;
  out.reserve(n * dims);
  for (std::size_t i = 0; i < n; ++i) {
    for (double& x : scratch) x = rng.next_gaussian();
    normalize(scratch);
    for (double x : scratch) out.push_back(static_cast<float>(x));
  }
  return EmbeddingMatrix(n, dims, std::move(out));
}

}  // namespace reprobench
