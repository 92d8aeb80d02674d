#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "reprobench/config.hpp"
#include "reprobench/types.hpp"

namespace reprobench {

using IdSet = std::set<std::string>;

IdSet id_set(const ResultList& list);

/// |A n B| / |A u B|; two empty sets score 1.
double jaccard(const IdSet& a, const IdSet& b);
double jaccard(const ResultList& a, const ResultList& b);

struct Overlap {
  std::size_t count = 0;
  double coefficient = 0.0;
};

/// Fraction of v1's documents still present in v2 (asymmetric).
/// Throws ValidationError when v1 is empty.
Overlap overlap_coefficient(const ResultList& v1, const ResultList& v2);

struct KendallTau {
  std::optional<double> tau;
  std::optional<double> p_value;
  std::size_t n_common = 0;
};

/// Kendall's tau-a over the documents both lists contain, in each list's
/// own order. Undefined with fewer than two common documents. The
/// two-sided p-value is exact (permutation distribution) for n <= 10 and
/// uses the normal approximation above that.
KendallTau kendall_tau(const ResultList& a, const ResultList& b);

/// Two-sided p-value for observing `discordant` inversions among n
/// untied items under independence.
double kendall_p_value(std::size_t n, std::size_t discordant);

inline constexpr double kDefaultRboPersistence = 0.9;

/// Extrapolated rank-biased overlap evaluated to `depth` (clamped to the
/// shorter list). Throws ValidationError unless 0 < p < 1.
double rbo(const ResultList& a, const ResultList& b, double p, std::size_t depth);

struct AgreementScores {
  std::size_t overlap_count = 0;
  double overlap_coefficient = 0.0;
  double jaccard = 0.0;
  double rbo = 0.0;
  std::optional<double> kendall_tau;
  std::optional<double> tau_p_value;
};

AgreementScores agreement(const ResultList& a, const ResultList& b,
                          double rbo_p = kDefaultRboPersistence);

/// Fraction of queries whose lists are identical (ids, order, score bits)
/// across every run.
double exact_match_rate(std::span<const RunRecord> runs);

/// Per query (in the first run's order): mean over ranks of the
/// population std of that rank's score across runs.
std::vector<double> score_stability(std::span<const RunRecord> runs);

double vector_l2(std::span<const float> u, std::span<const float> v);
double vector_cosine(std::span<const float> u, std::span<const float> v);

struct Drift {
  double mean_l2 = 0.0;
  double mean_cosine = 1.0;
};

Drift embedding_drift(const EmbeddingMatrix& a, const EmbeddingMatrix& b);

struct MetricDistribution {
  double mean = 0.0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
  double std = 0.0;
  std::size_t n_queries = 0;
};

/// Population statistics. Throws ValidationError on empty input.
MetricDistribution summarize(std::span<const double> values);

/// Population standard deviation, computed on values shifted by the
/// first element so identical inputs give exactly 0.
double population_std(std::span<const double> values);

}  // namespace reprobench
