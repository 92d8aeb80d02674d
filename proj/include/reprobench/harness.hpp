#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "reprobench/config.hpp"
#include "reprobench/distributed.hpp"
#include "reprobench/metrics.hpp"
#include "reprobench/precision.hpp"
#include "reprobench/synthetic.hpp"
#include "reprobench/types.hpp"

namespace reprobench {

/// Per-query values of one metric. A missing value (undefined for that
/// query, e.g. tau with < 2 common documents) counts as an exclusion.
struct MetricSeries {
  std::vector<std::optional<double>> raw;
  std::size_t exclusions = 0;
  std::optional<MetricDistribution> summary;  // absent if every value is excluded
};

MetricSeries make_series(std::vector<std::optional<double>> raw);

/// One row of a scenario table (an index preset, an index x strategy pair,
/// a format x mode pair, ...).
struct ReportCell {
  std::string name;
  std::map<std::string, MetricSeries> metrics;
  std::map<std::string, double> scalars;
  std::map<std::string, std::string> labels;
};

struct ReproReport {
  std::string scenario;
  nlohmann::json config = nlohmann::json::object();
  std::vector<std::string> fingerprints;
  std::vector<std::string> query_ids;
  std::vector<ReportCell> cells;
  std::optional<DriftMatrix> drift;
  /// Display-only reference values from full-scale runs. Never asserted.
  nlohmann::json annotations = nlohmann::json::object();
  /// Timestamps and timings. Excluded from determinism comparisons.
  nlohmann::json metadata = nlohmann::json::object();

  const ReportCell& cell(std::string_view name) const;
};

/// SHA-256 over ids, dims and float bits.
std::string vector_set_fingerprint(const VectorSet& v);

/// Preset name when params equal a preset, else the index kind.
std::string index_label(const IndexParams& params);

struct HarnessOptions {
  /// Search threads per run. Results do not depend on it.
  std::size_t threads = 1;
  /// Runs independent cells concurrently. Results do not depend on it.
  bool parallel_cells = false;
};

/// n_runs builds and searches under the seed policy. One cell with
/// per-query exact_match, jaccard, kendall_tau (pair means) and
/// score_stability; scalars emr and, for IVF, centroid_stability.
ReproReport run_repeated(const ExperimentConfig& config, const DocumentCorpus& corpus,
                         const QuerySet& queries, const HarnessOptions& options = {});

/// run_repeated for each named preset, one cell per preset.
ReproReport scenario_stability(const std::vector<std::string>& presets, const ExperimentConfig& base,
                               const DocumentCorpus& corpus, const QuerySet& queries,
                               const HarnessOptions& options = {});

/// Build on the first ceil(split_ratio * n) documents, query, add the
/// rest, query again. Per-query overlap_count, overlap_coefficient, rbo,
/// kendall_tau.
ReproReport scenario_insertion(const IndexParams& index_params, const DocumentCorpus& corpus,
                               double split_ratio, const QuerySet& queries, std::size_t k,
                               std::uint64_t seed);

/// Exact L2 search in two embedding spaces of the same documents and
/// queries; per-query agreement between the two lists.
ReproReport scenario_cross_embedding(const std::pair<DocumentCorpus, QuerySet>& emb_a,
                                     const std::pair<DocumentCorpus, QuerySet>& emb_b,
                                     std::size_t k);

struct PrecisionScenarioSpec {
  std::uint64_t corpus_seed = 42;
  std::size_t rows = 1000;
  std::size_t dims = 128;
  std::vector<Precision> formats{kAllPrecisions.begin(), kAllPrecisions.end()};
  std::vector<SeedPolicy::Mode> modes{SeedPolicy::Mode::Deterministic,
                                      SeedPolicy::Mode::NonDeterministic};
  std::size_t n_runs = 5;
};

/// same_config_repro for every format x mode cell over unit-Gaussian
/// embeddings, plus the cross-format drift matrix.
ReproReport scenario_precision(const PrecisionScenarioSpec& spec);

struct DistributedScenarioSpec {
  std::size_t k = 50;
  std::size_t n_nodes = 4;
  std::uint64_t seed = 42;
  std::size_t n_runs = 5;
  std::vector<std::string> indexes{"flat_l2", "ivf", "hnsw", "lsh"};
  std::vector<ShardingStrategy::Kind> strategies{ShardingStrategy::Kind::Hash,
                                                 ShardingStrategy::Kind::Range,
                                                 ShardingStrategy::Kind::Random};
  TransportKind transport = TransportKind::InProcess;
};

/// Index x strategy matrix of repeated distributed searches. Flat cells
/// carry label exact_single_node = pass|fail.
ReproReport scenario_distributed(const DocumentCorpus& corpus, const QuerySet& queries,
                                 const DistributedScenarioSpec& spec,
                                 const HarnessOptions& options = {});

/// Corpus sizes for the insertion scenario: "desk" (10000 docs) and
/// "s1" (9900 docs, an 80/20 split of 7920 + 1980).
SyntheticSpec insertion_size_preset(std::string_view name);

}  // namespace reprobench
