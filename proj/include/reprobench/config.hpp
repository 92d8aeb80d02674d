#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "reprobench/types.hpp"

namespace reprobench {

struct FlatL2Params {
  friend bool operator==(const FlatL2Params&, const FlatL2Params&) = default;
};
struct FlatIPParams {
  friend bool operator==(const FlatIPParams&, const FlatIPParams&) = default;
};
/// nlist/nprobe of 0 mean "derive from corpus size" (ceil(sqrt(n)) and
/// max(1, nlist / 8)).
struct IvfParams {
  std::size_t nlist = 0;
  std::size_t nprobe = 0;
  std::size_t kmeans_iters = 20;
  friend bool operator==(const IvfParams&, const IvfParams&) = default;
};
struct HnswParams {
  std::size_t M = 16;
  std::size_t ef_construction = 40;
  std::size_t ef_search = 16;
  friend bool operator==(const HnswParams&, const HnswParams&) = default;
};
struct LshParams {
  std::size_t n_bits = 256;
  friend bool operator==(const LshParams&, const LshParams&) = default;
};

using IndexParams = std::variant<FlatL2Params, FlatIPParams, IvfParams, HnswParams, LshParams>;

/// Named presets: flat_l2, flat_ip, ivf, hnsw_accurate, hnsw_fast, lsh.
IndexParams index_preset(std::string_view name);
const std::vector<std::string>& index_preset_names();
std::string index_kind_name(const IndexParams& params);
MetricKind index_metric(const IndexParams& params);
/// Checks the parameter invariants that do not depend on the corpus.
void validate(const IndexParams& params);

struct SeedPolicy {
  enum class Mode : std::uint8_t { Deterministic, NonDeterministic };
  Mode mode = Mode::Deterministic;
  std::uint64_t seed = 42;

  static SeedPolicy deterministic(std::uint64_t seed) { return {Mode::Deterministic, seed}; }
  static SeedPolicy non_deterministic() { return {Mode::NonDeterministic, 0}; }
  bool is_deterministic() const noexcept { return mode == Mode::Deterministic; }
  friend bool operator==(const SeedPolicy&, const SeedPolicy&) = default;
};

/// The seed a run actually uses: the fixed seed, or one drawn from the
/// wall clock (mixed with `run_index` so back-to-back runs differ).
std::uint64_t effective_seed(const SeedPolicy& policy, std::size_t run_index);

struct ShardingStrategy {
  enum class Kind : std::uint8_t { Hash, Range, Random };
  Kind kind = Kind::Hash;
  std::uint64_t seed = 0;  // Random only

  static ShardingStrategy hash() { return {Kind::Hash, 0}; }
  static ShardingStrategy range() { return {Kind::Range, 0}; }
  static ShardingStrategy random(std::uint64_t seed) { return {Kind::Random, seed}; }
  friend bool operator==(const ShardingStrategy&, const ShardingStrategy&) = default;
};
std::string_view to_string(ShardingStrategy::Kind kind);
ShardingStrategy::Kind parse_sharding(std::string_view name);

struct ShardPlan {
  std::size_t n_nodes = 1;
  ShardingStrategy strategy;
  friend bool operator==(const ShardPlan&, const ShardPlan&) = default;
};

struct ExperimentConfig {
  IndexParams index_params = FlatL2Params{};
  std::size_t k = 50;
  SeedPolicy seed_policy;
  Precision precision = Precision::FP32;
  std::size_t n_runs = 5;
  std::optional<ShardPlan> shard_plan;
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

void validate(const ExperimentConfig& config);

nlohmann::json to_json(const IndexParams& params);
IndexParams index_params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Lower-case hex SHA-256 of the canonical (sorted-key, compact) JSON form.
std::string config_fingerprint(const ExperimentConfig& config);
std::string sha256_hex(std::string_view bytes);

struct RunTimings {
  double build_ms = 0.0;
  double search_ms = 0.0;
};

struct RunRecord {
  std::string config_fingerprint;
  std::uint64_t effective_seed = 0;
  std::vector<ResultList> results;  // one per query, in query-set order
  RunTimings timings;
};

}  // namespace reprobench
