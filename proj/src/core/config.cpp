#include "reprobench/config.hpp"

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <cstdio>

#include "reprobench/errors.hpp"
#include "reprobench/rng.hpp"

namespace reprobench {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::size_t get_size(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_unsigned()) {
    throw ValidationError(std::string("config: missing or invalid unsigned field '") + key + "'");
  }
  return j.at(key).get<std::size_t>();
}

}  // namespace

IndexParams index_preset(std::string_view name) {
  if (name == "flat_l2") return FlatL2Params{};
  if (name == "flat_ip") return FlatIPParams{};
  if (name == "ivf") return IvfParams{};
  if (name == "hnsw_accurate") return HnswParams{32, 200, 128};
  if (name == "hnsw_fast" || name == "hnsw") return HnswParams{16, 40, 16};
  if (name == "lsh") return LshParams{};
  throw ValidationError("unknown index preset '" + std::string(name) + "'");
}

const std::vector<std::string>& index_preset_names() {
  static const std::vector<std::string> names = {"flat_l2",       "flat_ip",   "ivf",
                                                 "hnsw_accurate", "hnsw_fast", "lsh"};
  return names;
}

std::string index_kind_name(const IndexParams& params) {
  return std::visit(Overloaded{[](const FlatL2Params&) { return std::string("flat_l2"); },
                               [](const FlatIPParams&) { return std::string("flat_ip"); },
                               [](const IvfParams&) { return std::string("ivf"); },
                               [](const HnswParams&) { return std::string("hnsw"); },
                               [](const LshParams&) { return std::string("lsh"); }},
                    params);
}

MetricKind index_metric(const IndexParams& params) {
  return std::holds_alternative<FlatIPParams>(params) ? MetricKind::InnerProduct
                                                      : MetricKind::Distance;
}

void validate(const IndexParams& params) {
  std::visit(Overloaded{[](const FlatL2Params&) {}, [](const FlatIPParams&) {},
                        [](const IvfParams& p) {
                          if (p.nlist != 0 && p.nprobe > p.nlist) {
                            throw ValidationError("ivf: nprobe must be <= nlist");
                          }
                        },
                        [](const HnswParams& p) {
                          if (p.M < 2) throw ValidationError("hnsw: M must be >= 2");
                          if (p.ef_construction < 1 || p.ef_search < 1) {
                            throw ValidationError("hnsw: ef values must be >= 1");
                          }
                        },
                        [](const LshParams& p) {
                          if (p.n_bits < 1) throw ValidationError("lsh: n_bits must be >= 1");
                        }},
             params);
}

std::uint64_t effective_seed(const SeedPolicy& policy, std::size_t run_index) {
  if (policy.is_deterministic()) return policy.seed;
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  const auto ns = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(now).count());
  return mix64(ns ^ mix64(run_index + 1));
}

std::string_view to_string(ShardingStrategy::Kind kind) {
  switch (kind) {
    case ShardingStrategy::Kind::Hash: return "hash";
    case ShardingStrategy::Kind::Range: return "range";
    case ShardingStrategy::Kind::Random: return "random";
  }
  return "?";
}

ShardingStrategy::Kind parse_sharding(std::string_view name) {
  if (name == "hash") return ShardingStrategy::Kind::Hash;
  if (name == "range") return ShardingStrategy::Kind::Range;
  if (name == "random") return ShardingStrategy::Kind::Random;
  throw ValidationError("unknown sharding strategy '" + std::string(name) + "'");
}

void validate(const ExperimentConfig& config) {
  if (config.k < 1) throw ValidationError("k must be >= 1");
  if (config.n_runs < 1) throw ValidationError("n_runs must be >= 1");
  validate(config.index_params);
  if (config.shard_plan && config.shard_plan->n_nodes < 1) {
    throw ValidationError("shard plan needs n_nodes >= 1");
  }
}

nlohmann::json to_json(const IndexParams& params) {
  nlohmann::json j;
  j["type"] = index_kind_name(params);
  std::visit(Overloaded{[](const FlatL2Params&) {}, [](const FlatIPParams&) {},
                        [&j](const IvfParams& p) {
                          j["nlist"] = p.nlist;
                          j["nprobe"] = p.nprobe;
                          j["kmeans_iters"] = p.kmeans_iters;
                        },
                        [&j](const HnswParams& p) {
                          j["M"] = p.M;
                          j["ef_construction"] = p.ef_construction;
                          j["ef_search"] = p.ef_search;
                        },
                        [&j](const LshParams& p) { j["n_bits"] = p.n_bits; }},
             params);
  return j;
}

IndexParams index_params_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
    throw ValidationError("index params: missing 'type'");
  }
  const auto type = j.at("type").get<std::string>();
  if (type == "flat_l2") return FlatL2Params{};
  if (type == "flat_ip") return FlatIPParams{};
  if (type == "ivf") {
    return IvfParams{get_size(j, "nlist"), get_size(j, "nprobe"), get_size(j, "kmeans_iters")};
  }
  if (type == "hnsw") {
    return HnswParams{get_size(j, "M"), get_size(j, "ef_construction"), get_size(j, "ef_search")};
  }
  if (type == "lsh") return LshParams{get_size(j, "n_bits")};
  throw ValidationError("index params: unknown type '" + type + "'");
}

nlohmann::json to_json(const ExperimentConfig& config) {
  nlohmann::json j;
  j["index"] = to_json(config.index_params);
  j["k"] = config.k;
  j["n_runs"] = config.n_runs;
  j["precision"] = std::string(to_string(config.precision));
  nlohmann::json seed;
  if (config.seed_policy.is_deterministic()) {
    seed["mode"] = "deterministic";
    seed["seed"] = config.seed_policy.seed;
  } else {
    seed["mode"] = "non_deterministic";
  }
  j["seed_policy"] = seed;
  if (config.shard_plan) {
    nlohmann::json plan;
    plan["n_nodes"] = config.shard_plan->n_nodes;
    plan["strategy"] = std::string(to_string(config.shard_plan->strategy.kind));
    if (config.shard_plan->strategy.kind == ShardingStrategy::Kind::Random) {
      plan["seed"] = config.shard_plan->strategy.seed;
    }
    j["shard_plan"] = plan;
  } else {
    j["shard_plan"] = nullptr;
  }
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("config: expected an object");
  ExperimentConfig c;
  c.index_params = index_params_from_json(j.at("index"));
  c.k = get_size(j, "k");
  c.n_runs = get_size(j, "n_runs");
  c.precision = parse_precision(j.at("precision").get<std::string>());
  const auto& seed = j.at("seed_policy");
  const auto mode = seed.at("mode").get<std::string>();
  if (mode == "deterministic") {
    c.seed_policy = SeedPolicy::deterministic(seed.at("seed").get<std::uint64_t>());
  } else if (mode == "non_deterministic") {
    c.seed_policy = SeedPolicy::non_deterministic();
  } else {
    throw ValidationError("config: unknown seed mode '" + mode + "'");
  }
  if (j.contains("shard_plan") && !j.at("shard_plan").is_null()) {
    const auto& plan = j.at("shard_plan");
    ShardPlan p;
    p.n_nodes = get_size(plan, "n_nodes");
    p.strategy.kind = parse_sharding(plan.at("strategy").get<std::string>());
    if (p.strategy.kind == ShardingStrategy::Kind::Random) {
      p.strategy.seed = plan.at("seed").get<std::uint64_t>();
    }
    c.shard_plan = p;
  }
  validate(c);
  return c;
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw RuntimeError("sha256 digest failed");
  }
  std::string hex;
  hex.reserve(len * 2);
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

std::string config_fingerprint(const ExperimentConfig& config) {
  // nlohmann::json objects are std::map-backed, so dump() is key-sorted.
  return sha256_hex(to_json(config).dump());
}

}  // namespace reprobench
