#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "reprobench/bytes.hpp"
#include "reprobench/config.hpp"
#include "reprobench/types.hpp"

namespace reprobench {

/// FNV-1a 64-bit (offset 0xcbf29ce484222325, prime 0x100000001b3).
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// doc_id -> node, stored in corpus row order.
struct ShardAssignment {
  std::size_t n_nodes = 1;
  std::vector<std::uint32_t> node_of;  // per corpus row

  std::vector<std::vector<std::size_t>> rows_by_node() const;
};

/// Hash: fnv1a64(id) mod n. Range: the first (n mod nodes) nodes take
/// ceil(n/nodes) contiguous rows, the rest floor(n/nodes). Random: seeded
/// Fisher-Yates permutation of the rows, then range-split.
ShardAssignment shard(const DocumentCorpus& corpus, std::size_t n_nodes,
                      const ShardingStrategy& strategy);

/// Seed used by node `node_id`: seed XOR node_id. The index RNGs mix the
/// key, so adjacent node seeds give unrelated streams.
std::uint64_t node_seed(std::uint64_t seed, std::uint32_t node_id) noexcept;

struct CandidateBatch {
  std::uint32_t node_id = 0;
  std::string query_id;
  std::vector<ResultEntry> entries;
};

/// Union of all batches for one query, canonically sorted and cut to k.
/// Independent of batch order. Throws ValidationError on mixed query ids.
ResultList merge_candidates(std::span<const CandidateBatch> batches, std::size_t k,
                            MetricKind metric);

// ---------------------------------------------------------------------------
// Wire format: u32 frame length | "VXRP" | u16 version | u8 type | payload,
// all little-endian. The length counts every byte after itself.

inline constexpr std::uint16_t kWireVersion = 1;

namespace wire {

struct Hello {
  std::uint32_t node_id = 0;
  std::uint32_t n_nodes = 1;
  std::uint64_t seed = 0;  // already node-specific
  IndexParams index_params;
};
struct Shard {
  std::vector<std::string> ids;
  std::uint32_t dims = 1;
  std::vector<float> values;
};
struct BarrierAck {
  std::uint32_t node_id = 0;
  std::uint64_t doc_count = 0;
};
struct Query {
  std::string query_id;
  std::uint32_t k = 1;
  std::vector<float> vector;
};
struct Candidates {
  CandidateBatch batch;
};
struct Done {};

using Message = std::variant<Hello, Shard, BarrierAck, Query, Candidates, Done>;

enum class Type : std::uint8_t { Hello = 1, Shard = 2, BarrierAck = 3, Query = 4, Candidates = 5, Done = 6 };

/// Full frame including the length prefix.
std::vector<std::uint8_t> encode(const Message& msg);
/// Decodes a full frame. Throws ValidationError on bad magic, version,
/// type, or length.
Message decode(std::span<const std::uint8_t> frame);

}  // namespace wire

/// One end of a bidirectional, ordered, reliable frame channel.
class Endpoint {
 public:
  virtual ~Endpoint() = default;
  virtual void send(std::vector<std::uint8_t> frame) = 0;
  /// Blocks until a full frame arrives.
  virtual std::vector<std::uint8_t> receive() = 0;
};

enum class TransportKind : std::uint8_t { InProcess, LocalSocket };
std::string_view to_string(TransportKind kind);
TransportKind parse_transport(std::string_view name);

/// The node side of the protocol: HELLO, SHARD, build, BARRIER_ACK, then
/// answer QUERY frames with CANDIDATES until DONE.
void run_node(Endpoint& root);

struct DistributedOptions {
  TransportKind transport = TransportKind::InProcess;
  /// Permutes the gathered batches of each query before the merge.
  /// Test hook for arrival-order independence.
  std::function<void(std::vector<CandidateBatch>&)> gather_shuffle;
};

/// Scatter-gather search over n_nodes workers, each holding an index of
/// its shard. The root waits at a barrier for every node's BARRIER_ACK
/// before broadcasting any query, gathers per-node top-k candidates with
/// their true scores, and merges them.
std::vector<ResultList> distributed_search(const DocumentCorpus& corpus, const QuerySet& queries,
                                           std::size_t k, std::size_t n_nodes,
                                           const ShardingStrategy& strategy,
                                           const IndexParams& index_params, std::uint64_t seed,
                                           const DistributedOptions& options = {});

}  // namespace reprobench
