#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <exception>
#include <mutex>
#include <thread>

#include "reprobench/distributed.hpp"
#include "reprobench/errors.hpp"
#include "reprobench/index.hpp"

namespace reprobench {

std::string_view to_string(TransportKind kind) {
  return kind == TransportKind::InProcess ? "inproc" : "socket";
}

TransportKind parse_transport(std::string_view name) {
  if (name == "inproc") return TransportKind::InProcess;
  if (name == "socket") return TransportKind::LocalSocket;
  throw ValidationError("unknown transport '" + std::string(name) + "'");
}

namespace {

// ---------------------------------------------------------------------------
// In-process transport: a pair of closable blocking queues.

class FrameQueue {
 public:
  void push(std::vector<std::uint8_t> frame) {
    {
      std::lock_guard lock(mu_);
      frames_.push_back(std::move(frame));
    }
    cv_.notify_one();
  }
  std::vector<std::uint8_t> pop() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [this] { return !frames_.empty() || closed_; });
    if (frames_.empty()) throw RuntimeError("transport: peer closed the channel");
    auto f = std::move(frames_.front());
    frames_.pop_front();
    return f;
  }
  void close() {
    {
      std::lock_guard lock(mu_);
      closed_ = true;
    }
    cv_.notify_all();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::vector<std::uint8_t>> frames_;
  bool closed_ = false;
};

class QueueEndpoint final : public Endpoint {
 public:
  QueueEndpoint(std::shared_ptr<FrameQueue> out, std::shared_ptr<FrameQueue> in)
      : out_(std::move(out)), in_(std::move(in)) {}
  void send(std::vector<std::uint8_t> frame) override { out_->push(std::move(frame)); }
  std::vector<std::uint8_t> receive() override { return in_->pop(); }
  void close() {
    out_->close();
    in_->close();
  }

 private:
  std::shared_ptr<FrameQueue> out_;
  std::shared_ptr<FrameQueue> in_;
};

// ---------------------------------------------------------------------------
// Local-socket transport: length-prefixed frames over a socketpair.

class SocketEndpoint final : public Endpoint {
 public:
  explicit SocketEndpoint(int fd) : fd_(fd) {}
  ~SocketEndpoint() override {
    if (fd_ >= 0) ::close(fd_);
  }
  SocketEndpoint(const SocketEndpoint&) = delete;
  SocketEndpoint& operator=(const SocketEndpoint&) = delete;

  void send(std::vector<std::uint8_t> frame) override {
    std::size_t off = 0;
    while (off < frame.size()) {
      const ssize_t n = ::write(fd_, frame.data() + off, frame.size() - off);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw RuntimeError(std::string("transport: write failed: ") + std::strerror(errno));
      off += static_cast<std::size_t>(n);
    }
  }

  std::vector<std::uint8_t> receive() override {
    std::vector<std::uint8_t> frame(4);
    read_exact(frame.data(), 4);
    const std::uint32_t len = static_cast<std::uint32_t>(frame[0]) | (static_cast<std::uint32_t>(frame[1]) << 8) |
                              (static_cast<std::uint32_t>(frame[2]) << 16) |
                              (static_cast<std::uint32_t>(frame[3]) << 24);
    frame.resize(4 + static_cast<std::size_t>(len));
    read_exact(frame.data() + 4, len);
    return frame;
  }

 private:
  void read_exact(std::uint8_t* dst, std::size_t n) {
    std::size_t off = 0;
    while (off < n) {
      const ssize_t got = ::read(fd_, dst + off, n - off);
      if (got < 0 && errno == EINTR) continue;
      if (got == 0) throw RuntimeError("transport: peer closed the socket");
      if (got < 0) throw RuntimeError(std::string("transport: read failed: ") + std::strerror(errno));
      off += static_cast<std::size_t>(got);
    }
  }
  int fd_;
};

template <class T>
T expect(Endpoint& ep, const char* what) {
  auto msg = wire::decode(ep.receive());
  if (auto* m = std::get_if<T>(&msg)) return std::move(*m);
  throw RuntimeError(std::string("protocol: expected ") + what);
}

/// Root-side handle on the running node workers.
class NodeGroup {
 public:
  virtual ~NodeGroup() = default;
  virtual Endpoint& node(std::size_t i) = 0;
  virtual std::size_t size() const = 0;
  /// Waits for every worker to exit; rethrows a worker failure.
  virtual void join() = 0;
};

class ThreadGroup final : public NodeGroup {
 public:
  explicit ThreadGroup(std::size_t n) : errors_(n) {
    for (std::size_t i = 0; i < n; ++i) {
      auto to_node = std::make_shared<FrameQueue>();
      auto to_root = std::make_shared<FrameQueue>();
      root_side_.push_back(std::make_unique<QueueEndpoint>(to_node, to_root));
      node_side_.push_back(std::make_unique<QueueEndpoint>(to_root, to_node));
    }
    for (std::size_t i = 0; i < n; ++i) {
      workers_.emplace_back([this, i] {
        try {
          run_node(*node_side_[i]);
        } catch (...) {
          errors_[i] = std::current_exception();
          node_side_[i]->close();
        }
      });
    }
  }
  ~ThreadGroup() override {
    for (auto& ep : root_side_) ep->close();
  }
  Endpoint& node(std::size_t i) override { return *root_side_[i]; }
  std::size_t size() const override { return root_side_.size(); }
  void join() override {
    for (auto& w : workers_) w.join();
    workers_.clear();
    for (auto& e : errors_) {
      if (e) std::rethrow_exception(e);
    }
  }

 private:
  std::vector<std::unique_ptr<QueueEndpoint>> root_side_;
  std::vector<std::unique_ptr<QueueEndpoint>> node_side_;
  std::vector<std::exception_ptr> errors_;
  std::vector<std::jthread> workers_;
};

class ProcessGroup final : public NodeGroup {
 public:
  explicit ProcessGroup(std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      int fds[2];
      if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0) {
        throw RuntimeError(std::string("transport: socketpair failed: ") + std::strerror(errno));
      }
      const pid_t pid = ::fork();
      if (pid < 0) {
        ::close(fds[0]);
        ::close(fds[1]);
        throw RuntimeError(std::string("transport: fork failed: ") + std::strerror(errno));
      }
      if (pid == 0) {
        ::close(fds[0]);
        int code = 0;
        try {
          SocketEndpoint ep(fds[1]);
          run_node(ep);
        } catch (...) {
          code = 1;
        }
        ::_exit(code);
      }
      ::close(fds[1]);
      endpoints_.push_back(std::make_unique<SocketEndpoint>(fds[0]));
      pids_.push_back(pid);
    }
  }
  ~ProcessGroup() override {
    endpoints_.clear();
    reap();
  }
  Endpoint& node(std::size_t i) override { return *endpoints_[i]; }
  std::size_t size() const override { return endpoints_.size(); }
  void join() override {
    if (!reap()) throw RuntimeError("transport: a node process failed");
  }

 private:
  bool reap() {
    bool ok = true;
    for (pid_t pid : pids_) {
      int status = 0;
      while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
      }
      ok = ok && WIFEXITED(status) && WEXITSTATUS(status) == 0;
    }
    pids_.clear();
    return ok;
  }
  std::vector<std::unique_ptr<SocketEndpoint>> endpoints_;
  std::vector<pid_t> pids_;
};

}  // namespace

void run_node(Endpoint& root) {
  const auto hello = expect<wire::Hello>(root, "HELLO");
  auto shard_msg = expect<wire::Shard>(root, "SHARD");
  const std::size_t count = shard_msg.ids.size();
  std::unique_ptr<VectorIndex> index;
  if (count > 0) {
    DocumentCorpus local(std::move(shard_msg.ids),
                         EmbeddingMatrix(count, shard_msg.dims, std::move(shard_msg.values)));
    index = build_index(hello.index_params, local, hello.seed);
  }
  root.send(wire::encode(wire::BarrierAck{hello.node_id, count}));

  for (;;) {
    auto msg = wire::decode(root.receive());
    if (std::holds_alternative<wire::Done>(msg)) return;
    auto* q = std::get_if<wire::Query>(&msg);
    if (q == nullptr) throw RuntimeError("protocol: expected QUERY or DONE");
    wire::Candidates reply;
    reply.batch.node_id = hello.node_id;
    reply.batch.query_id = q->query_id;
    if (index) reply.batch.entries = index->search_one(q->vector, q->k);
    root.send(wire::encode(reply));
  }
}

std::vector<ResultList> distributed_search(const DocumentCorpus& corpus, const QuerySet& queries,
                                           std::size_t k, std::size_t n_nodes,
                                           const ShardingStrategy& strategy,
                                           const IndexParams& index_params, std::uint64_t seed,
                                           const DistributedOptions& options) {
  if (n_nodes < 1) throw ValidationError("distributed_search: n_nodes must be >= 1");
  if (k < 1) throw ValidationError("distributed_search: k must be >= 1");
  validate(index_params);
  if (!queries.empty() && !corpus.empty() && queries.dims() != corpus.dims()) {
    throw ValidationError("distributed_search: query dims do not match corpus dims");
  }
  const ShardAssignment assignment = shard(corpus, n_nodes, strategy);
  const auto rows = assignment.rows_by_node();

  std::unique_ptr<NodeGroup> group;
  if (options.transport == TransportKind::InProcess) {
    group = std::make_unique<ThreadGroup>(n_nodes);
  } else {
    group = std::make_unique<ProcessGroup>(n_nodes);
  }

  // Phase 1: scatter shards.
  const std::size_t d = corpus.dims();
  for (std::size_t node = 0; node < n_nodes; ++node) {
    const auto id = static_cast<std::uint32_t>(node);
    group->node(node).send(wire::encode(
        wire::Hello{id, static_cast<std::uint32_t>(n_nodes), node_seed(seed, id), index_params}));
    wire::Shard s;
    s.dims = static_cast<std::uint32_t>(d);
    s.ids.reserve(rows[node].size());
    s.values.reserve(rows[node].size() * d);
    for (std::size_t r : rows[node]) {
      s.ids.push_back(corpus.ids()[r]);
      const auto v = corpus.embeddings().row(r);
      s.values.insert(s.values.end(), v.begin(), v.end());
    }
    group->node(node).send(wire::encode(s));
  }

  // Phase 2: barrier. No query leaves the root before every node has
  // finished building its local index.
  for (std::size_t node = 0; node < n_nodes; ++node) {
    const auto ack = expect<wire::BarrierAck>(group->node(node), "BARRIER_ACK");
    if (ack.node_id != node || ack.doc_count != rows[node].size()) {
      throw RuntimeError("protocol: inconsistent BARRIER_ACK from node " + std::to_string(node));
    }
  }

  // Phase 3 and 4: broadcast, gather, merge.
  const MetricKind metric = index_metric(index_params);
  std::vector<ResultList> out;
  out.reserve(queries.size());
  std::vector<CandidateBatch> batches;
  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    const auto v = queries.embeddings().row(qi);
    const auto frame = wire::encode(wire::Query{queries.ids()[qi], static_cast<std::uint32_t>(k),
                                                std::vector<float>(v.begin(), v.end())});
    for (std::size_t node = 0; node < n_nodes; ++node) group->node(node).send(frame);
    batches.clear();
    for (std::size_t node = 0; node < n_nodes; ++node) {
      auto reply = expect<wire::Candidates>(group->node(node), "CANDIDATES");
      if (reply.batch.query_id != queries.ids()[qi]) throw RuntimeError("protocol: reply for wrong query");
      batches.push_back(std::move(reply.batch));
    }
    if (options.gather_shuffle) options.gather_shuffle(batches);
    ResultList merged = merge_candidates(batches, k, metric);
    merged.query_id = queries.ids()[qi];
    out.push_back(std::move(merged));
  }

  for (std::size_t node = 0; node < n_nodes; ++node) group->node(node).send(wire::encode(wire::Done{}));
  group->join();
  return out;
}

}  // namespace reprobench
