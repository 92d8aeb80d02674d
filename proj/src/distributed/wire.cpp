#include "reprobench/distributed.hpp"
#include "reprobench/errors.hpp"
#include "reprobench/index.hpp"

namespace reprobench::wire {

namespace {

constexpr char kMagic[] = "VXRP";

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void entries_out(ByteWriter& w, const std::vector<ResultEntry>& entries) {
  w.u32(static_cast<std::uint32_t>(entries.size()));
  for (const auto& e : entries) {
    w.str(e.doc_id);
    w.f64(e.score);
  }
}

}  // namespace

std::vector<std::uint8_t> encode(const Message& msg) {
  ByteWriter body;
  body.raw(kMagic);
  body.u16(kWireVersion);
  std::visit(Overloaded{
                 [&](const Hello& m) {
                   body.u8(static_cast<std::uint8_t>(Type::Hello));
                   body.u32(m.node_id);
                   body.u32(m.n_nodes);
                   body.u64(m.seed);
                   encode_index_params(body, m.index_params);
                 },
                 [&](const Shard& m) {
                   body.u8(static_cast<std::uint8_t>(Type::Shard));
                   body.u32(m.dims);
                   body.u64(m.ids.size());
                   for (const auto& id : m.ids) body.str(id);
                   body.f32s(m.values);
                 },
                 [&](const BarrierAck& m) {
                   body.u8(static_cast<std::uint8_t>(Type::BarrierAck));
                   body.u32(m.node_id);
                   body.u64(m.doc_count);
                 },
                 [&](const Query& m) {
                   body.u8(static_cast<std::uint8_t>(Type::Query));
                   body.str(m.query_id);
                   body.u32(m.k);
                   body.u32(static_cast<std::uint32_t>(m.vector.size()));
                   body.f32s(m.vector);
                 },
                 [&](const Candidates& m) {
                   body.u8(static_cast<std::uint8_t>(Type::Candidates));
                   body.u32(m.batch.node_id);
                   body.str(m.batch.query_id);
                   entries_out(body, m.batch.entries);
                 },
                 [&](const Done&) { body.u8(static_cast<std::uint8_t>(Type::Done)); },
             },
             msg);
  const auto& payload = body.bytes();
  ByteWriter frame;
  frame.u32(static_cast<std::uint32_t>(payload.size()));
  frame.raw(std::string_view(reinterpret_cast<const char*>(payload.data()), payload.size()));
  return std::move(frame).take();
}

Message decode(std::span<const std::uint8_t> frame) {
  ByteReader r(frame, "wire frame");
  const std::uint32_t len = r.u32();
  if (len != r.remaining()) throw ValidationError("wire frame: length prefix mismatch");
  if (r.raw(4) != kMagic) throw ValidationError("wire frame: bad magic");
  const std::uint16_t version = r.u16();
  if (version != kWireVersion) throw ValidationError("wire frame: unsupported version " + std::to_string(version));
  Message out;
  switch (static_cast<Type>(r.u8())) {
    case Type::Hello: {
      Hello m;
      m.node_id = r.u32();
      m.n_nodes = r.u32();
      m.seed = r.u64();
      m.index_params = decode_index_params(r);
      out = std::move(m);
      break;
    }
    case Type::Shard: {
      Shard m;
      m.dims = r.u32();
      if (m.dims == 0) throw ValidationError("wire frame: shard dims must be >= 1");
      const std::uint64_t count = r.u64();
      if (count > r.remaining()) throw ValidationError("wire frame: truncated data");
      m.ids.reserve(count);
      for (std::uint64_t i = 0; i < count; ++i) m.ids.push_back(r.str());
      m.values = r.f32s(count * m.dims);
      out = std::move(m);
      break;
    }
    case Type::BarrierAck: {
      BarrierAck m;
      m.node_id = r.u32();
      m.doc_count = r.u64();
      out = m;
      break;
    }
    case Type::Query: {
      Query m;
      m.query_id = r.str();
      m.k = r.u32();
      m.vector = r.f32s(r.u32());
      out = std::move(m);
      break;
    }
    case Type::Candidates: {
      Candidates m;
      m.batch.node_id = r.u32();
      m.batch.query_id = r.str();
      const std::uint32_t n = r.u32();
      if (n > r.remaining()) throw ValidationError("wire frame: truncated data");
      m.batch.entries.reserve(n);
      for (std::uint32_t i = 0; i < n; ++i) {
        ResultEntry e;
        e.doc_id = r.str();
        e.score = r.f64();
        m.batch.entries.push_back(std::move(e));
      }
      out = std::move(m);
      break;
    }
    case Type::Done: out = Done{}; break;
    default: throw ValidationError("wire frame: unknown message type");
  }
  if (!r.done()) throw ValidationError("wire frame: trailing bytes");
  return out;
}

}  // namespace reprobench::wire
