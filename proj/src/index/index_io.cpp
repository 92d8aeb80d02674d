#include <istream>
#include <iterator>
#include <ostream>

#include "index_impl.hpp"
#include "reprobench/errors.hpp"

namespace reprobench {

namespace {

constexpr char kMagic[] = "VXIX";

enum class IndexTag : std::uint8_t { FlatL2 = 0, FlatIP = 1, Ivf = 2, Hnsw = 3, Lsh = 4 };

void write_params(ByteWriter& out, const IndexParams& params) {
  if (std::holds_alternative<FlatL2Params>(params)) {
    out.u8(static_cast<std::uint8_t>(IndexTag::FlatL2));
  } else if (std::holds_alternative<FlatIPParams>(params)) {
    out.u8(static_cast<std::uint8_t>(IndexTag::FlatIP));
  } else if (const auto* ivf = std::get_if<IvfParams>(&params)) {
    out.u8(static_cast<std::uint8_t>(IndexTag::Ivf));
    out.u64(ivf->nlist);
    out.u64(ivf->nprobe);
    out.u64(ivf->kmeans_iters);
  } else if (const auto* h = std::get_if<HnswParams>(&params)) {
    out.u8(static_cast<std::uint8_t>(IndexTag::Hnsw));
    out.u64(h->M);
    out.u64(h->ef_construction);
    out.u64(h->ef_search);
  } else if (const auto* l = std::get_if<LshParams>(&params)) {
    out.u8(static_cast<std::uint8_t>(IndexTag::Lsh));
    out.u64(l->n_bits);
  }
}

}  // namespace

// Also used by the distributed wire format.
void encode_index_params(ByteWriter& out, const IndexParams& params) { write_params(out, params); }

IndexParams decode_index_params(ByteReader& in) {
  IndexParams p;
  switch (static_cast<IndexTag>(in.u8())) {
    case IndexTag::FlatL2: p = FlatL2Params{}; break;
    case IndexTag::FlatIP: p = FlatIPParams{}; break;
    case IndexTag::Ivf: {
      IvfParams ivf;
      ivf.nlist = in.u64();
      ivf.nprobe = in.u64();
      ivf.kmeans_iters = in.u64();
      p = ivf;
      break;
    }
    case IndexTag::Hnsw: {
      HnswParams h;
      h.M = in.u64();
      h.ef_construction = in.u64();
      h.ef_search = in.u64();
      p = h;
      break;
    }
    case IndexTag::Lsh: p = LshParams{in.u64()}; break;
    default: throw ValidationError("unknown index type tag");
  }
  validate(p);
  return p;
}

void save_index(const VectorIndex& index, std::ostream& out) {
  ByteWriter w;
  w.raw(kMagic);
  w.u16(kIndexFormatVersion);
  write_params(w, index.params());
  w.u64(index.seed());
  w.u32(static_cast<std::uint32_t>(index.dims()));
  w.u64(index.size());
  for (const auto& id : index.ids()) w.str(id);
  for (std::size_t i = 0; i < index.size(); ++i) w.f32s(index.vector(i));
  index.save_structure(w);
  const auto& bytes = w.bytes();
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw RuntimeError("failed to write index");
}

std::unique_ptr<VectorIndex> load_index(std::istream& in) {
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  ByteReader r(bytes, "index file");
  if (r.raw(4) != kMagic) throw ValidationError("index file: bad magic");
  const std::uint16_t version = r.u16();
  if (version != kIndexFormatVersion) {
    throw ValidationError("index file: unsupported version " + std::to_string(version));
  }
  const IndexParams params = decode_index_params(r);
  const std::uint64_t seed = r.u64();
  const std::uint32_t dims = r.u32();
  const std::uint64_t rows = r.u64();
  if (dims == 0) throw ValidationError("index file: dims must be >= 1");
  if (rows > r.remaining()) throw ValidationError("index file: truncated data");

  auto index = detail::make_empty_index(params, seed, dims);
  std::vector<std::string> ids;
  ids.reserve(rows);
  for (std::uint64_t i = 0; i < rows; ++i) ids.push_back(r.str());
  auto vectors = r.f32s(rows * dims);
  DocumentCorpus rows_corpus(std::move(ids), EmbeddingMatrix(rows, dims, std::move(vectors)));
  index->append_rows(rows_corpus);
  index->load_structure(r);
  if (!r.done()) throw ValidationError("index file: trailing bytes");
  return index;
}

}  // namespace reprobench
