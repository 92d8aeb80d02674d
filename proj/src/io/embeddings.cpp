#include <cmath>
#include <fstream>
#include <iterator>
#include <unordered_set>

#include "reprobench/bytes.hpp"
#include "reprobench/errors.hpp"
#include "reprobench/io.hpp"

namespace reprobench {

namespace {

constexpr char kMagic[] = "RRE1";
constexpr std::size_t kHeaderBytes = 4 + 2 + 4 + 8 + 1;

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RuntimeError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  auto p = path;
  p += ".ids";
  return p;
}

void write_embeddings(const std::filesystem::path& path, const VectorSet& set, bool with_ids) {
  ByteWriter w;
  w.raw(kMagic);
  w.u16(kEmbeddingFormatVersion);
  w.u32(static_cast<std::uint32_t>(set.dims()));
  w.u64(set.size());
  w.u8(0);
  w.f32s(set.embeddings().data());
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    const auto& b = w.bytes();
    out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
    if (!out) throw RuntimeError("cannot write '" + path.string() + "'");
  }
  if (with_ids) {
    std::ofstream ids(sidecar_path(path), std::ios::binary | std::ios::trunc);
    for (const auto& id : set.ids()) ids << id << '\n';
    if (!ids) throw RuntimeError("cannot write '" + sidecar_path(path).string() + "'");
  }
}

VectorSet read_embeddings(const std::filesystem::path& path, char default_prefix) {
  const auto bytes = slurp(path);
  const std::string ctx = path.string();
  if (bytes.size() < 4 || std::string_view(reinterpret_cast<const char*>(bytes.data()), 4) != kMagic) {
    throw ValidationError(ctx + ": bad magic (not an RRE1 embedding file)");
  }
  if (bytes.size() < kHeaderBytes) throw ValidationError(ctx + ": truncated header");
  ByteReader r(bytes, ctx);
  r.raw(4);
  const std::uint16_t version = r.u16();
  if (version != kEmbeddingFormatVersion) {
    throw ValidationError(ctx + ": unsupported version " + std::to_string(version));
  }
  const std::uint32_t dims = r.u32();
  const std::uint64_t count = r.u64();
  const std::uint8_t dtype = r.u8();
  if (dtype != 0) throw ValidationError(ctx + ": unsupported dtype " + std::to_string(dtype));
  if (dims == 0) throw ValidationError(ctx + ": dims must be >= 1");
  const std::uint64_t payload = r.remaining();
  if (count > payload / 4 / dims || count * dims * 4 != payload) {
    throw ValidationError(ctx + ": payload length mismatch (header declares " + std::to_string(count) +
                          " x " + std::to_string(dims) + " floats, file holds " +
                          std::to_string(payload) + " bytes)");
  }
  auto values = r.f32s(count * dims);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw ValidationError(ctx + ": non-finite value at row " + std::to_string(i / dims) + ", column " +
                            std::to_string(i % dims));
    }
  }

  std::vector<std::string> ids;
  ids.reserve(count);
  const auto side = sidecar_path(path);
  if (std::filesystem::exists(side)) {
    std::ifstream in(side, std::ios::binary);
    if (!in) throw RuntimeError("cannot open '" + side.string() + "'");
    std::unordered_set<std::string> seen;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) throw ValidationError(side.string() + ": empty id on line " + std::to_string(ids.size() + 1));
      if (!seen.insert(line).second) throw ValidationError(side.string() + ": duplicate id '" + line + "'");
      ids.push_back(std::move(line));
    }
    if (ids.size() != count) {
      throw ValidationError(side.string() + ": " + std::to_string(ids.size()) + " ids for " +
                            std::to_string(count) + " vectors");
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) ids.push_back(padded_id(default_prefix, i, count));
  }
  return VectorSet(std::move(ids), EmbeddingMatrix(count, dims, std::move(values)));
}

}  // namespace reprobench
