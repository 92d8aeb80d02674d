#include <bit>

#include "index_impl.hpp"
#include "reprobench/distance.hpp"
#include "reprobench/errors.hpp"

namespace reprobench::detail {

LshIndex::LshIndex(LshParams params, std::uint64_t seed, std::size_t dims)
    : VectorIndex(params, seed, dims), lsh_(params), words_((params.n_bits + 63) / 64) {
  CounterRng rng(seed);
  hyperplanes_.resize(lsh_.n_bits * dims_);
  for (float& h : hyperplanes_) h = static_cast<float>(rng.next_gaussian());
}

std::vector<std::uint64_t> LshIndex::encode(std::span<const float> v) const {
  std::vector<std::uint64_t> code(words_, 0);
  for (std::size_t b = 0; b < lsh_.n_bits; ++b) {
    const std::span<const float> plane(hyperplanes_.data() + b * dims_, dims_);
    if (dot(plane, v) >= 0.0) code[b / 64] |= std::uint64_t{1} << (b % 64);
  }
  return code;
}

void LshIndex::on_added(std::size_t first) {
  codes_.reserve(size() * words_);
  for (std::size_t i = first; i < size(); ++i) {
    const auto code = encode(vector(i));
    codes_.insert(codes_.end(), code.begin(), code.end());
  }
}

Scored LshIndex::candidates(std::span<const float> query, std::size_t) const {
  const auto q = encode(query);
  Scored out(size());
  for (std::size_t i = 0; i < size(); ++i) {
    int hamming = 0;
    for (std::size_t w = 0; w < words_; ++w) hamming += std::popcount(q[w] ^ codes_[i * words_ + w]);
    out[i] = {static_cast<std::uint32_t>(i), static_cast<double>(hamming)};
  }
  return out;
}

void LshIndex::save_structure(ByteWriter& out) const {
  out.f32s(hyperplanes_);
  for (std::uint64_t w : codes_) out.u64(w);
}

void LshIndex::load_structure(ByteReader& in) {
  hyperplanes_ = in.f32s(lsh_.n_bits * dims_);
  codes_.resize(size() * words_);
  for (auto& w : codes_) w = in.u64();
}

}  // namespace reprobench::detail
