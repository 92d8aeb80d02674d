#include "reprobench/types.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <unordered_set>

#include "reprobench/errors.hpp"
#include "reprobench/precision.hpp"

namespace reprobench {

std::string_view to_string(Precision p) {
  switch (p) {
    case Precision::FP32: return "FP32";
    case Precision::FP16: return "FP16";
    case Precision::BF16: return "BF16";
    case Precision::TF32: return "TF32";
  }
  return "?";
}

Precision parse_precision(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (Precision p : kAllPrecisions) {
    if (upper == to_string(p)) return p;
  }
  throw ValidationError("unknown precision format '" + std::string(name) + "'");
}

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dims, std::vector<float> data,
                                 Precision tag)
    : rows_(rows), dims_(dims), data_(std::move(data)), tag_(tag) {
  if (dims_ == 0) throw ValidationError("embedding dims must be >= 1");
  if (data_.size() != rows_ * dims_) {
    throw ValidationError("embedding data length " + std::to_string(data_.size()) +
                          " != rows*dims " + std::to_string(rows_ * dims_));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw ValidationError("non-finite embedding value at row " + std::to_string(i / dims_));
    }
  }
  if (tag_ != Precision::FP32) {
    for (float v : data_) {
      if (std::bit_cast<std::uint32_t>(quantize_value(v, tag_)) != std::bit_cast<std::uint32_t>(v)) {
        throw ValidationError("value not representable in " + std::string(to_string(tag_)));
      }
    }
  }
}

EmbeddingMatrix EmbeddingMatrix::slice(std::size_t first, std::size_t count) const {
  if (first + count > rows_) throw ValidationError("row slice out of range");
  std::vector<float> out(data_.begin() + static_cast<std::ptrdiff_t>(first * dims_),
                         data_.begin() + static_cast<std::ptrdiff_t>((first + count) * dims_));
  return EmbeddingMatrix(count, dims_, std::move(out), tag_);
}

VectorSet::VectorSet(std::vector<std::string> ids, EmbeddingMatrix embeddings)
    : ids_(std::move(ids)), embeddings_(std::move(embeddings)) {
  if (ids_.size() != embeddings_.rows()) {
    throw ValidationError("id count " + std::to_string(ids_.size()) + " != embedding rows " +
                          std::to_string(embeddings_.rows()));
  }
  std::unordered_set<std::string_view> seen;
  seen.reserve(ids_.size());
  for (const auto& id : ids_) {
    if (!seen.insert(id).second) throw ValidationError("duplicate id '" + id + "'");
  }
}

VectorSet VectorSet::slice(std::size_t first, std::size_t count) const {
  if (first + count > ids_.size()) throw ValidationError("slice out of range");
  std::vector<std::string> ids(ids_.begin() + static_cast<std::ptrdiff_t>(first),
                               ids_.begin() + static_cast<std::ptrdiff_t>(first + count));
  return VectorSet(std::move(ids), embeddings_.slice(first, count));
}

std::string padded_id(char prefix, std::size_t index, std::size_t total) {
  const std::size_t width = std::max<std::size_t>(6, std::to_string(total > 0 ? total - 1 : 0).size());
  std::string digits = std::to_string(index);
  std::string out(1, prefix);
  if (digits.size() < width) out.append(width - digits.size(), '0');
  out += digits;
  return out;
}

bool canonical_less(const ResultEntry& a, const ResultEntry& b, MetricKind metric) noexcept {
  if (a.score != b.score) {
    return metric == MetricKind::Distance ? a.score < b.score : a.score > b.score;
  }
  return a.doc_id < b.doc_id;
}

std::vector<ResultEntry> canonical_sort(std::vector<ResultEntry> entries, MetricKind metric) {
  for (const auto& e : entries) {
    if (!std::isfinite(e.score)) {
      throw ValidationError("non-finite score for doc '" + e.doc_id + "'");
    }
  }
  std::sort(entries.begin(), entries.end(), [metric](const ResultEntry& a, const ResultEntry& b) {
    return canonical_less(a, b, metric);
  });
  return entries;
}

bool identical_results(const ResultList& a, const ResultList& b) noexcept {
  if (a.query_id != b.query_id || a.entries.size() != b.entries.size()) return false;
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    if (a.entries[i].doc_id != b.entries[i].doc_id) return false;
    if (std::bit_cast<std::uint64_t>(a.entries[i].score) !=
        std::bit_cast<std::uint64_t>(b.entries[i].score)) {
      return false;
    }
  }
  return true;
}

}  // namespace reprobench
