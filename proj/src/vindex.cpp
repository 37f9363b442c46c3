/* Copyright (c) 2026 The Ananke Authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */

#include "ananke/vindex.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>

namespace ananke {

EmbeddingVector::EmbeddingVector(std::vector<float> values) : values_(std::move(values)) {
  for (float v : values_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kEmbedder, "embedding has a non-finite component");
  }
}

double EmbeddingVector::norm() const {
  double sum = 0.0;
  for (float v : values_) sum += static_cast<double>(v) * v;
  return std::sqrt(sum);
}

namespace {

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (std::isspace(c) || (c < 0x80 && std::ispunct(c))) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current += static_cast<char>(std::tolower(c));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

LocalHashEmbedder::LocalHashEmbedder(std::size_t dim) : dim_(dim) {
  if (dim_ == 0) throw Error(ErrorCode::kConfigInvalid, "embedding dimension must be >= 1");
}

std::string LocalHashEmbedder::id() const { return "local-hash-v1-" + std::to_string(dim_); }

EmbeddingVector LocalHashEmbedder::embed(std::string_view text) const {
  std::vector<double> acc(dim_, 0.0);
  for (const auto& token : tokenize(text)) {
    const std::uint64_t h = fnv1a(token);
    const double sign = ((h >> 63) & 1u) ? -1.0 : 1.0;
    acc[h % dim_] += sign;
  }
  double norm = 0.0;
  for (double v : acc) norm += v * v;
  norm = std::sqrt(norm);
  std::vector<float> values(dim_, 0.0f);
  if (norm > 0.0) {
    for (std::size_t i = 0; i < dim_; ++i) values[i] = static_cast<float>(acc[i] / norm);
  }
  return EmbeddingVector(std::move(values));
}

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::kCosine: return "cosine";
    case Metric::kInnerProduct: return "ip";
    case Metric::kEuclidean: return "euclid";
  }
  return "cosine";
}

Metric parse_metric(std::string_view text) {
  const std::string lower = to_lower(trim(text));
  if (lower == "cosine") return Metric::kCosine;
  if (lower == "ip" || lower == "inner_product" || lower == "innerproduct") return Metric::kInnerProduct;
  if (lower == "euclid" || lower == "euclidean") return Metric::kEuclidean;
  throw Error(ErrorCode::kConfigInvalid, "unknown metric '" + lower + "' (cosine|ip|euclid)");
}

double similarity(const EmbeddingVector& a, const EmbeddingVector& b, Metric metric) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
  const auto& x = a.values();
  const auto& y = b.values();
  switch (metric) {
    case Metric::kCosine:
    case Metric::kInnerProduct: {
      double dot = 0.0;
      double xx = 0.0;
      double yy = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        dot += static_cast<double>(x[i]) * y[i];
        xx += static_cast<double>(x[i]) * x[i];
        yy += static_cast<double>(y[i]) * y[i];
      }
      if (metric == Metric::kInnerProduct) return dot;
      if (xx == 0.0 || yy == 0.0) return 0.0;
      return dot / (std::sqrt(xx) * std::sqrt(yy));
    }
    case Metric::kEuclidean: {
      double sum = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = static_cast<double>(x[i]) - y[i];
        sum += d * d;
      }
      return -std::sqrt(sum);
    }
  }
  return 0.0;
}

void VectorIndex::add(std::string unit_id, EmbeddingVector vector) {
  if (vector.dim() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch, "index dim " + std::to_string(dim_) +
                                                   ", vector dim " + std::to_string(vector.dim()));
  }
  if (positions_.count(unit_id)) throw Error(ErrorCode::kDuplicateUnit, unit_id);
  positions_.emplace(unit_id, entries_.size());
  entries_.emplace_back(std::move(unit_id), std::move(vector));
}

std::vector<SearchHit> VectorIndex::search(const EmbeddingVector& query, std::size_t k) const {
  if (k == 0) throw Error(ErrorCode::kConfigInvalid, "k must be >= 1");
  if (entries_.empty()) throw Error(ErrorCode::kEmptyIndex, "search on an empty index");
  if (query.dim() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch, "index dim " + std::to_string(dim_) +
                                                   ", query dim " + std::to_string(query.dim()));
  }
  std::vector<SearchHit> hits;
  hits.reserve(entries_.size());
  for (const auto& [id, vec] : entries_) hits.push_back({id, similarity(query, vec, metric_)});
  const auto better = [](const SearchHit& a, const SearchHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.unit_id < b.unit_id;
  };
  const std::size_t keep = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(), better);
  hits.resize(keep);
  return hits;
}

std::string serialize_sequence(const std::vector<Event>& events) {
  std::string out;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (i > 0) out += '\n';
    out += events[i].subject.canonical_key;
    out += ' ';
    out += events[i].action;
    out += ' ';
    out += events[i].object.canonical_key;
  }
  return out;
}

}  // namespace ananke
