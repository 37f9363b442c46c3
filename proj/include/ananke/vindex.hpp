/* Copyright (c) 2026 The Ananke Authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */

#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ananke/model.hpp"

namespace ananke {

/// Dense float32 vector. Construction rejects NaN/Inf components.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<float> values);

  const std::vector<float>& values() const { return values_; }
  std::size_t dim() const { return values_.size(); }
  double norm() const;

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

 private:
  std::vector<float> values_;
};

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::string id() const = 0;
  virtual std::size_t dim() const = 0;
  virtual EmbeddingVector embed(std::string_view text) const = 0;
};

/// Hashed bag-of-tokens embedding. Text is split on whitespace and ASCII
/// punctuation, tokens are lowercased, each token adds +1 or -1 (sign from
/// the hash) into one of `dim` buckets, and the sum is L2-normalized. Text
/// with no tokens embeds to the zero vector.
class LocalHashEmbedder final : public Embedder {
 public:
  explicit LocalHashEmbedder(std::size_t dim = 256);

  std::string id() const override;
  std::size_t dim() const override { return dim_; }
  EmbeddingVector embed(std::string_view text) const override;

 private:
  std::size_t dim_;
};

std::vector<std::string> tokenize(std::string_view text);

enum class Metric { kCosine, kInnerProduct, kEuclidean };

std::string_view to_string(Metric metric);
// Accepts cosine|ip|inner_product|euclid|euclidean. Throws kConfigInvalid.
Metric parse_metric(std::string_view text);

/// Higher is better for every metric: Euclidean is returned as -||a-b||.
/// Cosine with a zero-norm argument scores 0. Throws kDimensionMismatch.
double similarity(const EmbeddingVector& a, const EmbeddingVector& b, Metric metric);

struct SearchHit {
  std::string unit_id;
  double score = 0.0;

  friend bool operator==(const SearchHit&, const SearchHit&) = default;
};

// Exact flat index; single writer while building, read-only afterwards.
class VectorIndex {
 public:
  VectorIndex(Metric metric, std::size_t dim) : metric_(metric), dim_(dim) {}

  // Throws kDuplicateUnit or kDimensionMismatch.
  void add(std::string unit_id, EmbeddingVector vector);

  Metric metric() const { return metric_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  const std::vector<std::pair<std::string, EmbeddingVector>>& entries() const { return entries_; }

  /// Exact top-k by score descending, ties by unit_id ascending. k larger
  /// than the index returns everything. Throws kEmptyIndex,
  /// kDimensionMismatch, or kConfigInvalid for k == 0.
  std::vector<SearchHit> search(const EmbeddingVector& query, std::size_t k) const;

 private:
  Metric metric_;
  std::size_t dim_;
  std::vector<std::pair<std::string, EmbeddingVector>> entries_;
  std::unordered_map<std::string, std::size_t> positions_;
};

/// Retrieval text for an event sequence: one `<subject> <action> <object>`
/// line per event using canonical keys. Timestamps are left out so that
/// behaviourally identical sequences recorded at different times match.
std::string serialize_sequence(const std::vector<Event>& events);

}  // namespace ananke
