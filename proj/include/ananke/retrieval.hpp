/* Copyright (c) 2026 The Ananke Authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */

#pragma once

#include <cstddef>
#include <vector>

#include "ananke/kb.hpp"
#include "ananke/provenance.hpp"
#include "ananke/vindex.hpp"

namespace ananke {

struct RetrievedUnit {
  const KnowledgeUnit* unit = nullptr;
  double score = 0.0;
};

/// Embeds the sequence's serialization and returns the k best KB units,
/// best first. Throws kEmptyIndex, and kUnknownUnit if the index refers to a
/// unit the KB does not hold.
std::vector<RetrievedUnit> threat_retrieve(const VectorIndex& index, const KnowledgeBase& kb,
                                           const ContextSequence& seq, const Embedder& embedder,
                                           std::size_t k = 1);

}  // namespace ananke
