/* Copyright (c) 2026 The Ananke Authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */

#include "ananke/retrieval.hpp"

namespace ananke {

std::vector<RetrievedUnit> threat_retrieve(const VectorIndex& index, const KnowledgeBase& kb,
                                           const ContextSequence& seq, const Embedder& embedder,
                                           std::size_t k) {
  if (index.size() == 0) throw Error(ErrorCode::kEmptyIndex, "knowledge base index is empty");
  const EmbeddingVector query = embedder.embed(serialize_sequence(seq.events));
  std::vector<RetrievedUnit> out;
  for (const auto& hit : index.search(query, k)) out.push_back({&kb.unit(hit.unit_id), hit.score});
  return out;
}

}  // namespace ananke
