/* Copyright (c) 2026 The Ananke Authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */

#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ananke/kb.hpp"
#include "ananke/llm.hpp"
#include "ananke/provenance.hpp"
#include "ananke/retrieval.hpp"
#include "ananke/vindex.hpp"

namespace ananke {

inline constexpr std::string_view kInvestigationFormatVersion = "v1";
inline constexpr std::size_t kSummaryCap = 4000;

// Warning flags carried in results.
inline constexpr std::string_view kWarnIterationCap = "iteration_cap_reached";
inline constexpr std::string_view kWarnNarrativeUnavailable = "narrative_unavailable";

struct AlertSpec {
  std::vector<std::string> entities;  // canonical keys (or names resolved like LLM mentions)
  std::string description;

  friend bool operator==(const AlertSpec&, const AlertSpec&) = default;
};

nlohmann::json to_json(const AlertSpec& alert);
// Throws kSpecInvalid when entities is missing or empty.
AlertSpec alert_from_json(const nlohmann::json& j);
AlertSpec load_alert(const std::filesystem::path& path);

enum class EntityMatch { kExact, kSubstringFallback };
std::string_view to_string(EntityMatch mode);
EntityMatch parse_entity_match(std::string_view text);

struct InvestigationConfig {
  std::size_t n_max = kDefaultChunkSize;
  Metric metric = Metric::kCosine;
  std::size_t max_iterations = 500;  // reasoning calls
  InducedEdges induced_edges = InducedEdges::kFull;
  EntityMatch entity_match = EntityMatch::kExact;
  std::size_t retrieval_k = 1;

  // Throws kConfigInvalid when a bound is zero.
  void validate() const;
  friend bool operator==(const InvestigationConfig&, const InvestigationConfig&) = default;
};

nlohmann::json to_json(const InvestigationConfig& cfg);
InvestigationConfig investigation_config_from_json(const nlohmann::json& j);

/// Graph node for a mention. Exact mode tries the text as a node key, then
/// canonicalizes it under each kind (Process, File, IPAddress, Domain, Socket,
/// Registry, Other) and returns the first key present. Substring fallback
/// additionally accepts a single node whose key contains the normalized name.
std::optional<std::string> resolve_entity(const ProvenanceGraph& graph, const std::string& name,
                                          EntityMatch mode);

struct RetrievalRef {
  std::string unit_id;
  double score = 0.0;
  KillChainPhase phase = KillChainPhase::kReconnaissance;

  friend bool operator==(const RetrievalRef&, const RetrievalRef&) = default;
};

struct CacheEntry {
  std::size_t iteration = 0;  // 1-based
  std::string origin_node;
  std::size_t chunk_index = 0;
  std::vector<RetrievalRef> retrieved;  // best first
  ReasoningResponse response;
  TokenUsage usage;

  friend bool operator==(const CacheEntry&, const CacheEntry&) = default;
};

nlohmann::json to_json(const CacheEntry& entry);
CacheEntry cache_entry_from_json(const nlohmann::json& j);

struct UnmatchedName {
  std::size_t iteration = 0;
  std::string name;
  std::string reason;  // "unresolved" | "ambiguous" | "out_of_context"

  friend bool operator==(const UnmatchedName&, const UnmatchedName&) = default;
};

struct InvestigationResult {
  InvestigationConfig config;
  AlertSpec alert;
  std::vector<std::string> alert_keys;   // resolved alert nodes
  std::vector<std::string> expansions;   // nodes in expansion order
  std::vector<CacheEntry> cache;
  std::set<std::string> detected;
  std::vector<UnmatchedName> unmatched;
  std::string final_summary;
  TokenUsage usage;
  std::vector<std::string> warnings;
  // Scoring universe: every graph node, and every edge as (subject, object) node indices.
  std::vector<std::string> universe_nodes;
  std::vector<std::pair<std::size_t, std::size_t>> universe_edges;

  bool has_warning(std::string_view flag) const;
  friend bool operator==(const InvestigationResult&, const InvestigationResult&) = default;
};

nlohmann::json to_json(const InvestigationResult& result);
InvestigationResult investigation_from_json(const nlohmann::json& j);

// Keeps the last `cap` bytes, never starting inside a UTF-8 sequence.
std::string cap_summary(std::string summary, std::size_t cap = kSummaryCap);

/// Text bound to the augmentation-knowledge slot for the retrieved units.
std::string render_knowledge(const std::vector<RetrievedUnit>& units);

/// The investigation loop.
///
/// Both queues are FIFO. The context queue is drained before the next
/// suspicious node is expanded, each node is expanded at most once and each
/// (origin, chunk) sequence is reasoned over at most once. A malicious entity
/// named by the model joins the suspicious queue only if it resolves to a
/// node that is an endpoint of the sequence being reasoned over; anything
/// else is reported in `unmatched`. Stops when both queues are empty or after
/// `max_iterations` reasoning calls (flagged with kWarnIterationCap).
/// Throws kAlertUnresolved when no alert entity resolves to a graph node.
InvestigationResult investigate(const ProvenanceGraph& graph, const AlertSpec& alert,
                                const KnowledgeBase& kb, const VectorIndex& index,
                                const Embedder& embedder, LlmBackend& backend,
                                const InvestigationConfig& cfg = {});

}  // namespace ananke
