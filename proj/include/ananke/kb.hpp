/* Copyright (c) 2026 The Ananke Authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "ananke/ingest.hpp"
#include "ananke/llm.hpp"
#include "ananke/model.hpp"
#include "ananke/vindex.hpp"

namespace ananke {

inline constexpr std::string_view kKbFormatVersion = "v1";
inline constexpr std::size_t kDefaultChunkSize = 20;
inline constexpr std::size_t kAnnotationWindow = 400;

struct PhaseNeighbors {
  std::string prev;
  std::string next;

  friend bool operator==(const PhaseNeighbors&, const PhaseNeighbors&) = default;
};

// Metadata four-tuple attached to each annotated segment and inherited by its chunks.
struct PhaseMeta {
  KillChainPhase phase = KillChainPhase::kReconnaissance;
  std::string behavior;
  std::vector<std::string> entities;
  PhaseNeighbors neighbors;

  friend bool operator==(const PhaseMeta&, const PhaseMeta&) = default;
};

nlohmann::json to_json(const PhaseMeta& meta);
PhaseMeta phase_meta_from_json(const nlohmann::json& j);

struct AnnotatedSequence {
  PhaseMeta meta;
  std::vector<Event> events;
  std::string scenario_id;
};

struct KnowledgeUnit {
  std::string unit_id;
  PhaseMeta meta;
  std::vector<Event> events;
  EmbeddingVector vector;
  std::string scenario_id;
  Platform platform = Platform::kOther;

  friend bool operator==(const KnowledgeUnit&, const KnowledgeUnit&) = default;
};

nlohmann::json to_json(const KnowledgeUnit& unit);
KnowledgeUnit unit_from_json(const nlohmann::json& j);

/// Events whose subject or object key is in the malicious set, in input order.
std::vector<Event> extract_trace(const LogSet& log_set, const MaliciousEntitySet& e_mal);

struct CoverageReport {
  std::size_t trace_events = 0;
  std::size_t covered = 0;             // placed by the model
  std::size_t repaired = 0;            // omitted by the model, re-attached
  std::size_t unmatched_claims = 0;    // evidence lines matching no trace event
  std::size_t duplicate_claims = 0;    // trace events claimed more than once
  std::size_t order_violations = 0;    // segments overlapping in time after repair
  std::vector<std::string> repaired_refs;

  double coverage() const {
    return trace_events == 0 ? 1.0 : static_cast<double>(covered) / static_cast<double>(trace_events);
  }
};

nlohmann::json to_json(const CoverageReport& report);

struct AnnotationOptions {
  int max_retries = 2;
  std::size_t window = kAnnotationWindow;
};

struct AnnotationResult {
  std::vector<AnnotatedSequence> sequences;
  CoverageReport coverage;
  int retry_count = 0;  // malformed-response retries across all windows
  TokenUsage usage;
};

/// Segments a trace into Kill Chain phases through the annotation prompt.
///
/// Traces longer than `options.window` are sent in windows; each window's
/// prompt carries the previous window's last segment, and a segment that
/// continues the previous window's phase is merged into it. Every evidence
/// line must match a trace event by (ts, subject, action, object); events the
/// model leaves out are appended to the nearest preceding segment and counted
/// in the coverage report. Responses with no usable JSON are retried up to
/// `options.max_retries` times before kLlmMalformedResponse; an unknown
/// phase label throws kPhaseParse.
AnnotationResult annotate_phases(const std::vector<Event>& trace, const MaliciousEntitySet& e_mal,
                                 LlmBackend& backend, const AnnotationOptions& options = {});

std::vector<KnowledgeUnit> chunk_and_embed(const std::vector<AnnotatedSequence>& annotated,
                                           const Embedder& embedder,
                                           std::size_t n_max = kDefaultChunkSize,
                                           Platform platform = Platform::kOther);

// unit_id for a chunk: leading 16 hex digits of SHA-256(scenario_id, serialization[, dup index]).
std::string unit_id_for(const std::string& scenario_id, const std::string& serialization,
                        std::size_t duplicate_index = 0);

/// The Kill Chain knowledge base. Append-only.
class KnowledgeBase {
 public:
  std::string format_version = std::string(kKbFormatVersion);
  std::string embedder_id;
  std::size_t dimension = 0;
  std::size_t n_max = kDefaultChunkSize;
  std::vector<std::string> scenarios;

  const std::vector<KnowledgeUnit>& units() const { return units_; }
  std::size_t size() const { return units_.size(); }
  bool empty() const { return units_.empty(); }
  bool has_scenario(const std::string& id) const;

  // Throws kUnknownUnit.
  const KnowledgeUnit& unit(const std::string& unit_id) const;
  const KnowledgeUnit* find(const std::string& unit_id) const;

  // Validates dimension and unit_id uniqueness (kDimensionMismatch, kDuplicateUnit)
  // before appending anything.
  void append(std::vector<KnowledgeUnit> units);

  VectorIndex build_index(Metric metric) const;

  friend bool operator==(const KnowledgeBase& a, const KnowledgeBase& b) {
    return a.format_version == b.format_version && a.embedder_id == b.embedder_id &&
           a.dimension == b.dimension && a.n_max == b.n_max && a.scenarios == b.scenarios &&
           a.units_ == b.units_;
  }

 private:
  std::vector<KnowledgeUnit> units_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

// Mean pairwise cosine between units of the same platform and of different
// platforms. Either mean is empty when no such pair exists.
struct PlatformSimilarity {
  std::optional<double> within;
  std::optional<double> cross;
  std::size_t within_pairs = 0;
  std::size_t cross_pairs = 0;

  std::optional<double> gap() const {
    if (!within || !cross) return std::nullopt;
    return *within - *cross;
  }
};

PlatformSimilarity platform_similarity(const KnowledgeBase& kb);

// Directory with manifest.json + units.jsonl. Vectors are base64 little-endian float32.
void kb_save(const KnowledgeBase& kb, const std::filesystem::path& dir);
KnowledgeBase kb_load(const std::filesystem::path& dir);

struct ScenarioBuildReport {
  std::string scenario_id;
  std::size_t units_added = 0;
  std::size_t trace_events = 0;
  AnnotationResult annotation;
};

/// extract -> annotate -> chunk/embed -> append for one labeled scenario.
/// Throws kDuplicateScenario if the scenario id is already present,
/// kConfigInvalid if the embedder differs from the one the KB was built with,
/// and kSpecInvalid when no event touches the malicious set.
ScenarioBuildReport kb_add_scenario(KnowledgeBase& kb, const LogSet& log_set,
                                    const MaliciousEntitySet& e_mal, LlmBackend& backend,
                                    const Embedder& embedder, const AnnotationOptions& options = {});

}  // namespace ananke
