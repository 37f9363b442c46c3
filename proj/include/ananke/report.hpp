/* Copyright (c) 2026 The Ananke Authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ananke/investigator.hpp"
#include "ananke/llm.hpp"

namespace ananke {

inline constexpr std::string_view kReportFormatVersion = "v1";

struct TimelineRow {
  std::size_t iteration = 0;
  std::optional<KillChainPhase> phase;  // from the best retrieved unit
  std::string behavior;
  std::vector<std::string> entities;  // malicious entities named in that iteration

  friend bool operator==(const TimelineRow&, const TimelineRow&) = default;
};

enum class Verdict { kMalicious, kBenignParticipant };
std::string_view to_string(Verdict verdict);

struct EntityRole {
  Verdict verdict = Verdict::kBenignParticipant;
  std::size_t first_seen_iteration = 0;  // 0 = alert

  friend bool operator==(const EntityRole&, const EntityRole&) = default;
};

struct Report {
  std::string scenario_id;
  std::optional<std::string> narrative;
  std::vector<TimelineRow> timeline;
  std::map<std::string, EntityRole> entity_roles;
  std::set<std::string> detected;
  std::vector<std::string> warnings;
  TokenUsage narrative_usage;

  friend bool operator==(const Report&, const Report&) = default;
};

nlohmann::json to_json(const Report& report);
Report report_from_json(const nlohmann::json& j);

/// Deterministic report: one timeline row per cache entry, phase from the
/// retrieved unit, entity verdicts where malicious wins over benign.
Report build_structured_report(const std::vector<CacheEntry>& cache,
                               const std::vector<std::string>& alert_keys,
                               const std::set<std::string>& detected,
                               const std::vector<std::string>& warnings,
                               const std::string& scenario_id = "");

Report build_structured_report(const InvestigationResult& result, const std::string& scenario_id = "");

// Compact timeline passed to the report prompt.
nlohmann::json compact_timeline(const Report& report);

// What the report prompt sees as the reasoning cache.
enum class NarrativeInput { kCompactTimeline, kFullCache };
std::string_view to_string(NarrativeInput input);
// compact_timeline|full_cache. Throws kConfigInvalid.
NarrativeInput parse_narrative_input(std::string_view text);

/// Adds the model-written narrative. Backend failures leave the structured
/// fields untouched and add kWarnNarrativeUnavailable.
Report build_narrative(Report report, const std::string& final_summary, LlmBackend& backend);

// Same, but with `full_cache` serialized in place of the compact timeline.
// Large caches can exceed the model's context window.
Report build_narrative(Report report, const std::string& final_summary, LlmBackend& backend,
                       const std::vector<CacheEntry>& full_cache);

std::string render_markdown(const Report& report);

}  // namespace ananke
