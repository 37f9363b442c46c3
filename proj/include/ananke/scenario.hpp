/* Copyright (c) 2026 The Ananke Authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ananke/ingest.hpp"
#include "ananke/investigator.hpp"
#include "ananke/model.hpp"

namespace ananke {

struct PhaseSteps {
  KillChainPhase phase = KillChainPhase::kReconnaissance;
  std::size_t steps = 1;

  friend bool operator==(const PhaseSteps&, const PhaseSteps&) = default;
};

struct ScenarioSpec {
  std::uint64_t seed = 0;
  std::size_t benign_events = 0;
  std::vector<PhaseSteps> phases;
  std::size_t hosts = 1;
  std::size_t malicious_entity_count = 0;  // 0 = one per phase
  std::int64_t time_span_s = 24 * 3600;
  Platform platform = Platform::kWindows;
  // Tag that keeps attack entity names and IPs apart between scenarios.
  // Defaults to the seed.
  std::optional<std::uint32_t> namespace_id;
  std::string scenario_id;  // default "scn-<seed>"

  std::uint32_t ns() const { return namespace_id.value_or(static_cast<std::uint32_t>(seed & 0xffffffffu)); }
  std::string id() const { return scenario_id.empty() ? "scn-" + std::to_string(seed) : scenario_id; }
  std::size_t attack_events() const;
  // Throws kSpecInvalid.
  void validate() const;

  friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

nlohmann::json to_json(const ScenarioSpec& spec);
// Unknown keys are rejected. time_span accepts seconds or "<n>[smhd]". Throws kSpecInvalid.
ScenarioSpec scenario_spec_from_json(const nlohmann::json& j);
ScenarioSpec load_scenario_spec(const std::filesystem::path& path);

struct GeneratedScenario {
  ScenarioSpec spec;
  LogSet log_set;
  MaliciousEntitySet ground_truth;
  std::vector<std::string> chain;  // malicious keys in creation order; chain[0] is the alert
  AlertSpec alert;
  std::map<std::string, KillChainPhase> phase_hints;

  friend bool operator==(const GeneratedScenario&, const GeneratedScenario&) = default;
};

/// Benign background from small motif libraries plus an attack chain that
/// walks the phases in order. Each phase's first step creates a new malicious
/// entity linked to an earlier one, so the malicious entities are connected
/// through malicious-only edges. Pure function of `spec`.
GeneratedScenario generate(const ScenarioSpec& spec);

// Ground truth file contents: keys, chain order and phase hints.
nlohmann::json ground_truth_json(const GeneratedScenario& scenario);

struct GroundTruth {
  MaliciousEntitySet set;
  std::vector<std::string> chain;
  std::map<std::string, KillChainPhase> phase_hints;
};
GroundTruth ground_truth_from_json(const nlohmann::json& j);
GroundTruth load_ground_truth(const std::filesystem::path& path);

// Writes events.jsonl, ground_truth.json, alert.json and manifest.json.
void write_scenario(const GeneratedScenario& scenario, const std::filesystem::path& dir);

struct LoadedScenario {
  LogSet log_set;
  GroundTruth ground_truth;
  AlertSpec alert;
  ScenarioSpec spec;
};
LoadedScenario load_scenario(const std::filesystem::path& dir);

/// Generates a knowledge-base scenario and a target scenario with the same
/// phase structure. Throws kSpecInvalid when their namespaces would collide.
std::pair<GeneratedScenario, GeneratedScenario> split_kb_and_target(const ScenarioSpec& kb_spec,
                                                                    const ScenarioSpec& target_spec);

}  // namespace ananke
