/* Copyright (c) 2026 The Ananke Authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */

#include <algorithm>
#include <cctype>
#include <sstream>

#include "ananke/llm.hpp"

namespace ananke {

using nlohmann::json;

namespace {

std::vector<json> parse_event_lines(const std::string& block) {
  std::vector<json> events;
  std::istringstream in(block);
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object() || !j.contains("s") || !j.contains("o")) continue;
    events.push_back(std::move(j));
  }
  return events;
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += sep;
    out += items[i];
  }
  return out;
}

void push_unique(std::vector<std::string>& out, const std::string& value) {
  if (std::find(out.begin(), out.end(), value) == out.end()) out.push_back(value);
}

}  // namespace

RuleOracleBackend::RuleOracleBackend(MaliciousEntitySet lexicon,
                                     std::map<std::string, KillChainPhase> phase_hints)
    : lexicon_(std::move(lexicon)), phase_hints_(std::move(phase_hints)) {}

std::int64_t RuleOracleBackend::count_words(std::string_view text) {
  std::int64_t count = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++count;
    }
  }
  return count;
}

Completion RuleOracleBackend::complete(const std::string& system_prompt, const std::string& user_prompt) {
  std::string text;
  if (auto cache = extract_block(user_prompt, "reasoning_cache")) {
    json timeline = json::parse(*cache, nullptr, /*allow_exceptions=*/false);
    if (timeline.is_discarded()) {
      throw Error(ErrorCode::kPromptShapeUnrecognized, "reasoning_cache block is not JSON");
    }
    text = narrative_digest(timeline);
  } else if (auto sequences = extract_block(user_prompt, "sequences")) {
    text = answer_annotation(*sequences);
  } else if (auto sequence = extract_block(user_prompt, "sequence")) {
    text = answer_reasoning(*sequence);
  } else {
    throw Error(ErrorCode::kPromptShapeUnrecognized, "no <sequence>, <sequences> or <reasoning_cache> block");
  }
  Completion c;
  c.usage.prompt_tokens = count_words(system_prompt) + count_words(user_prompt);
  c.usage.answer_tokens = count_words(text);
  c.text = std::move(text);
  return c;
}

std::string RuleOracleBackend::answer_reasoning(const std::string& sequence_block) const {
  std::vector<std::string> entities;
  const auto events = parse_event_lines(sequence_block);
  for (const auto& e : events) {
    push_unique(entities, e["s"].get<std::string>());
    push_unique(entities, e["o"].get<std::string>());
  }
  json malicious = json::array();
  json benign = json::array();
  std::vector<std::string> flagged;
  for (const auto& key : entities) {
    if (lexicon_.contains(key)) {
      malicious.push_back({{"name", key}});
      flagged.push_back(key);
    } else {
      benign.push_back({{"name", key}});
    }
  }
  json behaviors = json::array();
  for (const auto& e : events) {
    const std::string s = e["s"].get<std::string>();
    const std::string o = e["o"].get<std::string>();
    if (lexicon_.contains(s) || lexicon_.contains(o)) {
      behaviors.push_back(s + " " + e.value("a", std::string("?")) + " " + o);
    }
  }
  std::string summary = "flagged " + std::to_string(flagged.size()) + " of " +
                        std::to_string(entities.size()) + " entities";
  if (!flagged.empty()) summary += ": " + join(flagged, ", ");
  json response = json::array({{{"malicious_entities", malicious},
                                {"benign_entities", benign},
                                {"behaviors", behaviors},
                                {"summary", summary}}});
  return response.dump();
}

std::string RuleOracleBackend::answer_annotation(const std::string& sequences_block) const {
  const auto events = parse_event_lines(sequences_block);
  std::vector<std::optional<KillChainPhase>> hinted(events.size());
  std::optional<KillChainPhase> first_hint;
  for (std::size_t i = 0; i < events.size(); ++i) {
    for (const char* role : {"s", "o"}) {
      auto it = phase_hints_.find(events[i][role].get<std::string>());
      if (it == phase_hints_.end()) continue;
      if (!hinted[i] || *hinted[i] < it->second) hinted[i] = it->second;
    }
    if (hinted[i] && !first_hint) first_hint = hinted[i];
  }

  // Unhinted events inherit the phase of the event before them.
  std::vector<KillChainPhase> phases(events.size());
  KillChainPhase current = first_hint.value_or(KillChainPhase::kReconnaissance);
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (hinted[i]) current = *hinted[i];
    phases[i] = current;
  }

  struct Segment {
    KillChainPhase phase;
    std::vector<std::size_t> members;
  };
  std::vector<Segment> segments;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (segments.empty() || segments.back().phase != phases[i]) segments.push_back({phases[i], {}});
    segments.back().members.push_back(i);
  }

  json out = json::array();
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const Segment& seg = segments[s];
    std::vector<std::string> entities;
    json evidence = json::array();
    for (std::size_t i : seg.members) {
      for (const char* role : {"s", "o"}) {
        const std::string key = events[i][role].get<std::string>();
        if (lexicon_.contains(key)) push_unique(entities, key);
      }
      evidence.push_back(events[i]);
    }
    const std::string name(display_name(seg.phase));
    std::string behavior = name + ": " + std::to_string(seg.members.size()) + " events";
    if (!entities.empty()) behavior += " involving " + join(entities, ", ");
    out.push_back(
        {{"phase", name},
         {"behavior", behavior},
         {"entities", entities},
         {"neighbors",
          {{"prev", s == 0 ? std::string("none") : std::string(display_name(segments[s - 1].phase))},
           {"next", s + 1 == segments.size() ? std::string("none")
                                             : std::string(display_name(segments[s + 1].phase))}}},
         {"evidence_set", evidence}});
  }
  return out.dump();
}

std::string RuleOracleBackend::narrative_digest(const json& timeline) {
  std::vector<std::string> phases;
  std::vector<std::string> entities;
  std::size_t steps = 0;
  if (timeline.is_array()) {
    for (const auto& row : timeline) {
      ++steps;
      if (row.contains("phase") && row["phase"].is_string()) {
        const std::string phase = row["phase"].get<std::string>();
        if (phases.empty() || phases.back() != phase) phases.push_back(phase);
      }
      if (row.contains("entities") && row["entities"].is_array()) {
        for (const auto& e : row["entities"]) {
          if (e.is_string()) push_unique(entities, e.get<std::string>());
        }
      }
    }
  }
  std::string text = "Attack narrative digest\n";
  text += "Phases: " + (phases.empty() ? std::string("none") : join(phases, " -> ")) + "\n";
  text += "Steps: " + std::to_string(steps) + "\n";
  text += "Entities: " + (entities.empty() ? std::string("none") : join(entities, ", "));
  return text;
}

}  // namespace ananke
