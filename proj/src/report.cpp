/* Copyright (c) 2026 The Ananke Authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */

#include "ananke/report.hpp"

#include <sstream>

namespace ananke {

using nlohmann::json;

std::string_view to_string(Verdict verdict) {
  return verdict == Verdict::kMalicious ? "malicious" : "benign-participant";
}

namespace {

Verdict parse_verdict(const std::string& text) {
  if (text == "malicious") return Verdict::kMalicious;
  if (text == "benign-participant") return Verdict::kBenignParticipant;
  throw Error(ErrorCode::kSchemaViolation, "unknown verdict '" + text + "'");
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += sep;
    out += items[i];
  }
  return out;
}

}  // namespace

json to_json(const Report& report) {
  json timeline = json::array();
  for (const auto& row : report.timeline) {
    timeline.push_back({{"iteration", row.iteration},
                        {"phase", row.phase ? json(std::string(to_string(*row.phase))) : json(nullptr)},
                        {"behavior", row.behavior},
                        {"entities", row.entities}});
  }
  json roles = json::object();
  for (const auto& [key, role] : report.entity_roles) {
    roles[key] = {{"verdict", std::string(to_string(role.verdict))},
                  {"first_seen_iteration", role.first_seen_iteration}};
  }
  return {{"format_version", kReportFormatVersion},
          {"scenario_id", report.scenario_id},
          {"narrative", report.narrative ? json(*report.narrative) : json(nullptr)},
          {"timeline", std::move(timeline)},
          {"entity_roles", std::move(roles)},
          {"detected", report.detected},
          {"warnings", report.warnings},
          {"narrative_usage", to_json(report.narrative_usage)}};
}

Report report_from_json(const json& j) {
  if (j.value("format_version", std::string()) != kReportFormatVersion) {
    throw Error(ErrorCode::kFormatVersionMismatch, "unsupported report format");
  }
  Report r;
  try {
    r.scenario_id = j.at("scenario_id").get<std::string>();
    if (!j.at("narrative").is_null()) r.narrative = j["narrative"].get<std::string>();
    for (const auto& row : j.at("timeline")) {
      TimelineRow t;
      t.iteration = row.at("iteration").get<std::size_t>();
      if (!row.at("phase").is_null()) t.phase = parse_phase(row["phase"].get<std::string>());
      t.behavior = row.at("behavior").get<std::string>();
      t.entities = row.at("entities").get<std::vector<std::string>>();
      r.timeline.push_back(std::move(t));
    }
    for (const auto& [key, role] : j.at("entity_roles").items()) {
      r.entity_roles[key] = {parse_verdict(role.at("verdict").get<std::string>()),
                             role.at("first_seen_iteration").get<std::size_t>()};
    }
    r.detected = j.at("detected").get<std::set<std::string>>();
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    r.narrative_usage = usage_from_json(j.at("narrative_usage"));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchemaViolation, std::string("report: ") + e.what());
  }
  return r;
}

Report build_structured_report(const std::vector<CacheEntry>& cache,
                               const std::vector<std::string>& alert_keys,
                               const std::set<std::string>& detected,
                               const std::vector<std::string>& warnings,
                               const std::string& scenario_id) {
  Report report;
  report.scenario_id = scenario_id;
  report.detected = detected;
  report.warnings = warnings;

  auto note = [&](const std::string& key, Verdict verdict, std::size_t iteration) {
    auto [it, inserted] = report.entity_roles.try_emplace(key, EntityRole{verdict, iteration});
    if (inserted) return;
    if (verdict == Verdict::kMalicious) it->second.verdict = Verdict::kMalicious;
    it->second.first_seen_iteration = std::min(it->second.first_seen_iteration, iteration);
  };
  for (const auto& key : alert_keys) note(key, Verdict::kMalicious, 0);

  std::vector<const CacheEntry*> ordered;
  for (const auto& e : cache) ordered.push_back(&e);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const CacheEntry* a, const CacheEntry* b) { return a->iteration < b->iteration; });
  for (const CacheEntry* e : ordered) {
    TimelineRow row;
    row.iteration = e->iteration;
    if (!e->retrieved.empty()) row.phase = e->retrieved.front().phase;
    row.behavior = e->response.behaviors.empty() ? e->response.summary : join(e->response.behaviors, "; ");
    row.entities = e->response.malicious_entities;
    report.timeline.push_back(std::move(row));
    for (const auto& key : e->response.malicious_entities) note(key, Verdict::kMalicious, e->iteration);
    for (const auto& key : e->response.benign_entities) note(key, Verdict::kBenignParticipant, e->iteration);
  }
  return report;
}

Report build_structured_report(const InvestigationResult& result, const std::string& scenario_id) {
  return build_structured_report(result.cache, result.alert_keys, result.detected, result.warnings, scenario_id);
}

json compact_timeline(const Report& report) {
  json rows = json::array();
  for (const auto& row : report.timeline) {
    rows.push_back({{"iteration", row.iteration},
                    {"phase", row.phase ? std::string(display_name(*row.phase)) : std::string("Unknown")},
                    {"behavior", row.behavior},
                    {"entities", row.entities}});
  }
  return rows;
}

std::string_view to_string(NarrativeInput input) {
  return input == NarrativeInput::kFullCache ? "full_cache" : "compact_timeline";
}

NarrativeInput parse_narrative_input(std::string_view text) {
  if (text == "compact_timeline") return NarrativeInput::kCompactTimeline;
  if (text == "full_cache") return NarrativeInput::kFullCache;
  throw Error(ErrorCode::kConfigInvalid,
              "unknown narrative input '" + std::string(text) + "' (compact_timeline|full_cache)");
}

namespace {

Report narrate(Report report, const std::string& final_summary, LlmBackend& backend, const json& cache) {
  std::string detected;
  for (const auto& key : report.detected) detected += (detected.empty() ? "" : "\n") + key;
  const RenderedPrompt prompt = render(prompt_template(TemplateName::kGen),
                                       {{"reasoning_cache", cache.dump()},
                                        {"detected", detected},
                                        {"summary", final_summary.empty() ? std::string("None") : final_summary}});
  try {
    Completion c = backend.complete(prompt.system, prompt.user);
    report.narrative = std::move(c.text);
    report.narrative_usage += c.usage;
  } catch (const Error&) {
    report.warnings.emplace_back(kWarnNarrativeUnavailable);
  }
  return report;
}

}  // namespace

Report build_narrative(Report report, const std::string& final_summary, LlmBackend& backend) {
  const json timeline = compact_timeline(report);
  return narrate(std::move(report), final_summary, backend, timeline);
}

Report build_narrative(Report report, const std::string& final_summary, LlmBackend& backend,
                       const std::vector<CacheEntry>& full_cache) {
  json cache = json::array();
  for (const auto& e : full_cache) cache.push_back(to_json(e));
  return narrate(std::move(report), final_summary, backend, cache);
}

std::string render_markdown(const Report& report) {
  std::ostringstream out;
  out << "# Investigation report";
  if (!report.scenario_id.empty()) out << ": " << report.scenario_id;
  out << "\n\n";
  if (report.narrative) out << "## Narrative\n\n" << *report.narrative << "\n\n";

  out << "## Timeline\n\n";
  if (report.timeline.empty()) {
    out << "_No sequences were reasoned over._\n\n";
  } else {
    out << "| Iteration | Phase | Behavior | Malicious entities |\n|---|---|---|---|\n";
    for (const auto& row : report.timeline) {
      std::string behavior = row.behavior;
      for (auto& c : behavior) {
        if (c == '\n' || c == '|') c = ' ';
      }
      if (behavior.size() > 240) behavior = behavior.substr(0, 240) + "...";
      out << "| " << row.iteration << " | " << (row.phase ? display_name(*row.phase) : "Unknown") << " | "
          << behavior << " | " << join(row.entities, ", ") << " |\n";
    }
    out << "\n";
  }

  out << "## Entities\n\n| Entity | Verdict | First seen |\n|---|---|---|\n";
  for (const auto& [key, role] : report.entity_roles) {
    out << "| `" << key << "` | " << to_string(role.verdict) << " | "
        << (role.first_seen_iteration == 0 ? std::string("alert") : std::to_string(role.first_seen_iteration))
        << " |\n";
  }
  out << "\n## Detected\n\n";
  for (const auto& key : report.detected) out << "- `" << key << "`\n";
  if (!report.warnings.empty()) {
    out << "\n## Warnings\n\n";
    for (const auto& w : report.warnings) out << "- " << w << "\n";
  }
  return out.str();
}

}  // namespace ananke
