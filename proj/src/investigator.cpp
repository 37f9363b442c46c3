/* Copyright (c) 2026 The Ananke Authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */

#include "ananke/investigator.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <map>

namespace ananke {

using nlohmann::json;

json to_json(const AlertSpec& alert) {
  return {{"entities", alert.entities}, {"description", alert.description}};
}

AlertSpec alert_from_json(const json& j) {
  if (!j.is_object() || !j.contains("entities") || !j["entities"].is_array()) {
    throw Error(ErrorCode::kSpecInvalid, "alert needs an 'entities' array");
  }
  AlertSpec alert;
  for (const auto& e : j["entities"]) {
    if (!e.is_string()) throw Error(ErrorCode::kSpecInvalid, "alert entities must be strings");
    alert.entities.push_back(e.get<std::string>());
  }
  if (alert.entities.empty()) throw Error(ErrorCode::kSpecInvalid, "alert names no entity");
  alert.description = j.value("description", std::string());
  return alert;
}

AlertSpec load_alert(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read alert " + path.string());
  json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw Error(ErrorCode::kSpecInvalid, path.string() + " is not JSON");
  return alert_from_json(j);
}

std::string_view to_string(EntityMatch mode) {
  return mode == EntityMatch::kExact ? "exact" : "substring_fallback";
}

EntityMatch parse_entity_match(std::string_view text) {
  const std::string t = to_lower(trim(text));
  if (t == "exact") return EntityMatch::kExact;
  if (t == "substring_fallback" || t == "substring") return EntityMatch::kSubstringFallback;
  throw Error(ErrorCode::kConfigInvalid, "unknown entity_match '" + std::string(text) + "'");
}

void InvestigationConfig::validate() const {
  if (n_max == 0) throw Error(ErrorCode::kConfigInvalid, "n_max must be >= 1");
  if (max_iterations == 0) throw Error(ErrorCode::kConfigInvalid, "max_iterations must be >= 1");
  if (retrieval_k == 0) throw Error(ErrorCode::kConfigInvalid, "retrieval_k must be >= 1");
}

json to_json(const InvestigationConfig& cfg) {
  return {{"n_max", cfg.n_max},
          {"metric", std::string(to_string(cfg.metric))},
          {"max_iterations", cfg.max_iterations},
          {"induced_edges", std::string(to_string(cfg.induced_edges))},
          {"entity_match", std::string(to_string(cfg.entity_match))},
          {"retrieval_k", cfg.retrieval_k}};
}

InvestigationConfig investigation_config_from_json(const json& j) {
  InvestigationConfig cfg;
  cfg.n_max = j.value("n_max", cfg.n_max);
  cfg.metric = parse_metric(j.value("metric", std::string(to_string(cfg.metric))));
  cfg.max_iterations = j.value("max_iterations", cfg.max_iterations);
  cfg.induced_edges = parse_induced_edges(j.value("induced_edges", std::string("full")));
  cfg.entity_match = parse_entity_match(j.value("entity_match", std::string("exact")));
  cfg.retrieval_k = j.value("retrieval_k", cfg.retrieval_k);
  return cfg;
}

std::optional<std::string> resolve_entity(const ProvenanceGraph& graph, const std::string& name,
                                          EntityMatch mode) {
  const std::string text = trim(name);
  if (text.empty()) return std::nullopt;
  if (graph.contains(text)) return text;

  // A tagged mention is canonicalized under its own kind only.
  std::string bare = text;
  if (auto parsed = parse_canonical_key(text)) {
    try {
      const std::string key = canonicalize(parsed->kind, parsed->name, parsed->pid);
      if (graph.contains(key)) return key;
    } catch (const Error&) {
    }
    bare = parsed->name;
  } else {
    static constexpr EntityKind kPriority[] = {EntityKind::kProcess, EntityKind::kFile,
                                               EntityKind::kIpAddress, EntityKind::kDomain,
                                               EntityKind::kSocket, EntityKind::kRegistry,
                                               EntityKind::kOther};
    for (EntityKind kind : kPriority) {
      try {
        const std::string key = canonicalize(kind, text);
        if (graph.contains(key)) return key;
      } catch (const Error&) {
      }
    }
  }
  if (mode != EntityMatch::kSubstringFallback) return std::nullopt;

  const std::string needle = to_lower(bare);
  if (needle.empty()) return std::nullopt;
  std::optional<std::string> found;
  for (const auto& [key, entity] : graph.nodes()) {
    if (to_lower(key).find(needle) == std::string::npos) continue;
    if (found) return std::nullopt;  // ambiguous
    found = key;
  }
  return found;
}

json to_json(const CacheEntry& entry) {
  json retrieved = json::array();
  for (const auto& r : entry.retrieved) {
    retrieved.push_back({{"unit_id", r.unit_id}, {"score", r.score}, {"phase", std::string(to_string(r.phase))}});
  }
  return {{"iteration", entry.iteration},
          {"sequence_ref", {{"origin_node", entry.origin_node}, {"chunk_index", entry.chunk_index}}},
          {"retrieved", std::move(retrieved)},
          {"response", to_json(entry.response)},
          {"usage", to_json(entry.usage)}};
}

CacheEntry cache_entry_from_json(const json& j) {
  CacheEntry entry;
  entry.iteration = j.at("iteration").get<std::size_t>();
  entry.origin_node = j.at("sequence_ref").at("origin_node").get<std::string>();
  entry.chunk_index = j.at("sequence_ref").at("chunk_index").get<std::size_t>();
  for (const auto& r : j.at("retrieved")) {
    entry.retrieved.push_back({r.at("unit_id").get<std::string>(), r.at("score").get<double>(),
                               parse_phase(r.at("phase").get<std::string>())});
  }
  entry.response = reasoning_from_json(j.at("response"));
  entry.usage = usage_from_json(j.at("usage"));
  return entry;
}

bool InvestigationResult::has_warning(std::string_view flag) const {
  return std::find(warnings.begin(), warnings.end(), flag) != warnings.end();
}

json to_json(const InvestigationResult& result) {
  json cache = json::array();
  for (const auto& e : result.cache) cache.push_back(to_json(e));
  json unmatched = json::array();
  for (const auto& u : result.unmatched) {
    unmatched.push_back({{"iteration", u.iteration}, {"name", u.name}, {"reason", u.reason}});
  }
  json edges = json::array();
  for (const auto& [s, o] : result.universe_edges) edges.push_back({s, o});
  return {{"format_version", kInvestigationFormatVersion},
          {"config", to_json(result.config)},
          {"alert", to_json(result.alert)},
          {"alert_keys", result.alert_keys},
          {"expansions", result.expansions},
          {"cache", std::move(cache)},
          {"detected", result.detected},
          {"unmatched", std::move(unmatched)},
          {"final_summary", result.final_summary},
          {"usage", to_json(result.usage)},
          {"warnings", result.warnings},
          {"universe", {{"nodes", result.universe_nodes}, {"edges", std::move(edges)}}}};
}

InvestigationResult investigation_from_json(const json& j) {
  const std::string version = j.value("format_version", std::string());
  if (version != kInvestigationFormatVersion) {
    throw Error(ErrorCode::kFormatVersionMismatch, "investigation format '" + version + "'");
  }
  InvestigationResult r;
  try {
    r.config = investigation_config_from_json(j.at("config"));
    r.alert = alert_from_json(j.at("alert"));
    r.alert_keys = j.at("alert_keys").get<std::vector<std::string>>();
    r.expansions = j.at("expansions").get<std::vector<std::string>>();
    for (const auto& e : j.at("cache")) r.cache.push_back(cache_entry_from_json(e));
    r.detected = j.at("detected").get<std::set<std::string>>();
    for (const auto& u : j.at("unmatched")) {
      r.unmatched.push_back({u.at("iteration").get<std::size_t>(), u.at("name").get<std::string>(),
                             u.at("reason").get<std::string>()});
    }
    r.final_summary = j.at("final_summary").get<std::string>();
    r.usage = usage_from_json(j.at("usage"));
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    r.universe_nodes = j.at("universe").at("nodes").get<std::vector<std::string>>();
    for (const auto& e : j.at("universe").at("edges")) {
      r.universe_edges.emplace_back(e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>());
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchemaViolation, std::string("investigation file: ") + e.what());
  }
  return r;
}

std::string cap_summary(std::string summary, std::size_t cap) {
  if (summary.size() <= cap) return summary;
  std::size_t start = summary.size() - cap;
  while (start < summary.size() && (static_cast<unsigned char>(summary[start]) & 0xC0) == 0x80) ++start;
  return summary.substr(start);
}

std::string render_knowledge(const std::vector<RetrievedUnit>& units) {
  std::string out;
  for (std::size_t i = 0; i < units.size(); ++i) {
    const KnowledgeUnit& u = *units[i].unit;
    if (i > 0) out += "\n\n";
    out += "Phase: " + std::string(display_name(u.meta.phase)) + "\n";
    out += "Behavior: " + u.meta.behavior + "\n";
    out += "Entities:";
    for (const auto& e : u.meta.entities) out += " " + e;
    out += "\nPrevious phase: " + u.meta.neighbors.prev + "\n";
    out += "Next phase: " + u.meta.neighbors.next + "\n";
    out += "Events:\n" + render_event_lines(u.events);
  }
  return out;
}

namespace {

std::string join_lines(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += '\n';
    out += s;
  }
  return out;
}

}  // namespace

InvestigationResult investigate(const ProvenanceGraph& graph, const AlertSpec& alert,
                                const KnowledgeBase& kb, const VectorIndex& index,
                                const Embedder& embedder, LlmBackend& backend,
                                const InvestigationConfig& cfg) {
  cfg.validate();
  if (kb.empty() || index.size() == 0) throw Error(ErrorCode::kEmptyIndex, "knowledge base is empty");

  InvestigationResult result;
  result.config = cfg;
  result.alert = alert;

  std::map<std::string, std::size_t> node_index;
  for (const auto& [key, entity] : graph.nodes()) {
    node_index.emplace(key, result.universe_nodes.size());
    result.universe_nodes.push_back(key);
  }
  for (std::size_t i = 0; i < graph.edges().size(); ++i) {
    result.universe_edges.emplace_back(node_index.at(graph.subject_key(i)), node_index.at(graph.object_key(i)));
  }

  std::deque<std::string> q_sus;
  std::deque<ContextSequence> q_ctx;
  std::set<std::string> visited;
  std::set<std::string> enqueued;
  std::set<std::pair<std::string, std::size_t>> emitted;

  for (const auto& name : alert.entities) {
    auto key = resolve_entity(graph, name, cfg.entity_match);
    if (!key) {
      result.warnings.push_back("alert_entity_unresolved:" + name);
      continue;
    }
    if (!enqueued.insert(*key).second) continue;
    result.alert_keys.push_back(*key);
    result.detected.insert(*key);
    q_sus.push_back(*key);
  }
  if (result.alert_keys.empty()) {
    std::string names;
    for (const auto& n : alert.entities) names += (names.empty() ? "" : ", ") + n;
    throw Error(ErrorCode::kAlertUnresolved, "no alert entity is a node of the graph: " + names);
  }

  std::string payload = alert.description.empty() ? std::string("Alert") : alert.description;
  payload += "\nAlert entities:";
  for (const auto& k : result.alert_keys) payload += "\n" + k;

  const PromptTemplate& tmpl = prompt_template(TemplateName::kReasoning);
  std::size_t iteration = 0;
  while (!q_sus.empty() || !q_ctx.empty()) {
    if (q_ctx.empty()) {
      std::string v = std::move(q_sus.front());
      q_sus.pop_front();
      if (!visited.insert(v).second) continue;
      result.expansions.push_back(v);
      const AdjacencySubgraph sub = adjacency_subgraph(graph, v, cfg.induced_edges);
      for (auto& seq : order_and_partition(sub, graph, cfg.n_max)) {
        if (emitted.count({seq.origin_node, seq.chunk_index})) continue;
        q_ctx.push_back(std::move(seq));
      }
      continue;
    }
    if (iteration >= cfg.max_iterations) {
      result.warnings.emplace_back(kWarnIterationCap);
      break;
    }

    ContextSequence seq = std::move(q_ctx.front());
    q_ctx.pop_front();
    emitted.insert({seq.origin_node, seq.chunk_index});
    ++iteration;

    const auto retrieved = threat_retrieve(index, kb, seq, embedder, cfg.retrieval_k);
    const RenderedPrompt prompt =
        render(tmpl, {{"payload", payload},
                      {"detected", join_lines({result.detected.begin(), result.detected.end()})},
                      {"sequence", render_event_lines(seq.events)},
                      {"summary", result.final_summary.empty() ? std::string("None") : result.final_summary},
                      {"augmentation_knowledge", render_knowledge(retrieved)}});
    Completion completion = backend.complete(prompt.system, prompt.user);

    CacheEntry entry;
    entry.iteration = iteration;
    entry.origin_node = seq.origin_node;
    entry.chunk_index = seq.chunk_index;
    for (const auto& r : retrieved) entry.retrieved.push_back({r.unit->unit_id, r.score, r.unit->meta.phase});
    entry.response = parse_reasoning(completion.text);
    entry.usage = completion.usage;
    result.usage += completion.usage;

    // Endpoints of the sequence just reasoned over, as graph node keys.
    std::set<std::string> in_context;
    for (const auto& e : seq.events) {
      for (const auto* key : {&e.subject.canonical_key, &e.object.canonical_key}) {
        in_context.insert(graph.contains(*key) ? *key : host_qualified_key(e.host_id, *key));
      }
    }

    for (const auto& name : entry.response.malicious_entities) {
      auto key = resolve_entity(graph, name, cfg.entity_match);
      if (!key) {
        result.unmatched.push_back({iteration, name, "unresolved"});
        continue;
      }
      if (!in_context.count(*key)) {
        result.unmatched.push_back({iteration, name, "out_of_context"});
        continue;
      }
      result.detected.insert(*key);
      if (!visited.count(*key) && enqueued.insert(*key).second) q_sus.push_back(*key);
    }
    if (!entry.response.summary.empty()) result.final_summary = cap_summary(entry.response.summary);
    result.cache.push_back(std::move(entry));
  }
  return result;
}

}  // namespace ananke
