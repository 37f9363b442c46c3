/* Copyright (c) 2026 The Ananke Authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */

#include "ananke/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

namespace ananke {

using nlohmann::json;

std::string_view to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::kOracle: return "oracle";
    case BackendKind::kHttp: return "http";
    case BackendKind::kCassetteRecord: return "cassette-record";
    case BackendKind::kCassetteReplay: return "cassette-replay";
  }
  return "?";
}

BackendKind parse_backend_kind(std::string_view text) {
  const std::string t = to_lower(trim(text));
  if (t == "oracle") return BackendKind::kOracle;
  if (t == "http") return BackendKind::kHttp;
  if (t == "cassette-record") return BackendKind::kCassetteRecord;
  if (t == "cassette-replay") return BackendKind::kCassetteReplay;
  throw Error(ErrorCode::kConfigInvalid, "unknown backend '" + std::string(text) +
                                             "' (oracle|http|cassette-record|cassette-replay)");
}

json AppConfig::to_json(bool redact_secrets) const {
  return {{"paths", {{"kb", kb_dir}, {"logs", log_dirs}}},
          {"llm",
           {{"backend", std::string(ananke::to_string(backend))},
            {"record_inner", std::string(ananke::to_string(record_inner))},
            {"cassette", cassette},
            {"base_url", llm.base_url},
            {"model", llm.model},
            {"api_key", redact_secrets && !llm.api_key.empty() ? std::string("<redacted>") : llm.api_key},
            {"temperature", llm.temperature},
            {"timeout_ms", llm.timeout.count()},
            {"max_retries", llm.max_retries}}},
          {"embedder", {{"kind", embedder}, {"dim", embedder_dim}, {"model", embedding_model}}},
          {"investigation", ananke::to_json(investigation)},
          {"eval", {{"event_level", event_level}}},
          {"report", {{"narrative_input", std::string(ananke::to_string(narrative_input))}}}};
}

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::kConfigInvalid, where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) {
      throw Error(ErrorCode::kConfigInvalid, "unknown config key '" + (where.empty() ? key : where + "." + key) + "'");
    }
  }
}

}  // namespace

AppConfig apply_config_json(AppConfig c, const json& j) {
  check_keys(j, {"paths", "llm", "embedder", "investigation", "eval", "report"}, "");
  try {
    if (j.contains("paths")) {
      const json& p = j["paths"];
      check_keys(p, {"kb", "logs"}, "paths");
      if (p.contains("kb")) c.kb_dir = p["kb"].get<std::string>();
      if (p.contains("logs")) c.log_dirs = p["logs"].get<std::vector<std::string>>();
    }
    if (j.contains("llm")) {
      const json& l = j["llm"];
      check_keys(l, {"backend", "record_inner", "cassette", "base_url", "model", "api_key", "temperature",
                     "timeout_ms", "max_retries"},
                 "llm");
      if (l.contains("backend")) c.backend = parse_backend_kind(l["backend"].get<std::string>());
      if (l.contains("record_inner")) c.record_inner = parse_backend_kind(l["record_inner"].get<std::string>());
      if (l.contains("cassette")) c.cassette = l["cassette"].get<std::string>();
      if (l.contains("base_url")) c.llm.base_url = l["base_url"].get<std::string>();
      if (l.contains("model")) c.llm.model = l["model"].get<std::string>();
      if (l.contains("api_key")) c.llm.api_key = l["api_key"].get<std::string>();
      if (l.contains("temperature")) c.llm.temperature = l["temperature"].get<double>();
      if (l.contains("timeout_ms")) c.llm.timeout = std::chrono::milliseconds(l["timeout_ms"].get<std::int64_t>());
      if (l.contains("max_retries")) c.llm.max_retries = l["max_retries"].get<int>();
    }
    if (j.contains("embedder")) {
      const json& e = j["embedder"];
      check_keys(e, {"kind", "dim", "model"}, "embedder");
      if (e.contains("kind")) c.embedder = e["kind"].get<std::string>();
      if (e.contains("dim")) c.embedder_dim = e["dim"].get<std::size_t>();
      if (e.contains("model")) c.embedding_model = e["model"].get<std::string>();
    }
    if (j.contains("investigation")) {
      const json& i = j["investigation"];
      check_keys(i, {"n_max", "metric", "max_iterations", "induced_edges", "entity_match", "retrieval_k"},
                 "investigation");
      json merged = ananke::to_json(c.investigation);
      merged.update(i);
      c.investigation = investigation_config_from_json(merged);
    }
    if (j.contains("eval")) {
      const json& e = j["eval"];
      check_keys(e, {"event_level"}, "eval");
      if (e.contains("event_level")) c.event_level = e["event_level"].get<bool>();
    }
    if (j.contains("report")) {
      const json& r = j["report"];
      check_keys(r, {"narrative_input"}, "report");
      if (r.contains("narrative_input")) c.narrative_input = parse_narrative_input(r["narrative_input"].get<std::string>());
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigInvalid, std::string("config: ") + e.what());
  }
  if (c.embedder != "local" && c.embedder != "http") {
    throw Error(ErrorCode::kConfigInvalid, "embedder.kind must be local or http");
  }
  c.investigation.validate();
  return c;
}

AppConfig load_config_file(AppConfig base, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfigInvalid, "cannot read config " + path.string());
  json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw Error(ErrorCode::kConfigInvalid, path.string() + " is not valid JSON");
  return apply_config_json(std::move(base), j);
}

AppConfig apply_env(AppConfig c) {
  if (const char* v = std::getenv("ANANKE_LLM_URL"); v && *v) c.llm.base_url = v;
  if (const char* v = std::getenv("ANANKE_LLM_MODEL"); v && *v) c.llm.model = v;
  if (const char* v = std::getenv("ANANKE_LLM_KEY"); v && *v) c.llm.api_key = v;
  return c;
}

std::unique_ptr<Embedder> make_embedder(const AppConfig& config) {
  if (config.embedder == "http") {
    if (config.llm.base_url.empty()) throw Error(ErrorCode::kConfigInvalid, "http embedder needs llm.base_url");
    HttpBackendConfig http = config.llm;
    http.model = config.embedding_model.empty() ? config.llm.model : config.embedding_model;
    return std::make_unique<HttpEmbedder>(http, config.embedder_dim);
  }
  return std::make_unique<LocalHashEmbedder>(config.embedder_dim);
}

std::shared_ptr<LlmBackend> make_backend(const AppConfig& config, const MaliciousEntitySet* lexicon,
                                         const std::map<std::string, KillChainPhase>* hints) {
  auto build = [&](BackendKind kind) -> std::shared_ptr<LlmBackend> {
    switch (kind) {
      case BackendKind::kOracle:
        if (lexicon == nullptr) throw Error(ErrorCode::kConfigInvalid, "the oracle backend needs a lexicon");
        return std::make_shared<RuleOracleBackend>(*lexicon, hints ? *hints : std::map<std::string, KillChainPhase>{});
      case BackendKind::kHttp:
        if (config.llm.base_url.empty()) {
          throw Error(ErrorCode::kConfigInvalid, "the http backend needs llm.base_url or ANANKE_LLM_URL");
        }
        return std::make_shared<HttpChatBackend>(config.llm);
      default:
        throw Error(ErrorCode::kConfigInvalid, "cassettes cannot wrap cassettes");
    }
  };
  switch (config.backend) {
    case BackendKind::kCassetteRecord:
      if (config.cassette.empty()) throw Error(ErrorCode::kConfigInvalid, "cassette-record needs --cassette");
      return std::make_shared<CassetteBackend>(config.cassette, CassetteMode::kRecord, build(config.record_inner));
    case BackendKind::kCassetteReplay:
      if (config.cassette.empty()) throw Error(ErrorCode::kConfigInvalid, "cassette-replay needs --cassette");
      return std::make_shared<CassetteBackend>(config.cassette, CassetteMode::kReplay);
    default:
      return build(config.backend);
  }
}

}  // namespace ananke
