/* Copyright (c) 2026 The Ananke Authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "ananke/investigator.hpp"
#include "ananke/llm.hpp"
#include "ananke/report.hpp"
#include "ananke/vindex.hpp"

namespace ananke {

// LLM backends selectable from the command line and config file.
enum class BackendKind { kOracle, kHttp, kCassetteRecord, kCassetteReplay };
std::string_view to_string(BackendKind kind);
BackendKind parse_backend_kind(std::string_view text);

struct AppConfig {
  std::string kb_dir;
  std::vector<std::string> log_dirs;

  BackendKind backend = BackendKind::kOracle;
  BackendKind record_inner = BackendKind::kHttp;  // what cassette-record wraps
  std::string cassette;
  HttpBackendConfig llm;

  std::string embedder = "local";  // local | http
  std::size_t embedder_dim = 256;
  std::string embedding_model;

  InvestigationConfig investigation;
  bool event_level = false;

  NarrativeInput narrative_input = NarrativeInput::kCompactTimeline;

  // Every key with its default value.
  nlohmann::json to_json(bool redact_secrets = true) const;
};

/// Overlays a config document onto `base`. Unknown keys at any level throw
/// kConfigInvalid naming the key path.
AppConfig apply_config_json(AppConfig base, const nlohmann::json& j);
AppConfig load_config_file(AppConfig base, const std::filesystem::path& path);

// ANANKE_LLM_URL, ANANKE_LLM_MODEL and ANANKE_LLM_KEY, when set.
AppConfig apply_env(AppConfig base);

std::unique_ptr<Embedder> make_embedder(const AppConfig& config);

/// Backend for the configured kind. The oracle needs a lexicon and phase
/// hints; HTTP-based kinds need llm.base_url; cassette kinds need a path.
std::shared_ptr<LlmBackend> make_backend(const AppConfig& config, const MaliciousEntitySet* lexicon = nullptr,
                                         const std::map<std::string, KillChainPhase>* hints = nullptr);

}  // namespace ananke
