/* Copyright (c) 2026 The Ananke Authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "ananke/model.hpp"
#include "ananke/vindex.hpp"

namespace ananke {

struct TokenUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t reasoning_tokens = 0;
  std::int64_t answer_tokens = 0;

  std::int64_t total() const { return prompt_tokens + reasoning_tokens + answer_tokens; }
  bool valid() const { return prompt_tokens >= 0 && reasoning_tokens >= 0 && answer_tokens >= 0; }

  TokenUsage& operator+=(const TokenUsage& other) {
    prompt_tokens += other.prompt_tokens;
    reasoning_tokens += other.reasoning_tokens;
    answer_tokens += other.answer_tokens;
    return *this;
  }
  friend TokenUsage operator+(TokenUsage a, const TokenUsage& b) { return a += b; }
  friend bool operator==(const TokenUsage&, const TokenUsage&) = default;
};

nlohmann::json to_json(const TokenUsage& usage);
TokenUsage usage_from_json(const nlohmann::json& j);

struct Completion {
  std::string text;
  TokenUsage usage;
  int retries = 0;  // transport-level retries spent on this call
};

class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual std::string id() const = 0;
  virtual Completion complete(const std::string& system_prompt, const std::string& user_prompt) = 0;
};

// ---------------------------------------------------------------------------
// Prompt templates

enum class TemplateName { kKill, kReasoning, kGen };

std::string_view to_string(TemplateName name);

struct PromptTemplate {
  TemplateName name;
  int version = 1;
  std::string system;  // may contain placeholders too
  std::string body;
};

struct RenderedPrompt {
  std::string system;
  std::string user;
};

// The shipped templates, parsed from the embedded template files.
const PromptTemplate& prompt_template(TemplateName name);

// Parses the on-disk template format ("# key: value" header lines, then
// "--- system" and "--- user" sections).
PromptTemplate parse_template_source(TemplateName name, std::string_view source);

// Names of the {{placeholder}} slots in order of first appearance.
std::vector<std::string> placeholders(std::string_view text);

/// Single-pass substitution of `{{name}}` slots. Bound values are inserted
/// verbatim and never rescanned. Any slot without a binding throws
/// kMissingPlaceholder naming the slot; unused bindings are ignored.
std::string render_text(std::string_view text, const std::map<std::string, std::string>& bindings);
RenderedPrompt render(const PromptTemplate& tmpl, const std::map<std::string, std::string>& bindings);

// Event lines as they appear inside <sequence>/<sequences> blocks.
nlohmann::json prompt_event_json(const Event& event);
std::string render_event_lines(const std::vector<Event>& events);

// Text between <tag> and </tag>, trimmed of one surrounding newline.
std::optional<std::string> extract_block(std::string_view text, std::string_view tag);

// ---------------------------------------------------------------------------
// Response parsing

/// First complete JSON object or array found in `raw`, skipping prose and
/// code fences. Throws kNoJsonFound.
nlohmann::json extract_first_json(std::string_view raw);

struct ReasoningResponse {
  std::vector<std::string> malicious_entities;  // canonical keys, first-seen order
  std::vector<std::string> behaviors;
  std::string summary;
  std::vector<std::string> benign_entities;
  std::vector<std::string> conflicts;  // keys listed as both; kept as malicious

  friend bool operator==(const ReasoningResponse&, const ReasoningResponse&) = default;
};

nlohmann::json to_json(const ReasoningResponse& response);
ReasoningResponse reasoning_from_json(const nlohmann::json& j);

/// Accepts a JSON object or an array of objects (merged in order; the last
/// non-empty summary wins). Entities may be strings or {name, kind} objects.
/// Names that already carry a kind tag ("process:x.exe#12") are kept as
/// canonical keys; otherwise the kind field (default Other) picks the rule.
/// Throws kNoJsonFound or kSchemaViolation.
ReasoningResponse parse_reasoning(std::string_view raw);

// Canonical key for an entity mention from LLM output (string or object).
std::string canonical_mention(const nlohmann::json& mention);

// ---------------------------------------------------------------------------
// Backends

struct HttpBackendConfig {
  std::string base_url;  // e.g. http://localhost:8080/v1
  std::string model;
  std::string api_key;
  double temperature = 0.0;
  std::chrono::milliseconds timeout{120000};
  int max_retries = 3;
  std::chrono::milliseconds backoff_initial{500};
};

/// OpenAI-compatible chat completions client. 429 and 5xx responses are
/// retried with exponential backoff up to max_retries; other failures throw
/// kLlmTransport (status + body excerpt) or kLlmTimeout.
class HttpChatBackend final : public LlmBackend {
 public:
  explicit HttpChatBackend(HttpBackendConfig config);

  std::string id() const override;
  Completion complete(const std::string& system_prompt, const std::string& user_prompt) override;

  nlohmann::json build_request(const std::string& system_prompt,
                               const std::string& user_prompt) const;
  static TokenUsage usage_from_response(const nlohmann::json& body);

 private:
  HttpBackendConfig config_;
};

/// Embeddings over an OpenAI-compatible `/embeddings` endpoint.
class HttpEmbedder final : public Embedder {
 public:
  HttpEmbedder(HttpBackendConfig config, std::size_t dim);

  std::string id() const override;
  std::size_t dim() const override { return dim_; }
  EmbeddingVector embed(std::string_view text) const override;

 private:
  HttpBackendConfig config_;
  std::size_t dim_;
};

enum class CassetteMode { kRecord, kReplay };

// Key of a cassette entry: SHA-256 of system + "\0" + user.
std::string request_hash(std::string_view system_prompt, std::string_view user_prompt);

/// Record mode forwards to `inner` and appends {hash, system, user, response,
/// usage} as one JSON line per call. Replay mode answers from the file by
/// request hash, in any order, and throws kCassetteMiss for unseen prompts.
class CassetteBackend final : public LlmBackend {
 public:
  CassetteBackend(std::filesystem::path path, CassetteMode mode,
                  std::shared_ptr<LlmBackend> inner = nullptr);

  std::string id() const override;
  Completion complete(const std::string& system_prompt, const std::string& user_prompt) override;
  std::size_t size() const;

 private:
  std::filesystem::path path_;
  CassetteMode mode_;
  std::shared_ptr<LlmBackend> inner_;
  std::unordered_map<std::string, Completion> entries_;
  mutable std::mutex mutex_;
};

/// Deterministic stand-in for a model. Recognizes the three prompt shapes by
/// their blocks: <sequences> (annotation), <sequence> (reasoning) and
/// <reasoning_cache> (report). Reasoning marks exactly the lexicon entities
/// of the sequence as malicious; annotation groups consecutive events by the
/// latest phase hint among their endpoints; report returns a digest listing
/// timeline phases in order. Token usage counts whitespace-separated words.
class RuleOracleBackend final : public LlmBackend {
 public:
  RuleOracleBackend(MaliciousEntitySet lexicon, std::map<std::string, KillChainPhase> phase_hints);

  std::string id() const override { return "rule-oracle"; }
  Completion complete(const std::string& system_prompt, const std::string& user_prompt) override;

  static std::int64_t count_words(std::string_view text);
  // Narrative the oracle produces for a compact timeline (see build_narrative).
  static std::string narrative_digest(const nlohmann::json& timeline);

 private:
  std::string answer_reasoning(const std::string& sequence_block) const;
  std::string answer_annotation(const std::string& sequences_block) const;

  MaliciousEntitySet lexicon_;
  std::map<std::string, KillChainPhase> phase_hints_;
};

}  // namespace ananke
