/* Copyright (c) 2026 The Ananke Authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */

#include "ananke/llm.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "ananke/crypto.hpp"

namespace ananke {

namespace detail {
extern const std::string_view kPromptKillSource;
extern const std::string_view kPromptReasoningSource;
extern const std::string_view kPromptGenSource;
}  // namespace detail

using nlohmann::json;

json to_json(const TokenUsage& usage) {
  return {{"prompt_tokens", usage.prompt_tokens},
          {"reasoning_tokens", usage.reasoning_tokens},
          {"answer_tokens", usage.answer_tokens},
          {"total_tokens", usage.total()}};
}

TokenUsage usage_from_json(const json& j) {
  TokenUsage usage;
  usage.prompt_tokens = j.value("prompt_tokens", std::int64_t{0});
  usage.reasoning_tokens = j.value("reasoning_tokens", std::int64_t{0});
  usage.answer_tokens = j.value("answer_tokens", std::int64_t{0});
  return usage;
}

std::string_view to_string(TemplateName name) {
  switch (name) {
    case TemplateName::kKill: return "p_kill";
    case TemplateName::kReasoning: return "p_reasoning";
    case TemplateName::kGen: return "p_gen";
  }
  return "p_kill";
}

PromptTemplate parse_template_source(TemplateName name, std::string_view source) {
  PromptTemplate tmpl{name, 1, "", ""};
  std::istringstream in{std::string(source)};
  std::string line;
  std::string* section = nullptr;
  std::string system;
  std::string user;
  while (std::getline(in, line)) {
    if (section == nullptr && line.rfind("# ", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos && trim(line.substr(2, colon - 2)) == "version") {
        tmpl.version = std::stoi(trim(line.substr(colon + 1)));
      }
      continue;
    }
    if (line == "--- system") {
      section = &system;
      continue;
    }
    if (line == "--- user") {
      section = &user;
      continue;
    }
    if (section != nullptr) {
      *section += line;
      *section += '\n';
    }
  }
  auto strip_trailing = [](std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
    return s;
  };
  tmpl.system = strip_trailing(system);
  tmpl.body = strip_trailing(user);
  if (tmpl.body.empty()) {
    throw Error(ErrorCode::kConfigInvalid,
                "template " + std::string(to_string(name)) + " has no user section");
  }
  return tmpl;
}

const PromptTemplate& prompt_template(TemplateName name) {
  static const PromptTemplate kill = parse_template_source(TemplateName::kKill, detail::kPromptKillSource);
  static const PromptTemplate reasoning =
      parse_template_source(TemplateName::kReasoning, detail::kPromptReasoningSource);
  static const PromptTemplate gen = parse_template_source(TemplateName::kGen, detail::kPromptGenSource);
  switch (name) {
    case TemplateName::kKill: return kill;
    case TemplateName::kReasoning: return reasoning;
    case TemplateName::kGen: return gen;
  }
  return kill;
}

namespace {

bool is_slot_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

// Returns the slot name when `text` has "{{name}}" at `pos`.
std::optional<std::string> slot_at(std::string_view text, std::size_t pos, std::size_t* end) {
  if (text.compare(pos, 2, "{{") != 0) return std::nullopt;
  std::size_t i = pos + 2;
  while (i < text.size() && is_slot_char(text[i])) ++i;
  if (i == pos + 2 || text.compare(i, 2, "}}") != 0) return std::nullopt;
  *end = i + 2;
  return std::string(text.substr(pos + 2, i - pos - 2));
}

}  // namespace

std::vector<std::string> placeholders(std::string_view text) {
  std::vector<std::string> names;
  for (std::size_t pos = 0; pos < text.size(); ++pos) {
    std::size_t end = 0;
    if (auto name = slot_at(text, pos, &end)) {
      if (std::find(names.begin(), names.end(), *name) == names.end()) names.push_back(*name);
      pos = end - 1;
    }
  }
  return names;
}

std::string render_text(std::string_view text, const std::map<std::string, std::string>& bindings) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = 0;
    if (auto name = slot_at(text, pos, &end)) {
      auto it = bindings.find(*name);
      if (it == bindings.end()) throw Error(ErrorCode::kMissingPlaceholder, *name);
      out += it->second;
      pos = end;
    } else {
      out += text[pos++];
    }
  }
  return out;
}

RenderedPrompt render(const PromptTemplate& tmpl, const std::map<std::string, std::string>& bindings) {
  return {render_text(tmpl.system, bindings), render_text(tmpl.body, bindings)};
}

json prompt_event_json(const Event& event) {
  return {{"ts", event.timestamp},
          {"s", event.subject.canonical_key},
          {"a", event.action},
          {"o", event.object.canonical_key}};
}

std::string render_event_lines(const std::vector<Event>& events) {
  std::string out;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (i > 0) out += '\n';
    out += prompt_event_json(events[i]).dump();
  }
  return out;
}

std::optional<std::string> extract_block(std::string_view text, std::string_view tag) {
  const std::string open = "<" + std::string(tag) + ">";
  const std::string close = "</" + std::string(tag) + ">";
  // Prose may mention "<tag>" before the block itself, so anchor on the
  // closing tag and take the nearest opening tag before it.
  const auto stop = text.find(close);
  if (stop == std::string_view::npos) return std::nullopt;
  const auto start = text.rfind(open, stop);
  if (start == std::string_view::npos) return std::nullopt;
  const auto body_start = start + open.size();
  std::string_view body = text.substr(body_start, stop - body_start);
  if (!body.empty() && body.front() == '\n') body.remove_prefix(1);
  if (!body.empty() && body.back() == '\n') body.remove_suffix(1);
  return std::string(body);
}

namespace {

// End (exclusive) of the balanced JSON value starting at `start`, or npos.
std::size_t balanced_end(std::string_view raw, std::size_t start) {
  std::vector<char> stack;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < raw.size(); ++i) {
    const char c = raw[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{' || c == '[') {
      stack.push_back(c == '{' ? '}' : ']');
    } else if (c == '}' || c == ']') {
      if (stack.empty() || stack.back() != c) return std::string_view::npos;
      stack.pop_back();
      if (stack.empty()) return i + 1;
    }
  }
  return std::string_view::npos;
}

}  // namespace

json extract_first_json(std::string_view raw) {
  for (std::size_t pos = 0; pos < raw.size(); ++pos) {
    if (raw[pos] != '{' && raw[pos] != '[') continue;
    const std::size_t end = balanced_end(raw, pos);
    if (end == std::string_view::npos) continue;
    json j = json::parse(raw.substr(pos, end - pos), nullptr, /*allow_exceptions=*/false);
    if (!j.is_discarded()) return j;
  }
  throw Error(ErrorCode::kNoJsonFound, "no JSON object or array in response");
}

std::string canonical_mention(const json& mention) {
  auto from_name = [](const std::string& name, std::optional<std::string> kind,
                      std::optional<std::int64_t> pid) {
    if (trim(name).empty()) throw Error(ErrorCode::kSchemaViolation, "entity name is empty");
    if (!kind) {
      if (auto parsed = parse_canonical_key(trim(name)); parsed && !parsed->name.empty()) {
        return canonicalize(parsed->kind, parsed->name, parsed->pid);
      }
      return canonicalize(EntityKind::kOther, name);
    }
    const EntityKind k = parse_entity_kind(*kind);
    // A tagged key of the same kind is taken as-is rather than double-tagged.
    if (auto parsed = parse_canonical_key(trim(name)); parsed && parsed->kind == k && !parsed->name.empty()) {
      return canonicalize(parsed->kind, parsed->name, parsed->pid ? parsed->pid : pid);
    }
    return canonicalize(k, name, pid);
  };

  if (mention.is_string()) return from_name(mention.get<std::string>(), std::nullopt, std::nullopt);
  if (mention.is_object()) {
    auto name = mention.find("name");
    if (name == mention.end() || !name->is_string()) {
      throw Error(ErrorCode::kSchemaViolation, "entity.name");
    }
    std::optional<std::string> kind;
    if (auto k = mention.find("kind"); k != mention.end() && k->is_string()) kind = k->get<std::string>();
    std::optional<std::int64_t> pid;
    if (auto p = mention.find("pid"); p != mention.end() && p->is_number_integer()) {
      pid = p->get<std::int64_t>();
    }
    return from_name(name->get<std::string>(), kind, pid);
  }
  throw Error(ErrorCode::kSchemaViolation, "entity must be a string or object");
}

namespace {

void append_unique(std::vector<std::string>& out, const std::string& key) {
  if (std::find(out.begin(), out.end(), key) == out.end()) out.push_back(key);
}

void merge_reasoning_object(const json& obj, ReasoningResponse& out) {
  if (!obj.is_object()) throw Error(ErrorCode::kSchemaViolation, "root");
  auto mal = obj.find("malicious_entities");
  if (mal == obj.end()) throw Error(ErrorCode::kSchemaViolation, "malicious_entities");
  if (!mal->is_array()) throw Error(ErrorCode::kSchemaViolation, "malicious_entities");
  for (const auto& m : *mal) append_unique(out.malicious_entities, canonical_mention(m));

  if (auto ben = obj.find("benign_entities"); ben != obj.end() && !ben->is_null()) {
    if (!ben->is_array()) throw Error(ErrorCode::kSchemaViolation, "benign_entities");
    for (const auto& b : *ben) append_unique(out.benign_entities, canonical_mention(b));
  }
  if (auto beh = obj.find("behaviors"); beh != obj.end() && !beh->is_null()) {
    if (beh->is_string()) {
      out.behaviors.push_back(beh->get<std::string>());
    } else if (beh->is_array()) {
      for (const auto& b : *beh) {
        if (!b.is_string()) throw Error(ErrorCode::kSchemaViolation, "behaviors");
        out.behaviors.push_back(b.get<std::string>());
      }
    } else {
      throw Error(ErrorCode::kSchemaViolation, "behaviors");
    }
  }
  if (auto sum = obj.find("summary"); sum != obj.end() && !sum->is_null()) {
    if (!sum->is_string()) throw Error(ErrorCode::kSchemaViolation, "summary");
    if (!sum->get<std::string>().empty()) out.summary = sum->get<std::string>();
  }
}

}  // namespace

ReasoningResponse parse_reasoning(std::string_view raw) {
  const json root = extract_first_json(raw);
  ReasoningResponse out;
  if (root.is_array()) {
    if (root.empty()) throw Error(ErrorCode::kSchemaViolation, "root (empty array)");
    for (const auto& item : root) merge_reasoning_object(item, out);
  } else {
    merge_reasoning_object(root, out);
  }
  // Malicious wins over benign.
  std::vector<std::string> benign;
  for (const auto& key : out.benign_entities) {
    if (std::find(out.malicious_entities.begin(), out.malicious_entities.end(), key) !=
        out.malicious_entities.end()) {
      out.conflicts.push_back(key);
    } else {
      benign.push_back(key);
    }
  }
  out.benign_entities = std::move(benign);
  return out;
}

json to_json(const ReasoningResponse& response) {
  return {{"malicious_entities", response.malicious_entities},
          {"benign_entities", response.benign_entities},
          {"behaviors", response.behaviors},
          {"summary", response.summary},
          {"conflicts", response.conflicts}};
}

ReasoningResponse reasoning_from_json(const json& j) {
  ReasoningResponse r;
  r.malicious_entities = j.at("malicious_entities").get<std::vector<std::string>>();
  r.benign_entities = j.at("benign_entities").get<std::vector<std::string>>();
  r.behaviors = j.at("behaviors").get<std::vector<std::string>>();
  r.summary = j.at("summary").get<std::string>();
  r.conflicts = j.value("conflicts", std::vector<std::string>{});
  return r;
}

std::string request_hash(std::string_view system_prompt, std::string_view user_prompt) {
  std::string data(system_prompt);
  data += '\0';
  data += user_prompt;
  return sha256_hex(data);
}

}  // namespace ananke
