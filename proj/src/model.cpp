/* Copyright (c) 2026 The Ananke Authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */

#include "ananke/model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <vector>

namespace ananke {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidEntity: return "InvalidEntity";
    case ErrorCode::kPhaseParse: return "PhaseParseError";
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kUnknownNode: return "UnknownNode";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kEmptyIndex: return "EmptyIndex";
    case ErrorCode::kEmbedder: return "EmbedderError";
    case ErrorCode::kMissingPlaceholder: return "MissingPlaceholder";
    case ErrorCode::kNoJsonFound: return "NoJsonFound";
    case ErrorCode::kSchemaViolation: return "SchemaViolation";
    case ErrorCode::kLlmTransport: return "LlmTransport";
    case ErrorCode::kLlmTimeout: return "LlmTimeout";
    case ErrorCode::kLlmMalformedResponse: return "LlmMalformedResponse";
    case ErrorCode::kCassetteMiss: return "CassetteMiss";
    case ErrorCode::kPromptShapeUnrecognized: return "PromptShapeUnrecognized";
    case ErrorCode::kFormatVersionMismatch: return "FormatVersionMismatch";
    case ErrorCode::kDuplicateScenario: return "DuplicateScenario";
    case ErrorCode::kDuplicateUnit: return "DuplicateUnit";
    case ErrorCode::kUnknownUnit: return "UnknownUnit";
    case ErrorCode::kAlertUnresolved: return "AlertUnresolved";
    case ErrorCode::kOutOfUniverse: return "OutOfUniverse";
    case ErrorCode::kSpecInvalid: return "SpecInvalid";
    case ErrorCode::kConfigInvalid: return "ConfigInvalid";
  }
  return "Unknown";
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(std::string_view text) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  return std::string(text);
}

std::string_view to_string(EntityKind kind) {
  switch (kind) {
    case EntityKind::kProcess: return "Process";
    case EntityKind::kFile: return "File";
    case EntityKind::kSocket: return "Socket";
    case EntityKind::kDomain: return "Domain";
    case EntityKind::kIpAddress: return "IPAddress";
    case EntityKind::kRegistry: return "Registry";
    case EntityKind::kOther: return "Other";
  }
  return "Other";
}

std::string_view kind_tag(EntityKind kind) {
  switch (kind) {
    case EntityKind::kProcess: return "process";
    case EntityKind::kFile: return "file";
    case EntityKind::kSocket: return "socket";
    case EntityKind::kDomain: return "domain";
    case EntityKind::kIpAddress: return "ip";
    case EntityKind::kRegistry: return "registry";
    case EntityKind::kOther: return "other";
  }
  return "other";
}

EntityKind parse_entity_kind(std::string_view text) {
  const std::string lower = to_lower(trim(text));
  for (EntityKind kind : kAllEntityKinds) {
    if (lower == to_lower(to_string(kind)) || lower == kind_tag(kind)) return kind;
  }
  if (lower == "ipaddr" || lower == "ip_address") return EntityKind::kIpAddress;
  return EntityKind::kOther;
}

namespace {

bool is_drive_prefixed(std::string_view path) {
  return path.size() >= 2 && std::isalpha(static_cast<unsigned char>(path[0])) &&
         path[1] == ':';
}

std::string basename_of(std::string_view path) {
  while (!path.empty() && (path.back() == '/' || path.back() == '\\')) path.remove_suffix(1);
  const auto pos = path.find_last_of("/\\");
  return std::string(pos == std::string_view::npos ? path : path.substr(pos + 1));
}

// Dotted-quad with purely decimal octets gets leading zeros stripped;
// anything else (IPv6, hostnames) is only lowercased.
std::string normalize_ip(std::string_view ip) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto dot = ip.find('.', start);
    parts.push_back(ip.substr(start, dot == std::string_view::npos ? ip.npos : dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  const bool dotted_quad =
      parts.size() == 4 && std::all_of(parts.begin(), parts.end(), [](std::string_view p) {
        return !p.empty() && std::all_of(p.begin(), p.end(), [](unsigned char c) {
          return std::isdigit(c) != 0;
        });
      });
  if (!dotted_quad) return to_lower(ip);
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    std::string_view p = parts[i];
    while (p.size() > 1 && p.front() == '0') p.remove_prefix(1);
    if (i > 0) out += '.';
    out += p;
  }
  return out;
}

std::string normalize_socket(std::string_view socket) {
  // "a.b.c.d:port" keeps the port and normalizes the address part.
  const auto colon = socket.rfind(':');
  if (colon != std::string_view::npos && socket.find(':') == colon) {
    return normalize_ip(socket.substr(0, colon)) + to_lower(socket.substr(colon));
  }
  return to_lower(socket);
}

}  // namespace

std::string canonicalize(EntityKind kind, std::string_view raw_name,
                         std::optional<std::int64_t> pid) {
  const std::string name = trim(raw_name);
  if (name.empty()) throw Error(ErrorCode::kInvalidEntity, "empty entity name");

  std::string normalized;
  switch (kind) {
    case EntityKind::kProcess:
      normalized = to_lower(basename_of(name));
      break;
    case EntityKind::kFile: {
      normalized = name;
      std::replace(normalized.begin(), normalized.end(), '\\', '/');
      if (is_drive_prefixed(normalized)) normalized = to_lower(normalized);
      break;
    }
    case EntityKind::kIpAddress:
      normalized = normalize_ip(name);
      break;
    case EntityKind::kSocket:
      normalized = normalize_socket(name);
      break;
    case EntityKind::kDomain: {
      std::string_view view = name;
      while (!view.empty() && view.back() == '.') view.remove_suffix(1);
      normalized = to_lower(view);
      break;
    }
    case EntityKind::kRegistry:
      normalized = to_lower(name);
      break;
    case EntityKind::kOther:
      normalized = name;
      break;
  }
  // Basename extraction or dot stripping can expose inner whitespace.
  normalized = trim(normalized);
  if (normalized.empty()) {
    throw Error(ErrorCode::kInvalidEntity, "entity name normalizes to empty: '" + name + "'");
  }

  std::string key(kind_tag(kind));
  key += ':';
  key += normalized;
  if (kind == EntityKind::kProcess && pid) {
    key += '#';
    key += std::to_string(*pid);
  }
  return key;
}

std::optional<ParsedKey> parse_canonical_key(std::string_view key) {
  const auto colon = key.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  const std::string_view tag = key.substr(0, colon);
  std::optional<EntityKind> kind;
  for (EntityKind k : kAllEntityKinds) {
    if (tag == kind_tag(k)) kind = k;
  }
  if (!kind) return std::nullopt;

  ParsedKey parsed{*kind, std::string(key.substr(colon + 1)), std::nullopt};
  if (*kind == EntityKind::kProcess) {
    const auto hash = parsed.name.rfind('#');
    if (hash != std::string::npos && hash + 1 < parsed.name.size()) {
      std::int64_t pid = 0;
      const char* first = parsed.name.data() + hash + 1;
      const char* last = parsed.name.data() + parsed.name.size();
      auto [ptr, ec] = std::from_chars(first, last, pid);
      if (ec == std::errc() && ptr == last) {
        parsed.pid = pid;
        parsed.name.resize(hash);
      }
    }
  }
  return parsed;
}

std::string host_qualified_key(std::string_view host_id, std::string_view key) {
  std::string out(host_id);
  out += '@';
  out += key;
  return out;
}

std::string recanonicalize_key(std::string_view key) {
  if (auto parsed = parse_canonical_key(key); parsed && !parsed->name.empty()) {
    return canonicalize(parsed->kind, parsed->name, parsed->pid);
  }
  return canonicalize(EntityKind::kOther, key);
}

Entity Entity::make(EntityKind kind, std::string raw_name, std::optional<std::int64_t> pid) {
  if (kind != EntityKind::kProcess) pid.reset();
  Entity e;
  e.kind = kind;
  e.canonical_key = canonicalize(kind, raw_name, pid);
  e.raw_name = std::move(raw_name);
  e.pid = pid;
  return e;
}

std::string_view to_string(KillChainPhase phase) {
  switch (phase) {
    case KillChainPhase::kReconnaissance: return "Reconnaissance";
    case KillChainPhase::kWeaponization: return "Weaponization";
    case KillChainPhase::kDelivery: return "Delivery";
    case KillChainPhase::kExploitation: return "Exploitation";
    case KillChainPhase::kInstallation: return "Installation";
    case KillChainPhase::kCommandAndControl: return "CommandAndControl";
    case KillChainPhase::kActionsOnObjectives: return "ActionsOnObjectives";
  }
  return "Reconnaissance";
}

std::string_view display_name(KillChainPhase phase) {
  switch (phase) {
    case KillChainPhase::kCommandAndControl: return "Command & Control";
    case KillChainPhase::kActionsOnObjectives: return "Actions on Objectives";
    default: return to_string(phase);
  }
}

KillChainPhase parse_phase(std::string_view label) {
  std::string squashed;
  for (unsigned char c : label) {
    if (std::isalnum(c)) squashed += static_cast<char>(std::tolower(c));
  }
  for (KillChainPhase phase : kAllPhases) {
    if (squashed == to_lower(to_string(phase))) return phase;
  }
  // "Command & Control", "Command and Control", "Actions on Objective".
  if (squashed == "commandcontrol" || squashed == "c2") return KillChainPhase::kCommandAndControl;
  if (squashed == "actionsonobjective" || squashed == "actiononobjectives" ||
      squashed == "actiononobjective") {
    return KillChainPhase::kActionsOnObjectives;
  }
  throw Error(ErrorCode::kPhaseParse, "unknown Kill Chain phase '" + std::string(label) + "'");
}

}  // namespace ananke
