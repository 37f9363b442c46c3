/* Copyright (c) 2026 The Ananke Authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "ananke/errors.hpp"

namespace ananke {

enum class EntityKind { kProcess, kFile, kSocket, kDomain, kIpAddress, kRegistry, kOther };

inline constexpr std::array<EntityKind, 7> kAllEntityKinds = {
    EntityKind::kProcess, EntityKind::kFile,     EntityKind::kSocket, EntityKind::kDomain,
    EntityKind::kIpAddress, EntityKind::kRegistry, EntityKind::kOther};

// "Process", "File", ... as used in the JsonEvent/CsvTriple schemas.
std::string_view to_string(EntityKind kind);
// Key prefix: "process", "file", "socket", "domain", "ip", "registry", "other".
std::string_view kind_tag(EntityKind kind);
// Case-insensitive; accepts schema names and key tags. Unknown text maps to kOther.
EntityKind parse_entity_kind(std::string_view text);

/// Node identity. Produces `<kind-tag>:<normalized-name>[#pid]`.
///
/// Processes keep only the lowercased basename; Windows-style (drive-letter)
/// file paths are lowercased, POSIX paths keep their case; IPv4 octets lose
/// leading zeros; domains are lowercased without the trailing dot; registry
/// keys are lowercased. The pid is only used for processes.
std::string canonicalize(EntityKind kind, std::string_view raw_name,
                         std::optional<std::int64_t> pid = std::nullopt);

struct ParsedKey {
  EntityKind kind;
  std::string name;
  std::optional<std::int64_t> pid;
};

// Splits a canonical key back into its parts. Returns nullopt when the text
// does not start with a known kind tag.
std::optional<ParsedKey> parse_canonical_key(std::string_view key);

// Cross-host identity is plain concatenation.
std::string host_qualified_key(std::string_view host_id, std::string_view key);

struct Entity {
  EntityKind kind = EntityKind::kOther;
  std::string raw_name;
  std::optional<std::int64_t> pid;
  std::string canonical_key;

  static Entity make(EntityKind kind, std::string raw_name,
                     std::optional<std::int64_t> pid = std::nullopt);

  friend bool operator==(const Entity&, const Entity&) = default;
};

struct Event {
  Entity subject;
  std::string action;
  Entity object;
  std::int64_t timestamp = 0;  // ns since epoch
  std::string host_id;
  std::int64_t seq_no = 0;
  std::optional<std::string> raw_ref;

  friend bool operator==(const Event&, const Event&) = default;
};

// Total order used everywhere events are sorted.
inline bool event_time_less(const Event& a, const Event& b) {
  if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
  return a.seq_no < b.seq_no;
}

enum class KillChainPhase {
  kReconnaissance,
  kWeaponization,
  kDelivery,
  kExploitation,
  kInstallation,
  kCommandAndControl,
  kActionsOnObjectives,
};

inline constexpr std::array<KillChainPhase, 7> kAllPhases = {
    KillChainPhase::kReconnaissance, KillChainPhase::kWeaponization,
    KillChainPhase::kDelivery,       KillChainPhase::kExploitation,
    KillChainPhase::kInstallation,   KillChainPhase::kCommandAndControl,
    KillChainPhase::kActionsOnObjectives};

std::string_view to_string(KillChainPhase phase);
// Human form, e.g. "Command & Control".
std::string_view display_name(KillChainPhase phase);
// Case-insensitive, tolerant of spacing and "&"/"and". Throws kPhaseParse.
KillChainPhase parse_phase(std::string_view label);

struct MaliciousEntitySet {
  std::set<std::string> keys;
  std::string scenario_id;

  bool contains(std::string_view key) const { return keys.count(std::string(key)) > 0; }
  friend bool operator==(const MaliciousEntitySet&, const MaliciousEntitySet&) = default;
};

// Re-canonicalizes every key; used to enforce the MaliciousEntitySet invariant
// on keys that come from files or LLM output.
std::string recanonicalize_key(std::string_view key);

std::string to_lower(std::string_view text);
std::string trim(std::string_view text);

}  // namespace ananke
