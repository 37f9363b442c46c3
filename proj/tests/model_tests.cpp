/* Copyright (c) 2026 The Ananke Authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */

#include <gtest/gtest.h>

#include "ananke/model.hpp"
#include "oracles.hpp"

namespace ananke {
namespace {

TEST(CanonicalizeTest, ProcessKeepsLowercasedBasenameAndPid) {
  EXPECT_EQ(canonicalize(EntityKind::kProcess, "C:\\Windows\\System32\\SVCHOST.EXE", 412),
            "process:svchost.exe#412");
  EXPECT_EQ(canonicalize(EntityKind::kProcess, "/usr/bin/Python3"), "process:python3");
}

TEST(CanonicalizeTest, IpLeadingZerosStripped) {
  EXPECT_EQ(canonicalize(EntityKind::kIpAddress, "192.168.017.128"), "ip:192.168.17.128");
  EXPECT_EQ(canonicalize(EntityKind::kIpAddress, "010.000.000.001"), "ip:10.0.0.1");
}

TEST(CanonicalizeTest, DomainLowercaseNoTrailingDot) {
  EXPECT_EQ(canonicalize(EntityKind::kDomain, "Evil.Example.COM."), "domain:evil.example.com");
}

TEST(CanonicalizeTest, FilePathsBySeparatorAndDrive) {
  EXPECT_EQ(canonicalize(EntityKind::kFile, "C:\\Users\\Bob\\Evil.DLL"), "file:c:/users/bob/evil.dll");
  EXPECT_EQ(canonicalize(EntityKind::kFile, "/tmp/CaseKept"), "file:/tmp/CaseKept");
}

TEST(CanonicalizeTest, RegistryAndOther) {
  EXPECT_EQ(canonicalize(EntityKind::kRegistry, "HKLM\\Software\\Run"), "registry:hklm\\software\\run");
  EXPECT_EQ(canonicalize(EntityKind::kOther, "  pipe 7  "), "other:pipe 7");
}

TEST(CanonicalizeTest, PidIgnoredForNonProcess) {
  EXPECT_EQ(canonicalize(EntityKind::kFile, "/tmp/x", 9), "file:/tmp/x");
  EXPECT_FALSE(Entity::make(EntityKind::kFile, "/tmp/x", 9).pid.has_value());
}

TEST(CanonicalizeTest, EmptyNameRejected) {
  try {
    canonicalize(EntityKind::kFile, "   ");
    FAIL() << "expected InvalidEntity";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidEntity);
  }
}

TEST(CanonicalizeTest, UnknownKindMapsToOther) {
  EXPECT_EQ(parse_entity_kind("Pipe"), EntityKind::kOther);
  EXPECT_EQ(parse_entity_kind("ipaddress"), EntityKind::kIpAddress);
  EXPECT_EQ(parse_entity_kind("IP"), EntityKind::kIpAddress);
}

// Re-canonicalizing any key is a fixpoint.
TEST(CanonicalizeTest, IdempotentOnRandomEntities) {
  testing::Gen g(3);
  const char* pieces[] = {"A", "b", "\\", "/", ".", "0", "07", "Exe", " ", "c:"};
  for (int i = 0; i < 2000; ++i) {
    const EntityKind kind = kAllEntityKinds[g.below(kAllEntityKinds.size())];
    std::string raw;
    const auto len = 1 + g.below(8);
    for (std::uint64_t j = 0; j < len; ++j) raw += pieces[g.below(10)];
    if (kind == EntityKind::kIpAddress) {
      raw = std::to_string(g.below(300)) + ".0" + std::to_string(g.below(10)) + ".1.002";
    }
    std::optional<std::int64_t> pid;
    if (g.below(2)) pid = static_cast<std::int64_t>(g.below(70000));
    std::string key;
    try {
      key = canonicalize(kind, raw, pid);
    } catch (const Error&) {
      continue;
    }
    EXPECT_EQ(recanonicalize_key(key), key) << raw;
  }
}

TEST(CanonicalKeyTest, ParseSplitsTagNameAndPid) {
  auto p = parse_canonical_key("process:svchost.exe#412");
  ASSERT_TRUE(p);
  EXPECT_EQ(p->kind, EntityKind::kProcess);
  EXPECT_EQ(p->name, "svchost.exe");
  EXPECT_EQ(p->pid, 412);
  EXPECT_FALSE(parse_canonical_key("svchost.exe"));
  EXPECT_EQ(host_qualified_key("h1", "file:/a"), "h1@file:/a");
}

TEST(PhaseTest, ParseIsCaseAndSpacingInsensitive) {
  EXPECT_EQ(parse_phase("command & control"), KillChainPhase::kCommandAndControl);
  EXPECT_EQ(parse_phase("CommandAndControl"), KillChainPhase::kCommandAndControl);
  EXPECT_EQ(parse_phase("C2"), KillChainPhase::kCommandAndControl);
  EXPECT_EQ(parse_phase("Actions on Objectives"), KillChainPhase::kActionsOnObjectives);
  EXPECT_EQ(parse_phase("RECONNAISSANCE"), KillChainPhase::kReconnaissance);
  for (KillChainPhase p : kAllPhases) {
    EXPECT_EQ(parse_phase(to_string(p)), p);
    EXPECT_EQ(parse_phase(display_name(p)), p);
  }
}

TEST(PhaseTest, UnknownLabelIsAnError) {
  try {
    parse_phase("Lateral Movement");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPhaseParse);
  }
}

TEST(PhaseTest, ExactlySevenOrderedPhases) {
  ASSERT_EQ(kAllPhases.size(), 7u);
  for (std::size_t i = 1; i < kAllPhases.size(); ++i) EXPECT_LT(kAllPhases[i - 1], kAllPhases[i]);
}

}  // namespace
}  // namespace ananke
