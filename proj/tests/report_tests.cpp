/* Copyright (c) 2026 The Ananke Authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */

#include <gtest/gtest.h>

#include "ananke/report.hpp"
#include "oracles.hpp"

namespace ananke {
namespace {

using nlohmann::json;

CacheEntry entry(std::size_t it, std::optional<KillChainPhase> phase, std::vector<std::string> mal,
                 std::vector<std::string> ben, std::vector<std::string> behaviors, std::string summary = "s") {
  CacheEntry e;
  e.iteration = it;
  e.origin_node = "other:o";
  if (phase) e.retrieved.push_back({"u" + std::to_string(it), 0.5, *phase});
  e.response.malicious_entities = std::move(mal);
  e.response.benign_entities = std::move(ben);
  e.response.behaviors = std::move(behaviors);
  e.response.summary = std::move(summary);
  return e;
}

std::vector<CacheEntry> three_rows() {
  return {entry(3, KillChainPhase::kCommandAndControl, {"ip:1.2.3.4"}, {}, {}, "beacon"),
          entry(1, KillChainPhase::kDelivery, {"file:/x"}, {"process:explorer.exe"}, {"download", "open"}),
          entry(2, std::nullopt, {"process:x.exe"}, {"file:/x"}, {"exec"})};
}

TEST(StructuredReportTest, EmptyCacheStillListsAlert) {
  const Report r = build_structured_report({}, {"process:a.exe"}, {"process:a.exe"}, {}, "scn");
  EXPECT_TRUE(r.timeline.empty());
  ASSERT_EQ(r.entity_roles.size(), 1u);
  EXPECT_EQ(r.entity_roles.at("process:a.exe").verdict, Verdict::kMalicious);
  EXPECT_EQ(r.entity_roles.at("process:a.exe").first_seen_iteration, 0u);
  EXPECT_NE(render_markdown(r).find("No sequences"), std::string::npos);
}

TEST(StructuredReportTest, TimelineInIterationOrder) {
  const Report r = build_structured_report(three_rows(), {}, {"file:/x", "process:x.exe", "ip:1.2.3.4"}, {}, "scn");
  ASSERT_EQ(r.timeline.size(), 3u);
  EXPECT_EQ(r.timeline[0].iteration, 1u);
  EXPECT_EQ(r.timeline[0].phase, KillChainPhase::kDelivery);
  EXPECT_EQ(r.timeline[0].behavior, "download; open");
  EXPECT_FALSE(r.timeline[1].phase);
  EXPECT_EQ(r.timeline[2].behavior, "beacon");  // no behaviors, falls back to summary
  EXPECT_EQ(compact_timeline(r)[1]["phase"], "Unknown");
}

TEST(StructuredReportTest, MaliciousVerdictWins) {
  const Report r = build_structured_report(three_rows(), {}, {}, {}, "scn");
  EXPECT_EQ(r.entity_roles.at("file:/x").verdict, Verdict::kMalicious);
  EXPECT_EQ(r.entity_roles.at("file:/x").first_seen_iteration, 1u);
  EXPECT_EQ(r.entity_roles.at("process:explorer.exe").verdict, Verdict::kBenignParticipant);
}

TEST(StructuredReportTest, JsonRoundTrip) {
  Report r = build_structured_report(three_rows(), {"file:/x"}, {"file:/x"}, {"w"}, "scn");
  r.narrative = "text";
  r.narrative_usage = {1, 2, 3};
  EXPECT_EQ(report_from_json(json::parse(to_json(r).dump())), r);
}

class FailingBackend final : public LlmBackend {
 public:
  std::string id() const override { return "failing"; }
  Completion complete(const std::string&, const std::string&) override {
    throw Error(ErrorCode::kLlmTransport, "down");
  }
};

TEST(NarrativeTest, FailureKeepsStructuredReport) {
  const Report base = build_structured_report(three_rows(), {}, {"file:/x"}, {}, "scn");
  FailingBackend backend;
  const Report r = build_narrative(base, "sum", backend);
  EXPECT_FALSE(r.narrative);
  EXPECT_EQ(r.warnings, std::vector<std::string>{std::string(kWarnNarrativeUnavailable)});
  EXPECT_EQ(r.timeline, base.timeline);
  EXPECT_EQ(r.entity_roles, base.entity_roles);
}

TEST(NarrativeTest, OracleDigestAndStructuredFieldsUntouched) {
  const Report base = build_structured_report(three_rows(), {}, {"file:/x"}, {}, "scn");
  RuleOracleBackend oracle({{}, ""}, {});
  const Report r = build_narrative(base, "", oracle);
  ASSERT_TRUE(r.narrative);
  EXPECT_EQ(*r.narrative, RuleOracleBackend::narrative_digest(compact_timeline(base)));
  EXPECT_EQ(*r.narrative,
            "Attack narrative digest\nPhases: Delivery -> Unknown -> Command & Control\nSteps: 3\n"
            "Entities: file:/x, process:x.exe, ip:1.2.3.4");
  EXPECT_GT(r.narrative_usage.total(), 0);
  Report stripped = r;
  stripped.narrative.reset();
  stripped.narrative_usage = {};
  EXPECT_EQ(stripped, base);
}

TEST(NarrativeTest, FullCacheInputCarriesEveryEntry) {
  const auto cache = three_rows();
  const Report base = build_structured_report(cache, {}, {"file:/x"}, {}, "scn");
  RuleOracleBackend oracle({{}, ""}, {});
  const Report full = build_narrative(base, "", oracle, cache);
  ASSERT_TRUE(full.narrative);
  EXPECT_NE(full.narrative->find("Steps: 3"), std::string::npos);
  EXPECT_EQ(full.timeline, base.timeline);

  // Only the full cache carries raw cache fields such as origin_node.
  struct Capture final : LlmBackend {
    std::string prompt;
    std::string id() const override { return "capture"; }
    Completion complete(const std::string&, const std::string& user) override {
      prompt = user;
      return {"n", {}};
    }
  } capture;
  build_narrative(base, "", capture);
  EXPECT_EQ(capture.prompt.find("origin_node"), std::string::npos);
  build_narrative(base, "", capture, cache);
  EXPECT_NE(capture.prompt.find("origin_node"), std::string::npos);
  EXPECT_EQ(parse_narrative_input(to_string(NarrativeInput::kFullCache)), NarrativeInput::kFullCache);
  EXPECT_EQ(testing::code_of([] { parse_narrative_input("everything"); }), ErrorCode::kConfigInvalid);
}

TEST(MarkdownTest, EscapesAndTruncatesCells) {
  Report r = build_structured_report({entry(1, KillChainPhase::kDelivery, {"file:/x"}, {}, {std::string(400, 'a') + "|b"})},
                                     {}, {}, {"iteration_cap_reached"}, "scn");
  const std::string md = render_markdown(r);
  EXPECT_NE(md.find(std::string(240, 'a') + "..."), std::string::npos);
  EXPECT_EQ(md.find(std::string(241, 'a')), std::string::npos);
  EXPECT_NE(md.find("## Warnings"), std::string::npos);
  EXPECT_NE(md.find("# Investigation report: scn"), std::string::npos);
}

}  // namespace
}  // namespace ananke
