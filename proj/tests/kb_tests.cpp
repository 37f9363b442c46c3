/* Copyright (c) 2026 The Ananke Authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */

#include <gtest/gtest.h>

#include <deque>
#include <filesystem>
#include <fstream>

#include "ananke/kb.hpp"
#include "ananke/retrieval.hpp"
#include "oracles.hpp"

namespace ananke {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::code_of;
using testing::make_event;
using testing::other;

// Replays canned responses in order and counts calls.
class ScriptedBackend final : public LlmBackend {
 public:
  explicit ScriptedBackend(std::vector<std::string> replies) : replies_(replies.begin(), replies.end()) {}
  std::string id() const override { return "scripted"; }
  Completion complete(const std::string&, const std::string& user) override {
    ++calls;
    prompts.push_back(user);
    if (replies_.empty()) throw Error(ErrorCode::kLlmTransport, "script exhausted");
    Completion c{replies_.front(), {10, 0, 5}, 0};
    replies_.pop_front();
    return c;
  }
  int calls = 0;
  std::vector<std::string> prompts;

 private:
  std::deque<std::string> replies_;
};

std::vector<Event> five_events() {
  std::vector<Event> out;
  for (int i = 0; i < 5; ++i) {
    out.push_back(make_event(other("mal"), "write", other("f" + std::to_string(i)), 100 + i));
  }
  return out;
}

json claims(const std::vector<Event>& events, std::initializer_list<int> which) {
  json arr = json::array();
  for (int i : which) arr.push_back(prompt_event_json(events[i]));
  return arr;
}

std::string segment(const std::string& phase, const json& evidence, const json& entities = json::array()) {
  return json::array({{{"phase", phase},
                       {"behavior", ""},
                       {"entities", entities},
                       {"neighbors", {{"prev", "none"}, {"next", "Exploitation"}}},
                       {"evidence_set", evidence}}})
      .dump();
}

MaliciousEntitySet mal_set(std::set<std::string> keys, std::string id = "scn") {
  return {std::move(keys), std::move(id)};
}

TEST(ExtractTraceTest, MatchesScanOracle) {
  testing::Gen g(41);
  for (int round = 0; round < 30; ++round) {
    const LogSet set = testing::random_log_set(g, 300, 30);
    const auto keys = testing::distinct_keys(set);
    std::set<std::string> mal;
    for (const auto& k : keys) {
      if (g.below(6) == 0) mal.insert(k);
    }
    EXPECT_EQ(extract_trace(set, mal_set(mal)), testing::scan_trace(set, mal));
  }
  EXPECT_TRUE(extract_trace(testing::random_log_set(g, 50, 10), mal_set({})).empty());
}

TEST(AnnotateTest, SingleSegmentCoversTrace) {
  const auto trace = five_events();
  ScriptedBackend backend({segment("Delivery", claims(trace, {0, 1, 2, 3, 4}))});
  const AnnotationResult r = annotate_phases(trace, mal_set({"other:mal"}), backend);
  ASSERT_EQ(r.sequences.size(), 1u);
  EXPECT_EQ(r.sequences[0].meta.phase, KillChainPhase::kDelivery);
  EXPECT_EQ(r.sequences[0].events, trace);
  EXPECT_EQ(r.sequences[0].scenario_id, "scn");
  EXPECT_EQ(r.coverage.coverage(), 1.0);
  EXPECT_EQ(r.retry_count, 0);
  EXPECT_EQ(r.usage, (TokenUsage{10, 0, 5}));
  // Entities default to the malicious endpoints, behavior to the phase name.
  EXPECT_EQ(r.sequences[0].meta.entities, std::vector<std::string>{"other:mal"});
  EXPECT_EQ(r.sequences[0].meta.behavior, "Delivery activity");
  EXPECT_EQ(r.sequences[0].meta.neighbors.next, "Exploitation");
  EXPECT_NE(backend.prompts[0].find("<previous_window>\nnone\n</previous_window>"), std::string::npos);
}

TEST(AnnotateTest, RetriesMalformedThenSucceeds) {
  const auto trace = five_events();
  ScriptedBackend backend({"sorry, no idea", "[{\"phase\": 3}]", segment("Delivery", claims(trace, {0, 1, 2, 3, 4}))});
  const AnnotationResult r = annotate_phases(trace, mal_set({"other:mal"}), backend);
  EXPECT_EQ(r.retry_count, 2);
  EXPECT_EQ(backend.calls, 3);
  EXPECT_EQ(r.usage.total(), 45);
}

TEST(AnnotateTest, GivesUpAfterMaxRetries) {
  const auto trace = five_events();
  ScriptedBackend backend({"x", "y", "z", segment("Delivery", claims(trace, {0}))});
  EXPECT_EQ(code_of([&] { annotate_phases(trace, mal_set({"other:mal"}), backend); }),
            ErrorCode::kLlmMalformedResponse);
  EXPECT_EQ(backend.calls, 3);
}

TEST(AnnotateTest, UnknownPhaseIsNotRetried) {
  const auto trace = five_events();
  ScriptedBackend backend({segment("Lateral Movement", claims(trace, {0})), segment("Delivery", claims(trace, {0}))});
  EXPECT_EQ(code_of([&] { annotate_phases(trace, mal_set({"other:mal"}), backend); }), ErrorCode::kPhaseParse);
  EXPECT_EQ(backend.calls, 1);
}

TEST(AnnotateTest, OmittedEventsAreRepaired) {
  auto trace = five_events();
  for (std::size_t i = 0; i < trace.size(); ++i) trace[i].raw_ref = "events.jsonl:" + std::to_string(i + 1);
  json two = json::array();
  two.push_back(json::parse(segment("Delivery", claims(trace, {0, 1})))[0]);
  two.push_back(json::parse(segment("Installation", claims(trace, {3})))[0]);
  ScriptedBackend backend({two.dump()});
  const AnnotationResult r = annotate_phases(trace, mal_set({"other:mal"}), backend);
  ASSERT_EQ(r.sequences.size(), 2u);
  EXPECT_EQ(r.sequences[0].events.size(), 3u);  // 0, 1 and repaired 2
  EXPECT_EQ(r.sequences[1].events.size(), 2u);  // 3 and repaired 4
  EXPECT_EQ(r.coverage.covered, 3u);
  EXPECT_EQ(r.coverage.repaired, 2u);
  EXPECT_DOUBLE_EQ(r.coverage.coverage(), 0.6);
  EXPECT_EQ(r.coverage.repaired_refs, (std::vector<std::string>{"events.jsonl:3", "events.jsonl:5"}));
}

TEST(AnnotateTest, CountsUnmatchedAndDuplicateClaims) {
  const auto trace = five_events();
  json evidence = claims(trace, {0, 1, 2, 3, 4, 4});
  evidence.push_back({{"ts", 999}, {"s", "other:ghost"}, {"a", "write"}, {"o", "other:x"}});
  ScriptedBackend backend({segment("Delivery", evidence)});
  const AnnotationResult r = annotate_phases(trace, mal_set({"other:mal"}), backend);
  EXPECT_EQ(r.coverage.unmatched_claims, 1u);
  EXPECT_EQ(r.coverage.duplicate_claims, 1u);
  EXPECT_EQ(r.coverage.covered, 5u);
}

TEST(AnnotateTest, WindowsStitchAcrossBoundary) {
  std::vector<Event> trace;
  for (int i = 0; i < 7; ++i) trace.push_back(make_event(other("mal"), "write", other("f"), i + 1));
  RuleOracleBackend oracle(mal_set({"other:mal"}), {{"other:mal", KillChainPhase::kInstallation}});
  const AnnotationResult r = annotate_phases(trace, mal_set({"other:mal"}), oracle, {.max_retries = 2, .window = 3});
  ASSERT_EQ(r.sequences.size(), 1u);
  EXPECT_EQ(r.sequences[0].events, trace);
  EXPECT_EQ(r.coverage.coverage(), 1.0);
}

TEST(AnnotateTest, EmptyTraceRejected) {
  ScriptedBackend backend({});
  EXPECT_EQ(code_of([&] { annotate_phases({}, mal_set({}), backend); }), ErrorCode::kSpecInvalid);
}

std::vector<AnnotatedSequence> one_sequence(std::size_t n, const std::string& scenario = "scn") {
  AnnotatedSequence seq;
  seq.meta.phase = KillChainPhase::kExploitation;
  seq.meta.behavior = "b";
  seq.scenario_id = scenario;
  for (std::size_t i = 0; i < n; ++i) {
    seq.events.push_back(make_event(other("m"), "write", other("f" + std::to_string(i)), static_cast<std::int64_t>(i)));
  }
  return {seq};
}

TEST(ChunkTest, UnitCountsFollowChunkSize) {
  const LocalHashEmbedder embedder(32);
  EXPECT_EQ(chunk_and_embed(one_sequence(45), embedder, 20).size(), 3u);
  EXPECT_EQ(chunk_and_embed(one_sequence(1), embedder, 20).size(), 1u);
  EXPECT_EQ(code_of([&] { chunk_and_embed(one_sequence(3), embedder, 0); }), ErrorCode::kConfigInvalid);
  const auto units = chunk_and_embed(one_sequence(45), embedder, 20, Platform::kLinux);
  for (const auto& u : units) {
    EXPECT_EQ(u.meta.phase, KillChainPhase::kExploitation);
    EXPECT_EQ(u.platform, Platform::kLinux);
    EXPECT_EQ(u.vector, embedder.embed(serialize_sequence(u.events)));
    EXPECT_EQ(u.unit_id, unit_id_for("scn", serialize_sequence(u.events)));
  }
}

TEST(ChunkTest, IdenticalChunksGetDistinctIds) {
  AnnotatedSequence seq = one_sequence(1)[0];
  seq.events.push_back(seq.events[0]);
  seq.events[1].timestamp = 50;
  const auto units = chunk_and_embed({seq}, LocalHashEmbedder(16), 1);
  ASSERT_EQ(units.size(), 2u);
  EXPECT_NE(units[0].unit_id, units[1].unit_id);
  EXPECT_EQ(units[1].unit_id, unit_id_for("scn", serialize_sequence(units[1].events), 1));
}

TEST(ChunkTest, UnitIdIsSixteenHexDigits) {
  const std::string id = unit_id_for("s", "x");
  EXPECT_EQ(id.size(), 16u);
  EXPECT_EQ(id.find_first_not_of("0123456789abcdef"), std::string::npos);
  EXPECT_NE(unit_id_for("s", "x"), unit_id_for("t", "x"));
  EXPECT_EQ(unit_id_for("s", "x"), id);
}

class KbDirTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ananke_kb_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

KnowledgeUnit random_unit(testing::Gen& g, std::size_t dim, std::size_t i) {
  KnowledgeUnit u;
  u.unit_id = "unit" + std::to_string(i);
  u.meta.phase = kAllPhases[g.below(kAllPhases.size())];
  u.meta.behavior = "behavior \"quoted\" \xc3\xa9 " + std::to_string(g.below(100));
  u.meta.entities = {"process:x.exe#" + std::to_string(g.below(9)), "file:/tmp/y"};
  u.meta.neighbors = {"Delivery", ""};
  u.events = testing::random_log_set(g, 1 + g.below(20), 6).events;
  if (g.below(2)) u.events[0].raw_ref = "events.jsonl:7";
  u.vector = EmbeddingVector(testing::random_vector(g, dim));
  u.scenario_id = "scn" + std::to_string(g.below(3));
  u.platform = static_cast<Platform>(g.below(3));
  return u;
}

TEST_F(KbDirTest, EmptyKbRoundTrips) {
  KnowledgeBase kb;
  kb_save(kb, dir_);
  EXPECT_EQ(kb_load(dir_), kb);
}

TEST_F(KbDirTest, RandomUnitsRoundTripExactly) {
  testing::Gen g(42);
  KnowledgeBase kb;
  kb.embedder_id = "local-hash-v1-24";
  kb.dimension = 24;
  kb.scenarios = {"scn0", "scn1", "scn2"};
  std::vector<KnowledgeUnit> units;
  for (std::size_t i = 0; i < 100; ++i) units.push_back(random_unit(g, 24, i));
  kb.append(units);
  kb_save(kb, dir_);
  const KnowledgeBase back = kb_load(dir_);
  EXPECT_EQ(back, kb);
  EXPECT_EQ(back.units()[17], units[17]);
}

TEST_F(KbDirTest, VersionMismatchAndMissingDir) {
  KnowledgeBase kb;
  kb_save(kb, dir_);
  json manifest = json::parse(std::ifstream(dir_ / "manifest.json"));
  manifest["format_version"] = "v999";
  std::ofstream(dir_ / "manifest.json") << manifest.dump();
  EXPECT_EQ(code_of([&] { kb_load(dir_); }), ErrorCode::kFormatVersionMismatch);
  EXPECT_EQ(code_of([&] { kb_load(dir_ / "absent"); }), ErrorCode::kIo);
}

TEST(KnowledgeBaseTest, AppendValidatesBeforeWriting) {
  testing::Gen g(43);
  KnowledgeBase kb;
  kb.dimension = 8;
  kb.append({random_unit(g, 8, 1)});
  EXPECT_EQ(code_of([&] { kb.append({random_unit(g, 8, 2), random_unit(g, 8, 1)}); }), ErrorCode::kDuplicateUnit);
  EXPECT_EQ(code_of([&] { kb.append({random_unit(g, 8, 3), random_unit(g, 9, 4)}); }), ErrorCode::kDimensionMismatch);
  EXPECT_EQ(kb.size(), 1u);
  EXPECT_EQ(code_of([&] { kb.unit("nope"); }), ErrorCode::kUnknownUnit);
  EXPECT_EQ(kb.find("unit1"), &kb.units()[0]);
}

TEST(KnowledgeBaseTest, PlatformSimilarityMeans) {
  KnowledgeBase kb;
  EXPECT_FALSE(platform_similarity(kb).gap());
  auto unit = [](const std::string& id, std::vector<float> v, Platform p) {
    KnowledgeUnit u;
    u.unit_id = id;
    u.vector = EmbeddingVector(std::move(v));
    u.platform = p;
    return u;
  };
  kb.append({unit("w1", {1, 0}, Platform::kWindows), unit("w2", {2, 0}, Platform::kWindows),
             unit("l1", {0, 1}, Platform::kLinux)});
  const PlatformSimilarity ps = platform_similarity(kb);
  EXPECT_EQ(ps.within_pairs, 1u);
  EXPECT_EQ(ps.cross_pairs, 2u);
  EXPECT_DOUBLE_EQ(*ps.within, 1.0);
  EXPECT_DOUBLE_EQ(*ps.cross, 0.0);
  EXPECT_DOUBLE_EQ(*ps.gap(), 1.0);
}

// Three malicious entities, each hinted to a different phase.
struct Labeled {
  LogSet log;
  MaliciousEntitySet mal;
  std::map<std::string, KillChainPhase> hints;
};

Labeled labeled(testing::Gen& g, const std::string& id) {
  Labeled out;
  out.log = testing::random_log_set(g, 400, 40);
  out.log.platform = Platform::kWindows;
  const auto keys = testing::distinct_keys(out.log);
  const KillChainPhase phases[] = {KillChainPhase::kDelivery, KillChainPhase::kInstallation,
                                   KillChainPhase::kCommandAndControl};
  for (int i = 0; i < 3; ++i) {
    const std::string& k = keys[g.below(keys.size())];
    out.mal.keys.insert(k);
    out.hints[k] = phases[i];
  }
  out.mal.scenario_id = id;
  return out;
}

TEST(KbAddScenarioTest, AppendOnlyAndDuplicateRejected) {
  testing::Gen g(44);
  const LocalHashEmbedder embedder(64);
  KnowledgeBase kb;
  std::size_t expected = 0;
  std::vector<KnowledgeUnit> before;
  for (const char* id : {"a", "b", "c"}) {
    Labeled l = labeled(g, id);
    RuleOracleBackend oracle(l.mal, l.hints);
    const ScenarioBuildReport rep = kb_add_scenario(kb, l.log, l.mal, oracle, embedder);
    expected += rep.units_added;
    EXPECT_EQ(rep.trace_events, extract_trace(l.log, l.mal).size());
    EXPECT_EQ(rep.annotation.coverage.coverage(), 1.0);
    EXPECT_EQ(kb.size(), expected);
    for (std::size_t i = 0; i < before.size(); ++i) EXPECT_EQ(kb.units()[i], before[i]);
    before = kb.units();
    EXPECT_EQ(kb.units().back().platform, Platform::kWindows);
    EXPECT_EQ(kb.units().back().scenario_id, id);
  }
  EXPECT_EQ(kb.scenarios, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(kb.embedder_id, embedder.id());
  EXPECT_EQ(kb.dimension, 64u);

  Labeled again = labeled(g, "b");
  RuleOracleBackend oracle(again.mal, again.hints);
  EXPECT_EQ(code_of([&] { kb_add_scenario(kb, again.log, again.mal, oracle, embedder); }),
            ErrorCode::kDuplicateScenario);
  again.mal.scenario_id = "d";
  EXPECT_EQ(code_of([&] { kb_add_scenario(kb, again.log, again.mal, oracle, LocalHashEmbedder(32)); }),
            ErrorCode::kConfigInvalid);
  again.mal.keys = {"other:not-present"};
  EXPECT_EQ(code_of([&] { kb_add_scenario(kb, again.log, again.mal, oracle, embedder); }), ErrorCode::kSpecInvalid);
  EXPECT_EQ(kb.size(), expected);
}

TEST(RetrievalTest, UnitRetrievesItself) {
  testing::Gen g(45);
  const LocalHashEmbedder embedder(256);
  KnowledgeBase kb;
  for (const char* id : {"a", "b"}) {
    Labeled l = labeled(g, id);
    RuleOracleBackend oracle(l.mal, l.hints);
    kb_add_scenario(kb, l.log, l.mal, oracle, embedder);
  }
  for (Metric m : {Metric::kCosine, Metric::kInnerProduct, Metric::kEuclidean}) {
    const VectorIndex index = kb.build_index(m);
    for (const auto& unit : kb.units()) {
      ContextSequence seq;
      seq.events = unit.events;
      const auto hits = threat_retrieve(index, kb, seq, embedder, 1);
      ASSERT_EQ(hits.size(), 1u);
      // Another unit can only win a tie if it serializes identically.
      if (hits[0].unit->unit_id != unit.unit_id) {
        EXPECT_EQ(hits[0].unit->vector, unit.vector);
      }
    }
  }
}

TEST(RetrievalTest, EmptyQueryReturnsSmallestIdUnderCosine) {
  testing::Gen g(46);
  const LocalHashEmbedder embedder(64);
  KnowledgeBase kb;
  Labeled l = labeled(g, "a");
  RuleOracleBackend oracle(l.mal, l.hints);
  kb_add_scenario(kb, l.log, l.mal, oracle, embedder);
  std::string smallest = kb.units()[0].unit_id;
  for (const auto& u : kb.units()) smallest = std::min(smallest, u.unit_id);
  const auto hits = threat_retrieve(kb.build_index(Metric::kCosine), kb, ContextSequence{}, embedder, 1);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].unit->unit_id, smallest);
  EXPECT_EQ(hits[0].score, 0.0);
}

TEST(RetrievalTest, EmptyKbIsAnError) {
  KnowledgeBase kb;
  kb.dimension = 8;
  const LocalHashEmbedder embedder(8);
  EXPECT_EQ(code_of([&] { threat_retrieve(kb.build_index(Metric::kCosine), kb, ContextSequence{}, embedder); }),
            ErrorCode::kEmptyIndex);
}

}  // namespace
}  // namespace ananke
