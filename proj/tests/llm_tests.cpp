/* Copyright (c) 2026 The Ananke Authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */

#include <gtest/gtest.h>
#include <httplib.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>

#include "ananke/llm.hpp"
#include "oracles.hpp"

namespace ananke {
namespace {

using nlohmann::json;
using testing::code_of;
using testing::make_event;

TEST(TemplateTest, ShippedTemplatesHaveExpectedSlots) {
  EXPECT_EQ(placeholders(prompt_template(TemplateName::kReasoning).body),
            (std::vector<std::string>{"payload", "detected", "sequence", "summary", "augmentation_knowledge"}));
  EXPECT_EQ(placeholders(prompt_template(TemplateName::kKill).body),
            (std::vector<std::string>{"malicious_entities", "previous_window", "sequences"}));
  EXPECT_EQ(placeholders(prompt_template(TemplateName::kGen).body),
            (std::vector<std::string>{"reasoning_cache", "detected", "summary"}));
  for (TemplateName n : {TemplateName::kKill, TemplateName::kReasoning, TemplateName::kGen}) {
    EXPECT_EQ(prompt_template(n).version, 1);
    EXPECT_FALSE(prompt_template(n).system.empty());
  }
}

TEST(TemplateTest, RenderFillsEverySlot) {
  const RenderedPrompt p = render(prompt_template(TemplateName::kReasoning),
                                  {{"payload", "P"}, {"detected", "D"}, {"sequence", "S"},
                                   {"summary", "None"}, {"augmentation_knowledge", "K"}, {"unused", "x"}});
  EXPECT_EQ(p.user.find("{{"), std::string::npos);
  EXPECT_EQ(extract_block(p.user, "sequence"), "S");
  EXPECT_EQ(extract_block(p.user, "augmentation_knowledge"), "K");
}

TEST(TemplateTest, ExtractBlockSkipsProseMentions) {
  EXPECT_EQ(extract_block("each line in <x> is a triple\n<x>\nbody\n</x>", "x"), "body");
  EXPECT_FALSE(extract_block("<x> never closed", "x"));
}

TEST(TemplateTest, MissingSlotNamesIt) {
  try {
    render(prompt_template(TemplateName::kReasoning),
           {{"payload", "P"}, {"detected", "D"}, {"sequence", "S"}, {"augmentation_knowledge", "K"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingPlaceholder);
    EXPECT_NE(std::string(e.what()).find("summary"), std::string::npos);
  }
}

TEST(TemplateTest, BoundValuesAreNotRescanned) {
  EXPECT_EQ(render_text("a {{x}} b {{y}}", {{"x", "{{y}}"}, {"y", "{\"k\": 1}"}}), "a {{y}} b {\"k\": 1}");
  EXPECT_EQ(render_text("{ single } braces", {}), "{ single } braces");
}

TEST(TemplateTest, ParseTemplateSource) {
  const PromptTemplate t =
      parse_template_source(TemplateName::kGen, "# template: p_gen\n# version: 3\n--- system\nS {{a}}\n--- user\nU {{b}}\n");
  EXPECT_EQ(t.version, 3);
  EXPECT_EQ(render(t, {{"a", "1"}, {"b", "2"}}).system, "S 1");
  EXPECT_EQ(render(t, {{"a", "1"}, {"b", "2"}}).user, "U 2");
}

TEST(ParseReasoningTest, FencedArrayWithProse) {
  const std::string raw =
      "Here is my analysis.\n```json\n[{\"malicious_entities\": [{\"name\": \"Evil.EXE\", \"kind\": \"Process\", "
      "\"pid\": 7}, \"file:/tmp/x\"], \"benign_entities\": [\"explorer.exe\"], \"behaviors\": [\"drops x\"], "
      "\"summary\": \"s1\"}]\n```\nDone.";
  const ReasoningResponse r = parse_reasoning(raw);
  EXPECT_EQ(r.malicious_entities, (std::vector<std::string>{"process:evil.exe#7", "file:/tmp/x"}));
  EXPECT_EQ(r.benign_entities, std::vector<std::string>{"other:explorer.exe"});
  EXPECT_EQ(r.behaviors, std::vector<std::string>{"drops x"});
  EXPECT_EQ(r.summary, "s1");
}

TEST(ParseReasoningTest, NoJsonAndSchemaErrors) {
  EXPECT_EQ(code_of([] { parse_reasoning("I could not decide."); }), ErrorCode::kNoJsonFound);
  EXPECT_EQ(code_of([] { parse_reasoning("{\"summary\": \"x\"}"); }), ErrorCode::kSchemaViolation);
  EXPECT_EQ(code_of([] { parse_reasoning("[]"); }), ErrorCode::kSchemaViolation);
  EXPECT_EQ(code_of([] { parse_reasoning("{\"malicious_entities\": [\"\"]}"); }), ErrorCode::kSchemaViolation);
}

TEST(ParseReasoningTest, MaliciousWinsConflicts) {
  const ReasoningResponse r = parse_reasoning(
      R"([{"malicious_entities": ["file:/a"], "benign_entities": ["file:/a", "file:/b"], "summary": "one"},
          {"malicious_entities": [], "summary": ""}])");
  EXPECT_EQ(r.malicious_entities, std::vector<std::string>{"file:/a"});
  EXPECT_EQ(r.benign_entities, std::vector<std::string>{"file:/b"});
  EXPECT_EQ(r.conflicts, std::vector<std::string>{"file:/a"});
  EXPECT_EQ(r.summary, "one");
  EXPECT_EQ(reasoning_from_json(to_json(r)), r);
}

TEST(ParseReasoningTest, SkipsBracesThatAreNotJson) {
  EXPECT_EQ(extract_first_json("set {a, b} then {\"malicious_entities\": []}"),
            json::parse("{\"malicious_entities\": []}"));
}

TEST(UsageTest, ArithmeticAndJson) {
  const TokenUsage a{10, 2, 3}, b{1, 1, 1};
  EXPECT_EQ((a + b).total(), 18);
  EXPECT_EQ(usage_from_json(to_json(a)), a);
  EXPECT_TRUE(a.valid());
  EXPECT_FALSE((TokenUsage{-1, 0, 0}).valid());
}

TEST(UsageTest, FromOpenAiShapes) {
  const TokenUsage u = HttpChatBackend::usage_from_response(json::parse(
      R"({"usage": {"prompt_tokens": 100, "completion_tokens": 40, "completion_tokens_details": {"reasoning_tokens": 25}}})"));
  EXPECT_EQ(u, (TokenUsage{100, 25, 15}));
  EXPECT_EQ(HttpChatBackend::usage_from_response(json::object()), TokenUsage{});
  // Reasoning can never exceed completion.
  const TokenUsage v = HttpChatBackend::usage_from_response(
      json::parse(R"({"usage": {"prompt_tokens": 5, "completion_tokens": 3, "reasoning_tokens": 9}})"));
  EXPECT_EQ(v, (TokenUsage{5, 3, 0}));
}

// Local OpenAI-compatible stub. `fail_first` requests answer with `fail_status`.
class StubServer {
 public:
  StubServer(int fail_status, int fail_first) : fail_status_(fail_status), fail_first_(fail_first) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      const int n = calls_++;
      if (n < fail_first_) {
        res.status = fail_status_;
        res.set_content("busy", "text/plain");
        return;
      }
      const json body = json::parse(req.body);
      const std::string echo = body["messages"][1]["content"].get<std::string>();
      res.set_content(json({{"choices", {{{"message", {{"content", "echo:" + echo}}}}}},
                            {"usage", {{"prompt_tokens", 7}, {"completion_tokens", 3}}}})
                          .dump(),
                      "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }

  HttpBackendConfig config() const {
    HttpBackendConfig c;
    c.base_url = "http://127.0.0.1:" + std::to_string(port_) + "/v1";
    c.model = "stub";
    c.backoff_initial = std::chrono::milliseconds(1);
    c.timeout = std::chrono::milliseconds(5000);
    return c;
  }
  int calls() const { return calls_; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  int fail_status_;
  int fail_first_;
  std::atomic<int> calls_{0};
};

TEST(HttpBackendTest, EchoesUserPrompt) {
  StubServer stub(500, 0);
  HttpChatBackend backend(stub.config());
  const Completion c = backend.complete("sys", "hello");
  EXPECT_EQ(c.text, "echo:hello");
  EXPECT_EQ(c.usage, (TokenUsage{7, 0, 3}));
  EXPECT_EQ(c.retries, 0);
}

TEST(HttpBackendTest, RetriesRateLimit) {
  StubServer stub(429, 2);
  HttpChatBackend backend(stub.config());
  const Completion c = backend.complete("sys", "x");
  EXPECT_EQ(c.retries, 2);
  EXPECT_EQ(stub.calls(), 3);
}

TEST(HttpBackendTest, GivesUpAfterMaxRetries) {
  StubServer stub(500, 4);
  HttpChatBackend backend(stub.config());
  EXPECT_EQ(code_of([&] { backend.complete("sys", "x"); }), ErrorCode::kLlmTransport);
  EXPECT_EQ(stub.calls(), 4);
}

TEST(HttpBackendTest, ClientErrorIsNotRetried) {
  StubServer stub(400, 1);
  HttpChatBackend backend(stub.config());
  EXPECT_EQ(code_of([&] { backend.complete("sys", "x"); }), ErrorCode::kLlmTransport);
  EXPECT_EQ(stub.calls(), 1);
}

TEST(HttpBackendTest, UnreachableServerIsTransportError) {
  HttpBackendConfig c;
  c.base_url = "http://127.0.0.1:1/v1";
  c.max_retries = 0;
  c.timeout = std::chrono::milliseconds(2000);
  HttpChatBackend backend(c);
  const auto code = code_of([&] { backend.complete("s", "u"); });
  ASSERT_TRUE(code);
  EXPECT_TRUE(*code == ErrorCode::kLlmTransport || *code == ErrorCode::kLlmTimeout);
}

class CountingBackend final : public LlmBackend {
 public:
  std::string id() const override { return "counting"; }
  Completion complete(const std::string& s, const std::string& u) override {
    ++calls;
    return {"reply(" + s + "|" + u + ")", {3, 1, 2}, 0};
  }
  int calls = 0;
};

TEST(CassetteTest, RecordThenReplayInAnyOrder) {
  const auto path = std::filesystem::temp_directory_path() / "ananke_cassette_test.jsonl";
  std::filesystem::remove(path);
  auto inner = std::make_shared<CountingBackend>();
  {
    CassetteBackend rec(path, CassetteMode::kRecord, inner);
    for (int i = 0; i < 5; ++i) rec.complete("s", "u" + std::to_string(i));
    EXPECT_EQ(rec.size(), 5u);
  }
  EXPECT_EQ(inner->calls, 5);
  CassetteBackend replay(path, CassetteMode::kReplay);
  for (int i = 4; i >= 0; --i) {
    const Completion c = replay.complete("s", "u" + std::to_string(i));
    EXPECT_EQ(c.text, "reply(s|u" + std::to_string(i) + ")");
    EXPECT_EQ(c.usage, (TokenUsage{3, 1, 2}));
  }
  EXPECT_EQ(code_of([&] { replay.complete("s", "never recorded"); }), ErrorCode::kCassetteMiss);
  EXPECT_EQ(inner->calls, 5);
  std::filesystem::remove(path);
}

TEST(CassetteTest, RequestHashSeparatesSystemAndUser) {
  EXPECT_NE(request_hash("ab", "c"), request_hash("a", "bc"));
  EXPECT_EQ(request_hash("a", "b").size(), 64u);
}

std::string reasoning_prompt(const std::vector<Event>& seq) {
  return render(prompt_template(TemplateName::kReasoning),
                {{"payload", "alert"}, {"detected", ""}, {"sequence", render_event_lines(seq)},
                 {"summary", "None"}, {"augmentation_knowledge", "none"}})
      .user;
}

TEST(RuleOracleTest, MarksExactlyLexiconEntities) {
  const Event e = make_event(testing::other("a"), "write", testing::other("b"), 1);
  RuleOracleBackend oracle({{"other:b"}, "x"}, {});
  const ReasoningResponse r = parse_reasoning(oracle.complete("sys", reasoning_prompt({e})).text);
  EXPECT_EQ(r.malicious_entities, std::vector<std::string>{"other:b"});
  EXPECT_EQ(r.benign_entities, std::vector<std::string>{"other:a"});

  RuleOracleBackend empty({{}, "x"}, {});
  const ReasoningResponse none = parse_reasoning(empty.complete("sys", reasoning_prompt({e})).text);
  EXPECT_TRUE(none.malicious_entities.empty());
  EXPECT_EQ(none.benign_entities.size(), 2u);
}

TEST(RuleOracleTest, UsageCountsWords) {
  RuleOracleBackend oracle({{}, "x"}, {});
  const Completion c = oracle.complete("one two", reasoning_prompt({}));
  EXPECT_EQ(c.usage.prompt_tokens, 2 + RuleOracleBackend::count_words(reasoning_prompt({})));
  EXPECT_EQ(c.usage.answer_tokens, RuleOracleBackend::count_words(c.text));
  EXPECT_EQ(c.usage.reasoning_tokens, 0);
  EXPECT_EQ(code_of([&] { oracle.complete("s", "no blocks here"); }), ErrorCode::kPromptShapeUnrecognized);
}

TEST(RuleOracleTest, AnnotationFollowsPhaseHints) {
  std::vector<Event> trace;
  const char* names[] = {"d", "e", "c"};
  for (int i = 0; i < 9; ++i) {
    trace.push_back(make_event(testing::other("root"), "write", testing::other(names[i / 3]), i + 1));
  }
  RuleOracleBackend oracle({{"other:root", "other:d", "other:e", "other:c"}, "x"},
                           {{"other:d", KillChainPhase::kDelivery},
                            {"other:e", KillChainPhase::kExploitation},
                            {"other:c", KillChainPhase::kCommandAndControl}});
  const std::string user = render(prompt_template(TemplateName::kKill),
                                  {{"malicious_entities", "x"}, {"previous_window", "none"},
                                   {"sequences", render_event_lines(trace)}})
                               .user;
  const json out = extract_first_json(oracle.complete("s", user).text);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(parse_phase(out[0]["phase"].get<std::string>()), KillChainPhase::kDelivery);
  EXPECT_EQ(parse_phase(out[1]["phase"].get<std::string>()), KillChainPhase::kExploitation);
  EXPECT_EQ(parse_phase(out[2]["phase"].get<std::string>()), KillChainPhase::kCommandAndControl);
  for (const auto& seg : out) EXPECT_EQ(seg["evidence_set"].size(), 3u);
}

TEST(RuleOracleTest, NarrativeDigestListsPhasesInOrder) {
  const json timeline = json::parse(
      R"([{"phase": "Delivery", "entities": ["a"]}, {"phase": "Delivery", "entities": ["b"]},
          {"phase": "Installation", "entities": ["a"]}])");
  EXPECT_EQ(RuleOracleBackend::narrative_digest(timeline),
            "Attack narrative digest\nPhases: Delivery -> Installation\nSteps: 3\nEntities: a, b");
}

}  // namespace
}  // namespace ananke
