/* Copyright (c) 2026 The Ananke Authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */

#include <httplib.h>

#include <algorithm>
#include <thread>

#include "ananke/llm.hpp"

namespace ananke {

using nlohmann::json;

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path prefix without trailing slash
};

Endpoint split_url(const std::string& base_url) {
  const auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kConfigInvalid, "LLM base_url must include a scheme: " + base_url);
  }
  const auto path_start = base_url.find('/', scheme_end + 3);
  Endpoint ep;
  ep.origin = base_url.substr(0, path_start);
  ep.prefix = path_start == std::string::npos ? "" : base_url.substr(path_start);
  while (!ep.prefix.empty() && ep.prefix.back() == '/') ep.prefix.pop_back();
  return ep;
}

std::string excerpt(const std::string& body) {
  constexpr std::size_t kMax = 200;
  return body.size() <= kMax ? body : body.substr(0, kMax) + "...";
}

struct PostResult {
  json body;
  int retries = 0;
};

// POST with bounded exponential backoff on 429/5xx.
PostResult post_json(const HttpBackendConfig& config, const std::string& route, const json& payload) {
  const Endpoint ep = split_url(config.base_url);
  httplib::Client client(ep.origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (!config.api_key.empty()) headers.emplace("Authorization", "Bearer " + config.api_key);

  const std::string path = ep.prefix + route;
  const std::string request_body = payload.dump();
  auto delay = config.backoff_initial;
  for (int attempt = 0;; ++attempt) {
    auto res = client.Post(path, headers, request_body, "application/json");
    if (!res) {
      const auto err = res.error();
      if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read) {
        throw Error(ErrorCode::kLlmTimeout, "request to " + ep.origin + path + " timed out");
      }
      throw Error(ErrorCode::kLlmTransport, "request to " + ep.origin + path +
                                                " failed: " + httplib::to_string(err));
    }
    const bool retryable = res->status == 429 || res->status >= 500;
    if (retryable && attempt < config.max_retries) {
      std::this_thread::sleep_for(delay);
      delay = std::min(delay * 2, std::chrono::milliseconds(30000));
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      throw Error(ErrorCode::kLlmTransport,
                  "status " + std::to_string(res->status) + ": " + excerpt(res->body));
    }
    json body = json::parse(res->body, nullptr, /*allow_exceptions=*/false);
    if (body.is_discarded()) {
      throw Error(ErrorCode::kLlmTransport, "response is not JSON: " + excerpt(res->body));
    }
    return {std::move(body), attempt};
  }
}

}  // namespace

HttpChatBackend::HttpChatBackend(HttpBackendConfig config) : config_(std::move(config)) {
  split_url(config_.base_url);
}

std::string HttpChatBackend::id() const { return "openai-compatible:" + config_.model; }

json HttpChatBackend::build_request(const std::string& system_prompt,
                                    const std::string& user_prompt) const {
  return {{"model", config_.model},
          {"messages",
           json::array({{{"role", "system"}, {"content", system_prompt}},
                        {{"role", "user"}, {"content", user_prompt}}})},
          {"temperature", config_.temperature}};
}

TokenUsage HttpChatBackend::usage_from_response(const json& body) {
  TokenUsage usage;
  auto it = body.find("usage");
  if (it == body.end() || !it->is_object()) return usage;
  const json& u = *it;
  usage.prompt_tokens = u.value("prompt_tokens", std::int64_t{0});
  const std::int64_t completion = u.value("completion_tokens", std::int64_t{0});
  std::int64_t reasoning = 0;
  if (auto d = u.find("completion_tokens_details"); d != u.end() && d->is_object()) {
    reasoning = d->value("reasoning_tokens", std::int64_t{0});
  } else if (u.contains("reasoning_tokens")) {
    reasoning = u.value("reasoning_tokens", std::int64_t{0});
  }
  reasoning = std::clamp<std::int64_t>(reasoning, 0, std::max<std::int64_t>(completion, 0));
  usage.reasoning_tokens = reasoning;
  usage.answer_tokens = std::max<std::int64_t>(completion - reasoning, 0);
  usage.prompt_tokens = std::max<std::int64_t>(usage.prompt_tokens, 0);
  return usage;
}

Completion HttpChatBackend::complete(const std::string& system_prompt, const std::string& user_prompt) {
  PostResult result = post_json(config_, "/chat/completions", build_request(system_prompt, user_prompt));
  const json& body = result.body;
  auto choices = body.find("choices");
  if (choices == body.end() || !choices->is_array() || choices->empty()) {
    throw Error(ErrorCode::kLlmTransport, "response has no choices");
  }
  const json& message = (*choices)[0].value("message", json::object());
  auto content = message.find("content");
  if (content == message.end() || !content->is_string()) {
    throw Error(ErrorCode::kLlmTransport, "response choice has no text content");
  }
  return {content->get<std::string>(), usage_from_response(body), result.retries};
}

HttpEmbedder::HttpEmbedder(HttpBackendConfig config, std::size_t dim)
    : config_(std::move(config)), dim_(dim) {
  split_url(config_.base_url);
}

std::string HttpEmbedder::id() const { return "openai-compatible-embedding:" + config_.model; }

EmbeddingVector HttpEmbedder::embed(std::string_view text) const {
  PostResult result;
  try {
    result = post_json(config_, "/embeddings", {{"model", config_.model}, {"input", std::string(text)}});
  } catch (const Error& e) {
    throw Error(ErrorCode::kEmbedder, e.what());
  }
  const json& body = result.body;
  auto data = body.find("data");
  if (data == body.end() || !data->is_array() || data->empty() || !(*data)[0].contains("embedding")) {
    throw Error(ErrorCode::kEmbedder, "embedding response has no data[0].embedding");
  }
  std::vector<float> values = (*data)[0]["embedding"].get<std::vector<float>>();
  if (values.size() != dim_) {
    throw Error(ErrorCode::kEmbedder, "expected dimension " + std::to_string(dim_) + ", got " +
                                          std::to_string(values.size()));
  }
  return EmbeddingVector(std::move(values));
}

}  // namespace ananke
