/* Copyright (c) 2026 The Ananke Authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */

#include <fstream>

#include "ananke/llm.hpp"

namespace ananke {

using nlohmann::json;

CassetteBackend::CassetteBackend(std::filesystem::path path, CassetteMode mode,
                                 std::shared_ptr<LlmBackend> inner)
    : path_(std::move(path)), mode_(mode), inner_(std::move(inner)) {
  if (mode_ == CassetteMode::kRecord && !inner_) {
    throw Error(ErrorCode::kConfigInvalid, "cassette record mode needs a backend to wrap");
  }
  std::ifstream in(path_);
  if (!in) {
    if (mode_ == CassetteMode::kReplay) throw Error(ErrorCode::kIo, "cannot open cassette " + path_.string());
    return;
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.contains("hash") || !j.contains("response")) {
      throw Error(ErrorCode::kIo, path_.string() + ":" + std::to_string(line_no) + ": bad cassette entry");
    }
    Completion c{j["response"].get<std::string>(), usage_from_json(j.value("usage", json::object())), 0};
    entries_.insert_or_assign(j["hash"].get<std::string>(), std::move(c));
  }
}

std::string CassetteBackend::id() const {
  return std::string(mode_ == CassetteMode::kRecord ? "cassette-record:" : "cassette-replay:") +
         path_.filename().string();
}

std::size_t CassetteBackend::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return entries_.size();
}

Completion CassetteBackend::complete(const std::string& system_prompt, const std::string& user_prompt) {
  const std::string hash = request_hash(system_prompt, user_prompt);
  if (mode_ == CassetteMode::kReplay) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = entries_.find(hash);
    if (it == entries_.end()) throw Error(ErrorCode::kCassetteMiss, hash);
    return it->second;
  }

  Completion result = inner_->complete(system_prompt, user_prompt);
  json entry = {{"hash", hash},
                {"system", system_prompt},
                {"user", user_prompt},
                {"response", result.text},
                {"usage", to_json(result.usage)}};
  std::lock_guard<std::mutex> lock(mutex_);
  std::ofstream out(path_, std::ios::app);
  if (!out) throw Error(ErrorCode::kIo, "cannot append to cassette " + path_.string());
  out << entry.dump() << '\n';
  entries_.insert_or_assign(hash, Completion{result.text, result.usage, 0});
  return result;
}

}  // namespace ananke
