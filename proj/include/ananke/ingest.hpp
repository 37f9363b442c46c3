/* Copyright (c) 2026 The Ananke Authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ananke/model.hpp"

namespace ananke {

enum class LogFormat { kJsonEvent, kCsvTriple };

enum class Platform { kWindows, kLinux, kOther };

std::string_view to_string(Platform platform);
Platform parse_platform(std::string_view text);  // unknown -> kOther

struct ParseOptions {
  // When false, process pids are dropped and instances of one binary share a node.
  bool qualify_process_pid = true;
};

struct SkippedLine {
  std::string file;
  std::int64_t line_no = 0;
  std::string reason;

  friend bool operator==(const SkippedLine&, const SkippedLine&) = default;
};

struct LogSet {
  std::vector<Event> events;  // sorted by (timestamp, seq_no)
  std::string host_id;
  std::vector<std::string> source_files;
  Platform platform = Platform::kOther;
  std::vector<SkippedLine> skipped;  // non-strict loads only

  friend bool operator==(const LogSet&, const LogSet&) = default;
};

/// Parses one record. seq_no is set to line_no. Throws MalformedLine.
Event parse_line(std::string_view line, LogFormat format, std::int64_t line_no,
                 const ParseOptions& options = {});

/// Reads, parses and merges the given files into one sorted LogSet.
///
/// seq_no is made unique across the whole set: files are numbered in the
/// order given and each event gets `file_offset + line_no`, so equal
/// timestamps keep input order. Blank lines are ignored. In non-strict mode
/// malformed lines are recorded in `skipped`; in strict mode the first one
/// is rethrown. Files are parsed concurrently; the result is identical to a
/// sequential parse.
LogSet load_log_set(const std::vector<std::filesystem::path>& paths, LogFormat format,
                    bool strict = false, const ParseOptions& options = {});

// Every *.jsonl (JsonEvent) or *.csv (CsvTriple) file in a directory, sorted by name.
LogSet load_log_dir(const std::filesystem::path& dir, bool strict = false,
                    const ParseOptions& options = {});

// JsonEvent encoding of one event (raw names and pids, not canonical keys).
nlohmann::json event_to_json(const Event& event);
std::string to_json_line(const Event& event);
std::string to_csv_line(const Event& event);
void write_json_events(const std::filesystem::path& path, const std::vector<Event>& events);

// Sort by (timestamp, seq_no); stable so equal keys keep their order.
void sort_events(std::vector<Event>& events);

}  // namespace ananke
