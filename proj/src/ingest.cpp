/* Copyright (c) 2026 The Ananke Authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */

#include "ananke/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <future>
#include <set>
#include <sstream>

namespace ananke {

using nlohmann::json;

std::string_view to_string(Platform platform) {
  switch (platform) {
    case Platform::kWindows: return "Windows";
    case Platform::kLinux: return "Linux";
    case Platform::kOther: return "Other";
  }
  return "Other";
}

Platform parse_platform(std::string_view text) {
  const std::string lower = to_lower(trim(text));
  if (lower == "windows") return Platform::kWindows;
  if (lower == "linux") return Platform::kLinux;
  return Platform::kOther;
}

namespace {

std::optional<std::int64_t> parse_int(std::string_view text) {
  std::string trimmed = trim(text);
  if (trimmed.empty()) return std::nullopt;
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(trimmed.data(), trimmed.data() + trimmed.size(), value);
  if (ec != std::errc() || ptr != trimmed.data() + trimmed.size()) return std::nullopt;
  return value;
}

Entity entity_from_parts(std::string_view kind, std::string name, std::optional<std::int64_t> pid,
                         const ParseOptions& options, std::int64_t line_no, const char* role) {
  const EntityKind entity_kind = parse_entity_kind(kind);
  if (!options.qualify_process_pid) pid.reset();
  try {
    return Entity::make(entity_kind, std::move(name), pid);
  } catch (const Error& e) {
    throw MalformedLine(line_no, std::string(role) + ": " + e.what());
  }
}

Entity entity_from_json(const json& j, const ParseOptions& options, std::int64_t line_no,
                        const char* role) {
  if (!j.is_object()) throw MalformedLine(line_no, std::string(role) + " is not an object");
  std::string kind = "Other";
  if (auto it = j.find("kind"); it != j.end()) {
    if (!it->is_string()) throw MalformedLine(line_no, std::string(role) + ".kind not a string");
    kind = it->get<std::string>();
  }
  auto name_it = j.find("name");
  if (name_it == j.end() || !name_it->is_string()) {
    throw MalformedLine(line_no, std::string(role) + ".name missing or not a string");
  }
  std::optional<std::int64_t> pid;
  if (auto it = j.find("pid"); it != j.end() && !it->is_null()) {
    if (!it->is_number_integer()) throw MalformedLine(line_no, std::string(role) + ".pid not an integer");
    pid = it->get<std::int64_t>();
  }
  return entity_from_parts(kind, name_it->get<std::string>(), pid, options, line_no, role);
}

std::string checked_action(std::string_view action, std::int64_t line_no) {
  std::string lowered = to_lower(trim(action));
  if (lowered.empty()) throw MalformedLine(line_no, "empty action");
  return lowered;
}

Event parse_json_event(std::string_view line, std::int64_t line_no, const ParseOptions& options,
                       bool* explicit_seq = nullptr) {
  json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw MalformedLine(line_no, "invalid JSON");
  if (!j.is_object()) throw MalformedLine(line_no, "record is not a JSON object");

  auto ts = j.find("ts");
  if (ts == j.end() || !ts->is_number_integer()) throw MalformedLine(line_no, "ts missing or not an integer");
  const std::int64_t timestamp = ts->get<std::int64_t>();
  if (timestamp < 0) throw MalformedLine(line_no, "negative timestamp");

  auto host = j.find("host");
  if (host == j.end() || !host->is_string()) throw MalformedLine(line_no, "host missing or not a string");
  auto action = j.find("a");
  if (action == j.end() || !action->is_string()) throw MalformedLine(line_no, "a missing or not a string");
  if (!j.contains("s")) throw MalformedLine(line_no, "s missing");
  if (!j.contains("o")) throw MalformedLine(line_no, "o missing");

  Event event;
  event.subject = entity_from_json(j["s"], options, line_no, "s");
  event.action = checked_action(action->get<std::string>(), line_no);
  event.object = entity_from_json(j["o"], options, line_no, "o");
  event.timestamp = timestamp;
  event.host_id = host->get<std::string>();
  event.seq_no = line_no;
  if (auto seq = j.find("seq"); seq != j.end()) {
    if (!seq->is_number_integer()) throw MalformedLine(line_no, "seq not an integer");
    event.seq_no = seq->get<std::int64_t>();
    if (explicit_seq) *explicit_seq = true;
  }
  if (auto ref = j.find("ref"); ref != j.end() && ref->is_string()) {
    event.raw_ref = ref->get<std::string>();
  }
  return event;
}

// Minimal RFC 4180 field splitter: double-quoted fields, "" escapes.
std::optional<std::vector<std::string>> split_csv(std::string_view line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool field_was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"' && field.empty() && !field_was_quoted) {
      quoted = true;
      field_was_quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      field_was_quoted = false;
    } else if (c == '\r' && i + 1 == line.size()) {
      break;
    } else {
      field += c;
    }
  }
  if (quoted) return std::nullopt;
  fields.push_back(std::move(field));
  return fields;
}

Event parse_csv_triple(std::string_view line, std::int64_t line_no, const ParseOptions& options) {
  auto fields = split_csv(line);
  if (!fields) throw MalformedLine(line_no, "unterminated quoted field");
  if (fields->size() != 7 && fields->size() != 9) {
    throw MalformedLine(line_no, "expected 7 or 9 columns, got " + std::to_string(fields->size()));
  }
  const auto& f = *fields;
  auto ts = parse_int(f[0]);
  if (!ts) throw MalformedLine(line_no, "ts is not an integer");
  if (*ts < 0) throw MalformedLine(line_no, "negative timestamp");

  std::optional<std::int64_t> subj_pid;
  std::optional<std::int64_t> obj_pid;
  if (f.size() == 9) {
    if (!trim(f[7]).empty()) {
      subj_pid = parse_int(f[7]);
      if (!subj_pid) throw MalformedLine(line_no, "subj_pid is not an integer");
    }
    if (!trim(f[8]).empty()) {
      obj_pid = parse_int(f[8]);
      if (!obj_pid) throw MalformedLine(line_no, "obj_pid is not an integer");
    }
  }

  Event event;
  event.subject = entity_from_parts(f[2], f[3], subj_pid, options, line_no, "subject");
  event.action = checked_action(f[4], line_no);
  event.object = entity_from_parts(f[5], f[6], obj_pid, options, line_no, "object");
  event.timestamp = *ts;
  event.host_id = f[1];
  event.seq_no = line_no;
  return event;
}

struct FileParse {
  std::vector<Event> events;
  std::vector<SkippedLine> skipped;
};

FileParse parse_file(const std::filesystem::path& path, std::int64_t file_index, LogFormat format,
                     bool strict, const ParseOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  FileParse out;
  std::string line;
  std::int64_t line_no = 0;
  const std::int64_t seq_base = file_index << 32;
  const std::string file_name = path.filename().string();
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (format == LogFormat::kCsvTriple && line_no == 1 && line.rfind("ts,", 0) == 0) continue;
    try {
      bool explicit_seq = false;
      Event event = format == LogFormat::kJsonEvent
                        ? parse_json_event(line, line_no, options, &explicit_seq)
                        : parse_csv_triple(line, line_no, options);
      if (!explicit_seq) event.seq_no = seq_base + line_no;
      if (!event.raw_ref) event.raw_ref = file_name + ":" + std::to_string(line_no);
      out.events.push_back(std::move(event));
    } catch (const MalformedLine& e) {
      if (strict) throw MalformedLine(e.line_no(), path.string() + ": " + e.reason());
      out.skipped.push_back({path.string(), e.line_no(), e.reason()});
    }
  }
  if (in.bad()) throw Error(ErrorCode::kIo, "read failure on " + path.string());
  return out;
}

}  // namespace

Event parse_line(std::string_view line, LogFormat format, std::int64_t line_no,
                 const ParseOptions& options) {
  switch (format) {
    case LogFormat::kJsonEvent: return parse_json_event(line, line_no, options);
    case LogFormat::kCsvTriple: return parse_csv_triple(line, line_no, options);
  }
  throw MalformedLine(line_no, "unknown format");
}

void sort_events(std::vector<Event>& events) {
  std::stable_sort(events.begin(), events.end(), event_time_less);
}

LogSet load_log_set(const std::vector<std::filesystem::path>& paths, LogFormat format, bool strict,
                    const ParseOptions& options) {
  std::vector<std::future<FileParse>> jobs;
  jobs.reserve(paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    jobs.push_back(std::async(std::launch::async, parse_file, paths[i],
                              static_cast<std::int64_t>(i), format, strict, options));
  }

  LogSet set;
  std::set<std::string> hosts;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    FileParse parsed = jobs[i].get();
    for (auto& e : parsed.events) {
      hosts.insert(e.host_id);
      set.events.push_back(std::move(e));
    }
    for (auto& s : parsed.skipped) set.skipped.push_back(std::move(s));
    set.source_files.push_back(paths[i].string());
  }
  sort_events(set.events);
  if (hosts.size() == 1) {
    set.host_id = *hosts.begin();
  } else if (hosts.size() > 1) {
    set.host_id = "multi";
  }
  return set;
}

LogSet load_log_dir(const std::filesystem::path& dir, bool strict, const ParseOptions& options) {
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::kIo, "not a directory: " + dir.string());
  std::vector<std::filesystem::path> json_files;
  std::vector<std::filesystem::path> csv_files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension();
    if (ext == ".jsonl") json_files.push_back(entry.path());
    if (ext == ".csv") csv_files.push_back(entry.path());
  }
  std::sort(json_files.begin(), json_files.end());
  std::sort(csv_files.begin(), csv_files.end());
  if (json_files.empty() && csv_files.empty()) {
    throw Error(ErrorCode::kIo, "no .jsonl or .csv log files in " + dir.string());
  }
  if (csv_files.empty()) return load_log_set(json_files, LogFormat::kJsonEvent, strict, options);
  if (json_files.empty()) return load_log_set(csv_files, LogFormat::kCsvTriple, strict, options);

  // Mixed directory: CSV files get seq offsets after the JSON ones.
  LogSet merged = load_log_set(json_files, LogFormat::kJsonEvent, strict, options);
  LogSet csv = load_log_set(csv_files, LogFormat::kCsvTriple, strict, options);
  const std::int64_t shift = static_cast<std::int64_t>(json_files.size()) << 32;
  for (auto& e : csv.events) {
    e.seq_no += shift;
    merged.events.push_back(std::move(e));
  }
  for (auto& s : csv.skipped) merged.skipped.push_back(std::move(s));
  for (auto& f : csv.source_files) merged.source_files.push_back(std::move(f));
  if (merged.host_id != csv.host_id) merged.host_id = "multi";
  sort_events(merged.events);
  return merged;
}

namespace {

json entity_to_json(const Entity& entity) {
  json j = {{"kind", std::string(to_string(entity.kind))}, {"name", entity.raw_name}};
  if (entity.pid) j["pid"] = *entity.pid;
  return j;
}

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\n") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

json event_to_json(const Event& event) {
  json j = {{"ts", event.timestamp},
            {"host", event.host_id},
            {"s", entity_to_json(event.subject)},
            {"a", event.action},
            {"o", entity_to_json(event.object)},
            {"seq", event.seq_no}};
  if (event.raw_ref) j["ref"] = *event.raw_ref;
  return j;
}

std::string to_json_line(const Event& event) { return event_to_json(event).dump(); }

std::string to_csv_line(const Event& event) {
  std::ostringstream out;
  out << event.timestamp << ',' << csv_field(event.host_id) << ','
      << to_string(event.subject.kind) << ',' << csv_field(event.subject.raw_name) << ','
      << csv_field(event.action) << ',' << to_string(event.object.kind) << ','
      << csv_field(event.object.raw_name);
  if (event.subject.pid || event.object.pid) {
    out << ',' << (event.subject.pid ? std::to_string(*event.subject.pid) : "") << ','
        << (event.object.pid ? std::to_string(*event.object.pid) : "");
  }
  return out.str();
}

void write_json_events(const std::filesystem::path& path, const std::vector<Event>& events) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  for (const auto& e : events) out << to_json_line(e) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failure on " + path.string());
}

}  // namespace ananke
