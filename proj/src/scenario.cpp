/* Copyright (c) 2026 The Ananke Authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */

#include "ananke/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

namespace ananke {

using nlohmann::json;

namespace {

constexpr std::int64_t kEpochNs = 1'700'000'000LL * 1'000'000'000LL;
constexpr std::int64_t kNsPerSecond = 1'000'000'000LL;

std::int64_t parse_time_span(const json& j) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (!j.is_string()) throw Error(ErrorCode::kSpecInvalid, "time_span must be seconds or \"<n>[smhd]\"");
  const std::string text = trim(j.get<std::string>());
  if (text.empty()) throw Error(ErrorCode::kSpecInvalid, "empty time_span");
  std::int64_t unit = 1;
  std::string digits = text;
  switch (text.back()) {
    case 's': digits.pop_back(); break;
    case 'm': unit = 60; digits.pop_back(); break;
    case 'h': unit = 3600; digits.pop_back(); break;
    case 'd': unit = 86400; digits.pop_back(); break;
    default: break;
  }
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw Error(ErrorCode::kSpecInvalid, "bad time_span '" + text + "'");
  }
  return std::stoll(digits) * unit;
}

}  // namespace

std::size_t ScenarioSpec::attack_events() const {
  std::size_t n = 0;
  for (const auto& p : phases) n += p.steps;
  return n;
}

void ScenarioSpec::validate() const {
  if (phases.empty()) throw Error(ErrorCode::kSpecInvalid, "at least one phase is required");
  for (std::size_t i = 0; i < phases.size(); ++i) {
    if (phases[i].steps == 0) {
      throw Error(ErrorCode::kSpecInvalid, std::string(to_string(phases[i].phase)) + " has zero steps");
    }
    if (i > 0 && phases[i].phase <= phases[i - 1].phase) {
      throw Error(ErrorCode::kSpecInvalid, "phases must follow Kill Chain order without repeats");
    }
  }
  if (hosts == 0) throw Error(ErrorCode::kSpecInvalid, "hosts must be >= 1");
  if (time_span_s <= 0) throw Error(ErrorCode::kSpecInvalid, "time_span must be positive");
  if (malicious_entity_count != 0 &&
      (malicious_entity_count < phases.size() || malicious_entity_count > attack_events())) {
    throw Error(ErrorCode::kSpecInvalid, "malicious_entity_count must lie between the phase count (" +
                                             std::to_string(phases.size()) + ") and the step count (" +
                                             std::to_string(attack_events()) + ")");
  }
}

json to_json(const ScenarioSpec& spec) {
  json phases = json::array();
  for (const auto& p : spec.phases) phases.push_back({{"phase", std::string(to_string(p.phase))}, {"steps", p.steps}});
  json j = {{"seed", spec.seed},
            {"benign_events", spec.benign_events},
            {"phases", std::move(phases)},
            {"hosts", spec.hosts},
            {"malicious_entity_count", spec.malicious_entity_count},
            {"time_span", spec.time_span_s},
            {"platform", std::string(to_string(spec.platform))},
            {"scenario_id", spec.id()}};
  if (spec.namespace_id) j["namespace"] = *spec.namespace_id;
  return j;
}

ScenarioSpec scenario_spec_from_json(const json& j) {
  static const std::set<std::string> kKeys = {"seed", "benign_events", "phases", "hosts", "malicious_entity_count",
                                              "time_span", "platform", "namespace", "scenario_id"};
  if (!j.is_object()) throw Error(ErrorCode::kSpecInvalid, "scenario spec must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!kKeys.count(key)) throw Error(ErrorCode::kSpecInvalid, "unknown key '" + key + "'");
  }
  ScenarioSpec spec;
  try {
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.benign_events = j.value("benign_events", std::size_t{0});
    for (const auto& p : j.at("phases")) {
      spec.phases.push_back({parse_phase(p.at("phase").get<std::string>()), p.value("steps", std::size_t{1})});
    }
    spec.hosts = j.value("hosts", std::size_t{1});
    spec.malicious_entity_count = j.value("malicious_entity_count", std::size_t{0});
    if (j.contains("time_span")) spec.time_span_s = parse_time_span(j["time_span"]);
    if (j.contains("platform")) spec.platform = parse_platform(j["platform"].get<std::string>());
    if (j.contains("namespace")) spec.namespace_id = j["namespace"].get<std::uint32_t>();
    spec.scenario_id = j.value("scenario_id", std::string());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSpecInvalid, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kSpecInvalid) throw;
    throw Error(ErrorCode::kSpecInvalid, e.what());
  }
  spec.validate();
  return spec;
}

ScenarioSpec load_scenario_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kSpecInvalid, "cannot read spec " + path.string());
  json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw Error(ErrorCode::kSpecInvalid, path.string() + " is not valid JSON");
  return scenario_spec_from_json(j);
}

// ---------------------------------------------------------------------------
// Generation

namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  // Plain modulo keeps the stream identical across standard libraries.
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }
  template <typename T>
  const T& pick(const std::vector<T>& items) { return items[below(items.size())]; }
  bool chance(unsigned percent) { return below(100) < percent; }

 private:
  std::mt19937_64 engine_;
};

struct BenignWorld {
  std::vector<Entity> parents;    // spawn the attack root
  std::vector<Entity> browsers;
  std::vector<Entity> services;
  std::vector<Entity> editors;
  std::vector<Entity> spawned;    // short-lived children
  std::vector<Entity> libraries;  // also touched by attack steps
  std::vector<Entity> documents;
  std::vector<Entity> cache_files;
  std::vector<Entity> logs;
  std::vector<Entity> domains;
  std::vector<Entity> ips;
  std::vector<Entity> registry;
};

Entity proc(const std::string& name, std::int64_t pid) { return Entity::make(EntityKind::kProcess, name, pid); }

BenignWorld make_world(Platform platform, std::size_t benign_events) {
  BenignWorld w;
  const std::size_t docs = std::max<std::size_t>(4, benign_events / 250);
  const std::size_t cache = std::max<std::size_t>(4, benign_events / 100);
  const bool win = platform == Platform::kWindows;
  auto file = [](const std::string& path) { return Entity::make(EntityKind::kFile, path); };

  if (win) {
    w.parents = {proc("C:\\Windows\\explorer.exe", 1208)};
    w.browsers = {proc("C:\\Program Files\\Google\\Chrome\\Application\\chrome.exe", 2210),
                  proc("C:\\Program Files\\Google\\Chrome\\Application\\chrome.exe", 2264)};
    w.services = {proc("C:\\Windows\\System32\\svchost.exe", 412), proc("C:\\Windows\\System32\\svchost.exe", 688),
                  proc("C:\\Windows\\System32\\services.exe", 604)};
    w.editors = {proc("C:\\Program Files\\Microsoft Office\\root\\Office16\\WINWORD.EXE", 3120),
                 proc("C:\\Windows\\System32\\notepad.exe", 3388)};
    for (std::int64_t pid : {4100, 4104, 4112, 4120}) w.spawned.push_back(proc("C:\\Windows\\System32\\cmd.exe", pid));
    for (const char* dll : {"kernel32.dll", "ntdll.dll", "user32.dll", "advapi32.dll", "ws2_32.dll", "crypt32.dll"}) {
      w.libraries.push_back(file(std::string("C:\\Windows\\System32\\") + dll));
    }
    for (std::size_t i = 0; i < docs; ++i) {
      w.documents.push_back(file("C:\\Users\\alice\\Documents\\report_" + std::to_string(i) + ".docx"));
    }
    for (std::size_t i = 0; i < cache; ++i) {
      w.cache_files.push_back(
          file("C:\\Users\\alice\\AppData\\Local\\Google\\Chrome\\Cache\\f_" + std::to_string(i)));
    }
    for (const char* log : {"C:\\Windows\\Logs\\CBS\\CBS.log", "C:\\Windows\\System32\\winevt\\Logs\\System.evtx"}) {
      w.logs.push_back(file(log));
    }
    for (const char* svc : {"dnscache", "wuauserv", "bits", "eventlog"}) {
      w.registry.push_back(
          Entity::make(EntityKind::kRegistry, std::string("HKLM\\SYSTEM\\CurrentControlSet\\Services\\") + svc));
    }
  } else {
    w.parents = {proc("/usr/bin/bash", 1408)};
    w.browsers = {proc("/usr/lib/firefox/firefox", 2210), proc("/usr/bin/curl", 2264)};
    w.services = {proc("/usr/lib/systemd/systemd", 1), proc("/usr/sbin/cron", 688), proc("/usr/sbin/rsyslogd", 604)};
    w.editors = {proc("/usr/bin/vim", 3120), proc("/usr/bin/python3", 3388)};
    for (std::int64_t pid : {4100, 4104, 4112, 4120}) w.spawned.push_back(proc("/usr/bin/ls", pid));
    for (const char* lib : {"libc.so.6", "libssl.so.3", "libcrypto.so.3", "libz.so.1", "libpthread.so.0", "ld-linux-x86-64.so.2"}) {
      w.libraries.push_back(file(std::string("/usr/lib/x86_64-linux-gnu/") + lib));
    }
    for (std::size_t i = 0; i < docs; ++i) w.documents.push_back(file("/home/alice/work/report_" + std::to_string(i) + ".md"));
    for (std::size_t i = 0; i < cache; ++i) {
      w.cache_files.push_back(file("/home/alice/.cache/mozilla/firefox/entry_" + std::to_string(i)));
    }
    for (const char* log : {"/var/log/syslog", "/var/log/auth.log"}) w.logs.push_back(file(log));
    for (const char* unit : {"cron.service", "ssh.service", "rsyslog.service", "systemd-resolved.service"}) {
      w.registry.push_back(file(std::string("/etc/systemd/system/") + unit));
    }
  }
  for (const char* d : {"www.example.com", "update.vendor-cdn.com", "mail.corp.local", "news.example.org",
                        "api.weather.example"}) {
    w.domains.push_back(Entity::make(EntityKind::kDomain, d));
  }
  for (int i = 1; i <= 6; ++i) w.ips.push_back(Entity::make(EntityKind::kIpAddress, "93.184.216." + std::to_string(i)));
  for (int i = 1; i <= 4; ++i) w.ips.push_back(Entity::make(EntityKind::kIpAddress, "10.0.0." + std::to_string(i)));
  return w;
}

struct Draft {
  Entity subject;
  std::string action;
  Entity object;
  std::int64_t offset_ns;
  std::string host;
};

Draft benign_event(Rng& rng, const BenignWorld& w, std::int64_t offset, const std::string& host) {
  switch (rng.below(6)) {
    case 0: {
      const Entity& b = rng.pick(w.browsers);
      if (rng.chance(50)) return {b, "connect", rng.pick(w.domains), offset, host};
      if (rng.chance(50)) return {b, "connect", rng.pick(w.ips), offset, host};
      return {b, "write", rng.pick(w.cache_files), offset, host};
    }
    case 1: {
      const Entity& s = rng.pick(w.services);
      if (rng.chance(60)) return {s, "read", rng.pick(w.libraries), offset, host};
      return {s, rng.chance(50) ? "read" : "write", rng.pick(w.registry), offset, host};
    }
    case 2:
      return {rng.pick(w.editors), rng.chance(50) ? "read" : "write", rng.pick(w.documents), offset, host};
    case 3:
      return {rng.pick(w.parents), "fork", rng.pick(w.spawned), offset, host};
    case 4:
      return {rng.pick(w.services), "write", rng.pick(w.logs), offset, host};
    default:
      return {rng.pick(w.spawned), "read", rng.pick(w.documents), offset, host};
  }
}

// Attack entity templates per phase: the first is used for the phase's
// opening entity, later ones alternate.
struct AttackTemplate {
  EntityKind kind;
  const char* token;
};

const std::vector<AttackTemplate>& templates_for(KillChainPhase phase) {
  static const std::map<KillChainPhase, std::vector<AttackTemplate>> kTemplates = {
      {KillChainPhase::kReconnaissance, {{EntityKind::kIpAddress, "recon_target"}, {EntityKind::kProcess, "recon_scan"}}},
      {KillChainPhase::kWeaponization, {{EntityKind::kFile, "weaponized_macro"}, {EntityKind::kProcess, "macro_builder"}}},
      {KillChainPhase::kDelivery, {{EntityKind::kFile, "phish_invoice"}, {EntityKind::kDomain, "phish-delivery"}}},
      {KillChainPhase::kExploitation, {{EntityKind::kProcess, "exploit_loader"}, {EntityKind::kFile, "shellcode_stage"}}},
      {KillChainPhase::kInstallation, {{EntityKind::kFile, "persist_implant"}, {EntityKind::kRegistry, "implant_autorun"}}},
      {KillChainPhase::kCommandAndControl, {{EntityKind::kIpAddress, "c2_server"}, {EntityKind::kDomain, "c2-beacon"}}},
      {KillChainPhase::kActionsOnObjectives, {{EntityKind::kFile, "exfil_archive"}, {EntityKind::kIpAddress, "exfil_drop"}}},
  };
  return kTemplates.at(phase);
}

const char* root_token(KillChainPhase phase) {
  switch (phase) {
    case KillChainPhase::kReconnaissance: return "recon_agent";
    case KillChainPhase::kWeaponization: return "macro_builder";
    case KillChainPhase::kDelivery: return "phish_dropper";
    case KillChainPhase::kExploitation: return "exploit_loader";
    case KillChainPhase::kInstallation: return "implant_installer";
    case KillChainPhase::kCommandAndControl: return "beacon_agent";
    case KillChainPhase::kActionsOnObjectives: return "exfil_agent";
  }
  return "agent";
}

class AttackNamer {
 public:
  AttackNamer(Platform platform, std::uint32_t ns) : win_(platform == Platform::kWindows), ns_(ns) {}

  Entity make(EntityKind kind, const std::string& token) {
    const std::string tag = token + "_n" + std::to_string(ns_) + "_" + std::to_string(++counter_);
    switch (kind) {
      case EntityKind::kProcess:
        return proc(win_ ? "C:\\Users\\alice\\AppData\\Local\\Temp\\" + tag + ".exe" : "/tmp/." + tag,
                    static_cast<std::int64_t>(50000 + counter_));
      case EntityKind::kFile:
        return Entity::make(EntityKind::kFile, win_ ? "C:\\Users\\alice\\AppData\\Roaming\\" + tag + ".bin"
                                                    : "/var/tmp/" + tag + ".bin");
      case EntityKind::kRegistry:
        if (!win_) return Entity::make(EntityKind::kFile, "/etc/cron.d/" + tag);
        return Entity::make(EntityKind::kRegistry, "HKCU\\Software\\Microsoft\\Windows\\CurrentVersion\\Run\\" + tag);
      case EntityKind::kDomain: {
        std::string host = tag;
        std::replace(host.begin(), host.end(), '_', '-');
        return Entity::make(EntityKind::kDomain, host + ".attacker.test");
      }
      case EntityKind::kIpAddress:
        // Shared address space 100.64.0.0/10; the namespace picks the block.
        return Entity::make(EntityKind::kIpAddress, "100." + std::to_string(64 + ((ns_ >> 8) & 63)) + "." +
                                                        std::to_string(ns_ & 255) + "." +
                                                        std::to_string(1 + (counter_ % 254)));
      default:
        return Entity::make(EntityKind::kOther, tag);
    }
  }

 private:
  bool win_;
  std::uint32_t ns_;
  std::size_t counter_ = 0;
};

std::string action_for(EntityKind kind, bool first_touch) {
  switch (kind) {
    case EntityKind::kProcess: return first_touch ? "fork" : "inject";
    case EntityKind::kFile: return first_touch ? "write" : "read";
    case EntityKind::kRegistry: return "write";
    case EntityKind::kIpAddress: return first_touch ? "connect" : "send";
    case EntityKind::kDomain: return first_touch ? "resolve" : "connect";
    default: return "access";
  }
}

}  // namespace

GeneratedScenario generate(const ScenarioSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  GeneratedScenario out;
  out.spec = spec;
  const BenignWorld world = make_world(spec.platform, spec.benign_events);
  const std::int64_t span = spec.time_span_s * kNsPerSecond;
  auto host_name = [](std::size_t i) { return "host-" + std::to_string(i); };

  // Attack chain.
  const std::size_t total_steps = spec.attack_events();
  const std::size_t entity_budget =
      spec.malicious_entity_count == 0 ? spec.phases.size() : spec.malicious_entity_count;
  std::vector<bool> creates(total_steps, false);
  {
    std::vector<std::size_t> optional_slots;
    std::size_t step = 0;
    for (const auto& p : spec.phases) {
      creates[step] = true;
      for (std::size_t i = 1; i < p.steps; ++i) optional_slots.push_back(step + i);
      step += p.steps;
    }
    // Deterministic Fisher-Yates with our own draw.
    for (std::size_t i = optional_slots.size(); i > 1; --i) std::swap(optional_slots[i - 1], optional_slots[rng.below(i)]);
    for (std::size_t i = 0; i + spec.phases.size() < entity_budget; ++i) creates[optional_slots[i]] = true;
  }

  std::vector<std::int64_t> attack_times(total_steps);
  for (auto& t : attack_times) t = span / 20 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(span * 9 / 10)));
  std::sort(attack_times.begin(), attack_times.end());

  AttackNamer namer(spec.platform, spec.ns());
  std::vector<Draft> drafts;
  std::vector<Entity> processes;  // malicious processes, creation order
  std::vector<Entity> others;     // malicious non-process entities
  std::size_t step = 0;
  for (const auto& p : spec.phases) {
    std::vector<Entity> phase_entities;
    const auto& tmpls = templates_for(p.phase);
    std::size_t tmpl_cursor = 0;
    for (std::size_t i = 0; i < p.steps; ++i, ++step) {
      const std::int64_t ts = attack_times[step];
      if (creates[step]) {
        Entity fresh;
        if (out.chain.empty()) {
          fresh = namer.make(EntityKind::kProcess, root_token(p.phase));
          drafts.push_back({world.parents.front(), "fork", fresh, ts, host_name(0)});
        } else {
          const AttackTemplate& t = tmpls[tmpl_cursor++ % tmpls.size()];
          fresh = namer.make(t.kind, t.token);
          drafts.push_back({processes.back(), action_for(fresh.kind, true), fresh, ts, host_name(0)});
        }
        out.chain.push_back(fresh.canonical_key);
        out.phase_hints[fresh.canonical_key] = p.phase;
        (fresh.kind == EntityKind::kProcess ? processes : others).push_back(fresh);
        phase_entities.push_back(fresh);
        continue;
      }
      // Follow-up activity around an entity of this phase.
      const Entity focus = rng.pick(phase_entities);
      if (focus.kind == EntityKind::kProcess) {
        if (!others.empty() && rng.chance(50)) {
          const Entity& target = rng.pick(others);
          drafts.push_back({focus, action_for(target.kind, false), target, ts, host_name(0)});
        } else {
          drafts.push_back({focus, "read", rng.pick(world.libraries), ts, host_name(0)});
        }
      } else {
        const Entity& actor = processes[rng.below(processes.size())];
        drafts.push_back({actor, action_for(focus.kind, false), focus, ts, host_name(0)});
      }
    }
  }
  for (const auto& key : out.chain) out.ground_truth.keys.insert(key);
  out.ground_truth.scenario_id = spec.id();

  for (std::size_t i = 0; i < spec.benign_events; ++i) {
    const std::int64_t ts = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(span)));
    drafts.push_back(benign_event(rng, world, ts, host_name(rng.below(spec.hosts))));
  }

  std::stable_sort(drafts.begin(), drafts.end(),
                   [](const Draft& a, const Draft& b) { return a.offset_ns < b.offset_ns; });
  LogSet& log = out.log_set;
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    Event e;
    e.subject = drafts[i].subject;
    e.action = drafts[i].action;
    e.object = drafts[i].object;
    e.timestamp = kEpochNs + drafts[i].offset_ns;
    e.host_id = drafts[i].host;
    e.seq_no = static_cast<std::int64_t>(i + 1);
    e.raw_ref = "events.jsonl:" + std::to_string(i + 1);
    log.events.push_back(std::move(e));
  }
  log.host_id = spec.hosts == 1 ? host_name(0) : "multi";
  log.platform = spec.platform;
  log.source_files = {"events.jsonl"};

  out.alert.entities = {out.chain.front()};
  out.alert.description = "Endpoint detection flagged suspicious process " + out.chain.front();
  return out;
}

json ground_truth_json(const GeneratedScenario& scenario) {
  json hints = json::object();
  for (const auto& [key, phase] : scenario.phase_hints) hints[key] = std::string(to_string(phase));
  return {{"scenario_id", scenario.ground_truth.scenario_id},
          {"malicious_entities", scenario.ground_truth.keys},
          {"chain", scenario.chain},
          {"phase_hints", std::move(hints)}};
}

GroundTruth ground_truth_from_json(const json& j) {
  GroundTruth gt;
  try {
    gt.set.scenario_id = j.at("scenario_id").get<std::string>();
    for (const auto& k : j.at("malicious_entities")) gt.set.keys.insert(recanonicalize_key(k.get<std::string>()));
    for (const auto& k : j.value("chain", json::array())) gt.chain.push_back(recanonicalize_key(k.get<std::string>()));
    const json hints = j.value("phase_hints", json::object());
    for (const auto& [k, v] : hints.items()) {
      gt.phase_hints[recanonicalize_key(k)] = parse_phase(v.get<std::string>());
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSpecInvalid, std::string("ground truth: ") + e.what());
  }
  if (gt.chain.empty()) gt.chain.assign(gt.set.keys.begin(), gt.set.keys.end());
  return gt;
}

GroundTruth load_ground_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read ground truth " + path.string());
  json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw Error(ErrorCode::kSpecInvalid, path.string() + " is not valid JSON");
  return ground_truth_from_json(j);
}

namespace {

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw Error(ErrorCode::kSpecInvalid, path.string() + " is not valid JSON");
  return j;
}

}  // namespace

void write_scenario(const GeneratedScenario& scenario, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  write_json_events(dir / "events.jsonl", scenario.log_set.events);
  write_json_file(dir / "ground_truth.json", ground_truth_json(scenario));
  write_json_file(dir / "alert.json", to_json(scenario.alert));
  write_json_file(dir / "manifest.json", {{"format_version", "v1"},
                                          {"scenario_id", scenario.spec.id()},
                                          {"spec", to_json(scenario.spec)},
                                          {"event_count", scenario.log_set.events.size()},
                                          {"attack_events", scenario.spec.attack_events()},
                                          {"malicious_entities", scenario.ground_truth.keys.size()}});
}

LoadedScenario load_scenario(const std::filesystem::path& dir) {
  LoadedScenario s;
  const json manifest = read_json_file(dir / "manifest.json");
  if (!manifest.contains("spec")) throw Error(ErrorCode::kSpecInvalid, "manifest.json has no spec");
  s.spec = scenario_spec_from_json(manifest["spec"]);
  s.log_set = load_log_set({dir / "events.jsonl"}, LogFormat::kJsonEvent, /*strict=*/true);
  s.log_set.platform = s.spec.platform;
  s.ground_truth = ground_truth_from_json(read_json_file(dir / "ground_truth.json"));
  s.alert = alert_from_json(read_json_file(dir / "alert.json"));
  return s;
}

std::pair<GeneratedScenario, GeneratedScenario> split_kb_and_target(const ScenarioSpec& kb_spec,
                                                                    const ScenarioSpec& target_spec) {
  // Attack IPs encode the low 14 bits of the namespace.
  if ((kb_spec.ns() & 0x3fff) == (target_spec.ns() & 0x3fff)) {
    throw Error(ErrorCode::kSpecInvalid, "knowledge-base and target scenarios share namespace " +
                                             std::to_string(kb_spec.ns()));
  }
  if (kb_spec.id() == target_spec.id()) {
    throw Error(ErrorCode::kSpecInvalid, "knowledge-base and target scenarios share id " + kb_spec.id());
  }
  std::vector<KillChainPhase> a, b;
  for (const auto& p : kb_spec.phases) a.push_back(p.phase);
  for (const auto& p : target_spec.phases) b.push_back(p.phase);
  if (a != b) throw Error(ErrorCode::kSpecInvalid, "knowledge-base and target scenarios must share phases");
  return {generate(kb_spec), generate(target_spec)};
}

}  // namespace ananke
