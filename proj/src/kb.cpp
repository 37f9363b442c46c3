/* Copyright (c) 2026 The Ananke Authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */

#include "ananke/kb.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <tuple>

#include "ananke/crypto.hpp"

namespace ananke {

using nlohmann::json;

json to_json(const PhaseMeta& meta) {
  return {{"phase", std::string(to_string(meta.phase))},
          {"behavior", meta.behavior},
          {"entities", meta.entities},
          {"neighbors", {{"prev", meta.neighbors.prev}, {"next", meta.neighbors.next}}}};
}

PhaseMeta phase_meta_from_json(const json& j) {
  PhaseMeta meta;
  meta.phase = parse_phase(j.at("phase").get<std::string>());
  meta.behavior = j.at("behavior").get<std::string>();
  meta.entities = j.at("entities").get<std::vector<std::string>>();
  const json& n = j.at("neighbors");
  meta.neighbors.prev = n.at("prev").get<std::string>();
  meta.neighbors.next = n.at("next").get<std::string>();
  return meta;
}

namespace {

Event event_from_stored_json(const json& j) {
  // Stored events use the JsonEvent encoding; reuse the line parser.
  return parse_line(j.dump(), LogFormat::kJsonEvent, j.value("seq", std::int64_t{0}));
}

}  // namespace

json to_json(const KnowledgeUnit& unit) {
  json events = json::array();
  for (const auto& e : unit.events) events.push_back(event_to_json(e));
  return {{"unit_id", unit.unit_id},
          {"scenario_id", unit.scenario_id},
          {"platform", std::string(to_string(unit.platform))},
          {"meta", to_json(unit.meta)},
          {"events", std::move(events)},
          {"dim", unit.vector.dim()},
          {"vector", base64_encode(pack_f32_le(unit.vector.values()))}};
}

KnowledgeUnit unit_from_json(const json& j) {
  KnowledgeUnit unit;
  unit.unit_id = j.at("unit_id").get<std::string>();
  unit.scenario_id = j.at("scenario_id").get<std::string>();
  unit.platform = parse_platform(j.at("platform").get<std::string>());
  unit.meta = phase_meta_from_json(j.at("meta"));
  for (const auto& e : j.at("events")) unit.events.push_back(event_from_stored_json(e));
  unit.vector = EmbeddingVector(unpack_f32_le(base64_decode(j.at("vector").get<std::string>())));
  return unit;
}

json to_json(const CoverageReport& report) {
  return {{"trace_events", report.trace_events},
          {"covered", report.covered},
          {"repaired", report.repaired},
          {"unmatched_claims", report.unmatched_claims},
          {"duplicate_claims", report.duplicate_claims},
          {"order_violations", report.order_violations},
          {"coverage", report.coverage()},
          {"repaired_refs", report.repaired_refs}};
}

std::vector<Event> extract_trace(const LogSet& log_set, const MaliciousEntitySet& e_mal) {
  std::vector<Event> trace;
  if (e_mal.keys.empty()) return trace;
  for (const auto& e : log_set.events) {
    if (e_mal.contains(e.subject.canonical_key) || e_mal.contains(e.object.canonical_key)) {
      trace.push_back(e);
    }
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Annotation

namespace {

using TraceKey = std::tuple<std::int64_t, std::string, std::string, std::string>;

TraceKey key_of(const Event& e) {
  return {e.timestamp, e.subject.canonical_key, e.action, e.object.canonical_key};
}

struct DraftSegment {
  PhaseMeta meta;
  std::vector<std::size_t> members;  // indices into the window
};

// Signals a response that should be retried.
struct Malformed {
  std::string reason;
};

std::vector<DraftSegment> validate_annotation(const std::string& raw, const std::vector<Event>& window,
                                              CoverageReport& coverage) {
  json root;
  try {
    root = extract_first_json(raw);
  } catch (const Error&) {
    throw Malformed{"no JSON in response"};
  }
  if (root.is_object()) {
    if (root.contains("phases") && root["phases"].is_array()) {
      root = root["phases"];
    } else {
      root = json::array({root});
    }
  }
  if (!root.is_array() || root.empty()) throw Malformed{"expected a non-empty JSON array"};

  std::map<TraceKey, std::vector<std::size_t>> lookup;
  for (std::size_t i = 0; i < window.size(); ++i) lookup[key_of(window[i])].push_back(i);
  std::vector<bool> claimed(window.size(), false);

  CoverageReport local;
  std::vector<DraftSegment> segments;
  for (const auto& item : root) {
    if (!item.is_object()) throw Malformed{"segment is not an object"};
    auto phase = item.find("phase");
    if (phase == item.end() || !phase->is_string()) throw Malformed{"segment.phase missing"};
    auto evidence = item.find("evidence_set");
    if (evidence == item.end() || !evidence->is_array()) throw Malformed{"segment.evidence_set missing"};

    DraftSegment seg;
    seg.meta.phase = parse_phase(phase->get<std::string>());  // kPhaseParse is not retried
    if (auto b = item.find("behavior"); b != item.end() && b->is_string()) {
      seg.meta.behavior = trim(b->get<std::string>());
    }
    if (auto ents = item.find("entities"); ents != item.end() && ents->is_array()) {
      for (const auto& m : *ents) {
        try {
          const std::string key = canonical_mention(m);
          if (std::find(seg.meta.entities.begin(), seg.meta.entities.end(), key) == seg.meta.entities.end()) {
            seg.meta.entities.push_back(key);
          }
        } catch (const Error&) {
          // Unusable entity mention; the entity list is advisory.
        }
      }
    }
    if (auto n = item.find("neighbors"); n != item.end() && n->is_object()) {
      if (auto p = n->find("prev"); p != n->end() && p->is_string()) seg.meta.neighbors.prev = p->get<std::string>();
      if (auto x = n->find("next"); x != n->end() && x->is_string()) seg.meta.neighbors.next = x->get<std::string>();
    }

    for (const auto& claim : *evidence) {
      std::optional<TraceKey> key;
      try {
        if (claim.is_object() && claim.contains("ts") && claim["ts"].is_number_integer() &&
            claim.contains("a") && claim["a"].is_string() && claim.contains("s") && claim.contains("o")) {
          key = TraceKey{claim["ts"].get<std::int64_t>(), canonical_mention(claim["s"]),
                         to_lower(trim(claim["a"].get<std::string>())), canonical_mention(claim["o"])};
        }
      } catch (const Error&) {
      }
      auto it = key ? lookup.find(*key) : lookup.end();
      if (it == lookup.end()) {
        ++local.unmatched_claims;
        continue;
      }
      auto slot = std::find_if(it->second.begin(), it->second.end(), [&](std::size_t i) { return !claimed[i]; });
      if (slot == it->second.end()) {
        ++local.duplicate_claims;
        continue;
      }
      claimed[*slot] = true;
      seg.members.push_back(*slot);
    }
    if (!seg.members.empty()) segments.push_back(std::move(seg));
  }
  if (segments.empty()) throw Malformed{"no segment matched any trace event"};

  for (auto& seg : segments) std::sort(seg.members.begin(), seg.members.end());
  std::stable_sort(segments.begin(), segments.end(), [](const DraftSegment& a, const DraftSegment& b) {
    return a.members.front() < b.members.front();
  });
  local.covered = static_cast<std::size_t>(std::count(claimed.begin(), claimed.end(), true));

  // Re-attach omitted events to the nearest preceding segment.
  for (std::size_t i = 0; i < window.size(); ++i) {
    if (claimed[i]) continue;
    std::size_t target = 0;
    for (std::size_t s = 0; s < segments.size(); ++s) {
      if (segments[s].members.front() <= i) target = s;
    }
    auto& members = segments[target].members;
    members.insert(std::upper_bound(members.begin(), members.end(), i), i);
    ++local.repaired;
    local.repaired_refs.push_back(window[i].raw_ref.value_or("seq:" + std::to_string(window[i].seq_no)));
  }
  for (std::size_t s = 1; s < segments.size(); ++s) {
    if (segments[s].members.front() < segments[s - 1].members.back()) ++local.order_violations;
  }

  coverage.covered += local.covered;
  coverage.repaired += local.repaired;
  coverage.unmatched_claims += local.unmatched_claims;
  coverage.duplicate_claims += local.duplicate_claims;
  coverage.order_violations += local.order_violations;
  for (auto& r : local.repaired_refs) coverage.repaired_refs.push_back(std::move(r));
  return segments;
}

std::string join_lines(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += '\n';
    out += item;
  }
  return out;
}

}  // namespace

AnnotationResult annotate_phases(const std::vector<Event>& trace, const MaliciousEntitySet& e_mal,
                                 LlmBackend& backend, const AnnotationOptions& options) {
  if (trace.empty()) throw Error(ErrorCode::kSpecInvalid, "cannot annotate an empty trace");
  const std::size_t window_size = std::max<std::size_t>(options.window, 1);
  const PromptTemplate& tmpl = prompt_template(TemplateName::kKill);
  const std::string malicious = join_lines({e_mal.keys.begin(), e_mal.keys.end()});

  AnnotationResult result;
  result.coverage.trace_events = trace.size();
  std::string previous = "none";

  for (std::size_t start = 0; start < trace.size(); start += window_size) {
    const std::vector<Event> window(trace.begin() + static_cast<std::ptrdiff_t>(start),
                                    trace.begin() + static_cast<std::ptrdiff_t>(std::min(trace.size(), start + window_size)));
    const RenderedPrompt prompt = render(tmpl, {{"malicious_entities", malicious},
                                                {"previous_window", previous},
                                                {"sequences", render_event_lines(window)}});
    std::vector<DraftSegment> segments;
    for (int attempt = 0;; ++attempt) {
      Completion completion = backend.complete(prompt.system, prompt.user);
      result.usage += completion.usage;
      try {
        segments = validate_annotation(completion.text, window, result.coverage);
        break;
      } catch (const Malformed& m) {
        if (attempt >= options.max_retries) {
          throw Error(ErrorCode::kLlmMalformedResponse,
                      m.reason + " after " + std::to_string(attempt) + " retries");
        }
        ++result.retry_count;
      }
    }

    for (std::size_t s = 0; s < segments.size(); ++s) {
      DraftSegment& seg = segments[s];
      std::vector<Event> events;
      for (std::size_t i : seg.members) events.push_back(window[i]);
      if (seg.meta.entities.empty()) {
        for (const auto& e : events) {
          for (const auto* key : {&e.subject.canonical_key, &e.object.canonical_key}) {
            if (e_mal.contains(*key) &&
                std::find(seg.meta.entities.begin(), seg.meta.entities.end(), *key) == seg.meta.entities.end()) {
              seg.meta.entities.push_back(*key);
            }
          }
        }
      }
      if (seg.meta.behavior.empty()) seg.meta.behavior = std::string(display_name(seg.meta.phase)) + " activity";

      // A window boundary can split one phase; stitch it back together.
      if (s == 0 && !result.sequences.empty() && result.sequences.back().meta.phase == seg.meta.phase) {
        AnnotatedSequence& last = result.sequences.back();
        for (auto& e : events) last.events.push_back(std::move(e));
        if (last.meta.behavior != seg.meta.behavior) last.meta.behavior += " " + seg.meta.behavior;
        for (const auto& key : seg.meta.entities) {
          if (std::find(last.meta.entities.begin(), last.meta.entities.end(), key) == last.meta.entities.end()) {
            last.meta.entities.push_back(key);
          }
        }
        last.meta.neighbors.next = seg.meta.neighbors.next;
        continue;
      }
      result.sequences.push_back({seg.meta, std::move(events), e_mal.scenario_id});
    }
    const PhaseMeta& tail = result.sequences.back().meta;
    previous = std::string(display_name(tail.phase)) + ": " + tail.behavior;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Chunking and persistence

std::string unit_id_for(const std::string& scenario_id, const std::string& serialization,
                        std::size_t duplicate_index) {
  std::string data = scenario_id;
  data += '\0';
  data += serialization;
  if (duplicate_index > 0) {
    data += '\0';
    data += std::to_string(duplicate_index);
  }
  return sha256_hex(data).substr(0, 16);
}

std::vector<KnowledgeUnit> chunk_and_embed(const std::vector<AnnotatedSequence>& annotated,
                                           const Embedder& embedder, std::size_t n_max,
                                           Platform platform) {
  if (n_max == 0) throw Error(ErrorCode::kConfigInvalid, "n_max must be >= 1");
  std::vector<KnowledgeUnit> units;
  std::set<std::string> used;
  for (const auto& seq : annotated) {
    for (std::size_t start = 0; start < seq.events.size(); start += n_max) {
      KnowledgeUnit unit;
      unit.meta = seq.meta;
      unit.scenario_id = seq.scenario_id;
      unit.platform = platform;
      unit.events.assign(seq.events.begin() + static_cast<std::ptrdiff_t>(start),
                         seq.events.begin() + static_cast<std::ptrdiff_t>(std::min(seq.events.size(), start + n_max)));
      const std::string text = serialize_sequence(unit.events);
      // Identical chunk text within a scenario (e.g. repeated beacons) gets a
      // deterministic occurrence suffix in its hash input.
      std::size_t dup = 0;
      do {
        unit.unit_id = unit_id_for(seq.scenario_id, text, dup++);
      } while (!used.insert(unit.unit_id).second);
      unit.vector = embedder.embed(text);
      if (unit.vector.dim() != embedder.dim()) {
        throw Error(ErrorCode::kEmbedder, "embedder returned dimension " + std::to_string(unit.vector.dim()));
      }
      units.push_back(std::move(unit));
    }
  }
  return units;
}

bool KnowledgeBase::has_scenario(const std::string& id) const {
  return std::find(scenarios.begin(), scenarios.end(), id) != scenarios.end();
}

const KnowledgeUnit* KnowledgeBase::find(const std::string& unit_id) const {
  auto it = by_id_.find(unit_id);
  return it == by_id_.end() ? nullptr : &units_[it->second];
}

const KnowledgeUnit& KnowledgeBase::unit(const std::string& unit_id) const {
  const KnowledgeUnit* u = find(unit_id);
  if (u == nullptr) throw Error(ErrorCode::kUnknownUnit, unit_id);
  return *u;
}

void KnowledgeBase::append(std::vector<KnowledgeUnit> units) {
  std::set<std::string> incoming;
  for (const auto& u : units) {
    if (dimension != 0 && u.vector.dim() != dimension) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "unit " + u.unit_id + " has dimension " + std::to_string(u.vector.dim()) +
                      ", KB has " + std::to_string(dimension));
    }
    if (by_id_.count(u.unit_id) || !incoming.insert(u.unit_id).second) {
      throw Error(ErrorCode::kDuplicateUnit, u.unit_id);
    }
  }
  for (auto& u : units) {
    if (dimension == 0) dimension = u.vector.dim();
    by_id_.emplace(u.unit_id, units_.size());
    units_.push_back(std::move(u));
  }
}

VectorIndex KnowledgeBase::build_index(Metric metric) const {
  VectorIndex index(metric, dimension);
  for (const auto& u : units_) index.add(u.unit_id, u.vector);
  return index;
}

void kb_save(const KnowledgeBase& kb, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());

  // Units first, manifest last: a manifest always describes complete unit data.
  {
    std::ofstream out(dir / "units.jsonl", std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + (dir / "units.jsonl").string());
    for (const auto& u : kb.units()) out << to_json(u).dump() << '\n';
    if (!out) throw Error(ErrorCode::kIo, "write failure on units.jsonl");
  }
  json manifest = {{"format_version", kb.format_version},
                   {"embedder", kb.embedder_id},
                   {"dimension", kb.dimension},
                   {"n_max", kb.n_max},
                   {"scenarios", kb.scenarios},
                   {"unit_count", kb.size()}};
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failure on manifest.json");
}

KnowledgeBase kb_load(const std::filesystem::path& dir) {
  std::ifstream manifest_in(dir / "manifest.json");
  if (!manifest_in) throw Error(ErrorCode::kIo, "no manifest.json in " + dir.string());
  json manifest = json::parse(manifest_in, nullptr, /*allow_exceptions=*/false);
  if (manifest.is_discarded() || !manifest.is_object()) throw Error(ErrorCode::kIo, "manifest.json is not a JSON object");
  const std::string version = manifest.value("format_version", std::string());
  if (version != kKbFormatVersion) {
    throw Error(ErrorCode::kFormatVersionMismatch,
                "KB format '" + version + "', expected '" + std::string(kKbFormatVersion) + "'");
  }

  KnowledgeBase kb;
  try {
    kb.embedder_id = manifest.at("embedder").get<std::string>();
    kb.dimension = manifest.at("dimension").get<std::size_t>();
    kb.n_max = manifest.at("n_max").get<std::size_t>();
    kb.scenarios = manifest.at("scenarios").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIo, std::string("manifest.json: ") + e.what());
  }

  std::ifstream units_in(dir / "units.jsonl");
  if (!units_in) throw Error(ErrorCode::kIo, "no units.jsonl in " + dir.string());
  std::vector<KnowledgeUnit> units;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(units_in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      units.push_back(unit_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kIo, "units.jsonl:" + std::to_string(line_no) + ": " + e.what());
    } catch (const MalformedLine& e) {
      throw Error(ErrorCode::kIo, "units.jsonl:" + std::to_string(line_no) + ": " + e.reason());
    }
  }
  const std::size_t declared = manifest.value("unit_count", units.size());
  if (declared != units.size()) {
    throw Error(ErrorCode::kIo, "manifest declares " + std::to_string(declared) + " units, found " +
                                    std::to_string(units.size()));
  }
  kb.append(std::move(units));
  return kb;
}

PlatformSimilarity platform_similarity(const KnowledgeBase& kb) {
  PlatformSimilarity out;
  double within = 0.0, cross = 0.0;
  const auto& units = kb.units();
  for (std::size_t i = 0; i < units.size(); ++i) {
    for (std::size_t j = i + 1; j < units.size(); ++j) {
      const double s = similarity(units[i].vector, units[j].vector, Metric::kCosine);
      if (units[i].platform == units[j].platform) {
        within += s;
        ++out.within_pairs;
      } else {
        cross += s;
        ++out.cross_pairs;
      }
    }
  }
  if (out.within_pairs > 0) out.within = within / static_cast<double>(out.within_pairs);
  if (out.cross_pairs > 0) out.cross = cross / static_cast<double>(out.cross_pairs);
  return out;
}

ScenarioBuildReport kb_add_scenario(KnowledgeBase& kb, const LogSet& log_set,
                                    const MaliciousEntitySet& e_mal, LlmBackend& backend,
                                    const Embedder& embedder, const AnnotationOptions& options) {
  if (kb.has_scenario(e_mal.scenario_id)) throw Error(ErrorCode::kDuplicateScenario, e_mal.scenario_id);
  if (!kb.embedder_id.empty() && kb.embedder_id != embedder.id()) {
    throw Error(ErrorCode::kConfigInvalid,
                "KB was built with embedder '" + kb.embedder_id + "', got '" + embedder.id() + "'");
  }

  ScenarioBuildReport report;
  report.scenario_id = e_mal.scenario_id;
  const std::vector<Event> trace = extract_trace(log_set, e_mal);
  report.trace_events = trace.size();
  if (trace.empty()) {
    throw Error(ErrorCode::kSpecInvalid, "scenario '" + e_mal.scenario_id + "' has no event touching its malicious entities");
  }
  report.annotation = annotate_phases(trace, e_mal, backend, options);
  std::vector<KnowledgeUnit> units =
      chunk_and_embed(report.annotation.sequences, embedder, kb.n_max, log_set.platform);
  report.units_added = units.size();

  if (kb.embedder_id.empty()) kb.embedder_id = embedder.id();
  if (kb.dimension == 0) kb.dimension = embedder.dim();
  kb.append(std::move(units));
  kb.scenarios.push_back(e_mal.scenario_id);
  return report;
}

}  // namespace ananke
