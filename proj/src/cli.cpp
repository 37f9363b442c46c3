/* Copyright (c) 2026 The Ananke Authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */

#include "ananke/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "ananke/config.hpp"
#include "ananke/eval.hpp"
#include "ananke/investigator.hpp"
#include "ananke/kb.hpp"
#include "ananke/provenance.hpp"
#include "ananke/report.hpp"
#include "ananke/scenario.hpp"

namespace ananke {

using nlohmann::json;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSpecInvalid:
    case ErrorCode::kConfigInvalid:
    case ErrorCode::kMalformedLine:
    case ErrorCode::kInvalidEntity:
    case ErrorCode::kPhaseParse:
      return kExitSpec;
    case ErrorCode::kDuplicateScenario:
    case ErrorCode::kDuplicateUnit:
    case ErrorCode::kFormatVersionMismatch:
    case ErrorCode::kEmptyIndex:
    case ErrorCode::kDimensionMismatch:
      return kExitKb;
    case ErrorCode::kAlertUnresolved:
      return kExitAlert;
    case ErrorCode::kUnknownUnit:
    case ErrorCode::kUnknownNode:
    case ErrorCode::kCassetteMiss:
      return kExitLookup;
    default:
      return kExitInternal;
  }
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failure on " + path.string());
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw Error(ErrorCode::kSchemaViolation, path.string() + " is not valid JSON");
  return j;
}

// A knowledge base that cannot be read is reported as a KB failure.
struct KbUnavailable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

KnowledgeBase open_kb(const std::filesystem::path& dir) {
  try {
    return kb_load(dir);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIo || e.code() == ErrorCode::kSchemaViolation) throw KbUnavailable(e.what());
    throw;
  }
}

// Flag values; only those given on the command line override the config.
struct Flags {
  std::string config_path;
  std::string backend;
  std::string record_inner;
  std::string cassette;
  std::string embedder;
  std::size_t embedder_dim = 256;
  std::string kb_dir;

  // gen-scenario
  std::string spec_path;
  std::string out_dir;
  // build-kb
  std::vector<std::string> scenario_dirs;
  std::size_t chunk_size = kDefaultChunkSize;
  // investigate
  std::string logs_dir;
  std::string alert_path;
  std::string metric = "cosine";
  std::size_t n_max = kDefaultChunkSize;
  std::size_t max_iterations = 500;
  std::string induced_edges = "full";
  std::string entity_match = "exact";
  std::size_t retrieval_k = 1;
  std::string lexicon_path;
  unsigned lexicon_percent = 100;
  bool no_narrative = false;
  // eval
  std::string investigation_path;
  std::string ground_truth_path;
  bool event_level = false;
  // kb inspect
  std::string unit_id;
};

bool given(const CLI::App* app, const std::string& name) {
  try {
    return app->count(name) > 0;
  } catch (const CLI::OptionNotFound&) {
    return false;
  }
}

AppConfig effective_config(const CLI::App* cmd, const Flags& f) {
  AppConfig c;
  if (!f.config_path.empty()) c = load_config_file(c, f.config_path);
  c = apply_env(c);
  if (given(cmd, "--backend")) c.backend = parse_backend_kind(f.backend);
  if (given(cmd, "--record-inner")) c.record_inner = parse_backend_kind(f.record_inner);
  if (given(cmd, "--cassette")) c.cassette = f.cassette;
  if (given(cmd, "--embedder")) c.embedder = f.embedder;
  if (given(cmd, "--embedder-dim")) c.embedder_dim = f.embedder_dim;
  if (given(cmd, "--kb")) c.kb_dir = f.kb_dir;
  if (given(cmd, "--logs")) c.log_dirs = {f.logs_dir};
  if (given(cmd, "--metric")) c.investigation.metric = parse_metric(f.metric);
  if (given(cmd, "--n")) c.investigation.n_max = f.n_max;
  if (given(cmd, "--max-iterations")) c.investigation.max_iterations = f.max_iterations;
  if (given(cmd, "--induced-edges")) c.investigation.induced_edges = parse_induced_edges(f.induced_edges);
  if (given(cmd, "--entity-match")) c.investigation.entity_match = parse_entity_match(f.entity_match);
  if (given(cmd, "--retrieval-k")) c.investigation.retrieval_k = f.retrieval_k;
  if (given(cmd, "--event-level")) c.event_level = f.event_level;
  if (c.embedder != "local" && c.embedder != "http") {
    throw Error(ErrorCode::kConfigInvalid, "--embedder must be local or http");
  }
  c.investigation.validate();
  return c;
}

void add_backend_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--backend", f.backend, "LLM backend: oracle|http|cassette-record|cassette-replay")
      ->default_str("oracle");
  cmd->add_option("--record-inner", f.record_inner, "Backend wrapped by cassette-record: oracle|http")
      ->default_str("http");
  cmd->add_option("--cassette", f.cassette, "Cassette file for record/replay");
  cmd->add_option("--embedder", f.embedder, "Embedder: local|http")->default_str("local");
  cmd->add_option("--embedder-dim", f.embedder_dim, "Embedding dimension");
}

int cmd_gen_scenario(const Flags& f, std::ostream& out) {
  const ScenarioSpec spec = load_scenario_spec(f.spec_path);
  const GeneratedScenario scenario = generate(spec);
  write_scenario(scenario, f.out_dir);
  out << "scenario " << spec.id() << ": " << scenario.log_set.events.size() << " events, "
      << scenario.ground_truth.keys.size() << " malicious entities -> " << f.out_dir << "\n";
  return kExitOk;
}

int cmd_build_kb(const CLI::App* cmd, const Flags& f, std::ostream& out) {
  AppConfig c = effective_config(cmd, f);
  if (c.kb_dir.empty()) throw Error(ErrorCode::kConfigInvalid, "--kb is required");
  const std::filesystem::path kb_dir = c.kb_dir;
  KnowledgeBase kb;
  if (std::filesystem::exists(kb_dir / "manifest.json")) {
    kb = open_kb(kb_dir);
  } else {
    kb.n_max = f.chunk_size;
  }
  const auto embedder = make_embedder(c);
  std::size_t added = 0;
  for (const auto& dir : f.scenario_dirs) {
    const LoadedScenario s = load_scenario(dir);
    auto backend = make_backend(c, &s.ground_truth.set, &s.ground_truth.phase_hints);
    const ScenarioBuildReport r = kb_add_scenario(kb, s.log_set, s.ground_truth.set, *backend, *embedder);
    added += r.units_added;
    out << "scenario " << r.scenario_id << ": " << r.trace_events << " trace events, " << r.units_added
        << " units, coverage " << std::fixed << std::setprecision(3) << r.annotation.coverage.coverage()
        << ", retries " << r.annotation.retry_count << "\n";
  }
  // Nothing is written unless every scenario succeeded.
  kb_save(kb, kb_dir);
  out << "knowledge base " << kb_dir.string() << ": " << kb.size() << " units (" << added << " added), "
      << kb.scenarios.size() << " scenarios\n";
  return kExitOk;
}

int cmd_investigate(const CLI::App* cmd, const Flags& f, std::ostream& out, std::ostream& err) {
  AppConfig c = effective_config(cmd, f);
  if (c.kb_dir.empty()) throw Error(ErrorCode::kConfigInvalid, "--kb is required");
  if (c.log_dirs.empty()) throw Error(ErrorCode::kConfigInvalid, "--logs is required");

  std::optional<GroundTruth> lexicon;
  if (!f.lexicon_path.empty()) {
    lexicon = load_ground_truth(f.lexicon_path);
    if (f.lexicon_percent > 100) throw Error(ErrorCode::kConfigInvalid, "--lexicon-percent must be <= 100");
    const std::size_t keep = (lexicon->chain.size() * f.lexicon_percent + 99) / 100;
    lexicon->chain.resize(keep);
    lexicon->set.keys = {lexicon->chain.begin(), lexicon->chain.end()};
  }

  const KnowledgeBase kb = open_kb(c.kb_dir);
  if (kb.empty()) throw Error(ErrorCode::kEmptyIndex, "knowledge base " + c.kb_dir + " has no units");
  const auto embedder = make_embedder(c);
  if (embedder->id() != kb.embedder_id) {
    throw Error(ErrorCode::kConfigInvalid,
                "knowledge base was embedded with '" + kb.embedder_id + "', configured '" + embedder->id() + "'");
  }
  LogSet logs;
  {
    std::vector<std::filesystem::path> files;
    for (const auto& dir : c.log_dirs) {
      LogSet part = load_log_dir(dir);
      for (auto& e : part.events) logs.events.push_back(std::move(e));
      for (auto& s : part.source_files) logs.source_files.push_back(std::move(s));
      logs.host_id = part.host_id;
    }
    if (c.log_dirs.size() > 1) sort_events(logs.events);
  }
  const ProvenanceGraph graph = build_graph(logs);
  const VectorIndex index = kb.build_index(c.investigation.metric);
  const AlertSpec alert = load_alert(f.alert_path);
  auto backend = make_backend(c, lexicon ? &lexicon->set : nullptr, lexicon ? &lexicon->phase_hints : nullptr);

  InvestigationResult result = investigate(graph, alert, kb, index, *embedder, *backend, c.investigation);
  Report report = build_structured_report(result, lexicon ? lexicon->set.scenario_id : std::string());
  if (!f.no_narrative) {
    report = c.narrative_input == NarrativeInput::kFullCache
                 ? build_narrative(std::move(report), result.final_summary, *backend, result.cache)
                 : build_narrative(std::move(report), result.final_summary, *backend);
    result.usage += report.narrative_usage;
  }

  const std::filesystem::path dir = f.out_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string());
  write_text(dir / "investigation.json", to_json(result).dump(2) + "\n");
  write_text(dir / "report.json", to_json(report).dump(2) + "\n");
  write_text(dir / "report.md", render_markdown(report));

  out << "investigation: " << result.cache.size() << " reasoning iterations, " << result.expansions.size()
      << " expansions, " << result.detected.size() << " detected, " << result.usage.total() << " tokens -> "
      << dir.string() << "\n";
  for (const auto& w : result.warnings) err << "warning: " << w << "\n";
  for (const auto& w : report.warnings) {
    if (!result.has_warning(w)) err << "warning: " << w << "\n";
  }
  return kExitOk;
}

int cmd_eval(const CLI::App* cmd, const Flags& f, std::ostream& out) {
  const AppConfig c = effective_config(cmd, f);
  const InvestigationResult result = investigation_from_json(read_json(f.investigation_path));
  const GroundTruth gt = load_ground_truth(f.ground_truth_path);
  const MetricsResult m = score_investigation(result, gt.set, c.event_level);
  json j = to_json(m);
  j["mode"] = c.event_level ? "event" : "entity";
  out << j.dump(2) << "\n\n";
  out << render_table({{gt.set.scenario_id.empty() ? std::string("investigation") : gt.set.scenario_id, m}});
  return kExitOk;
}

int cmd_kb_inspect(const Flags& f, std::ostream& out) {
  const KnowledgeBase kb = open_kb(f.kb_dir);
  if (!f.unit_id.empty()) {
    out << to_json(kb.unit(f.unit_id)).dump(2) << "\n";
    return kExitOk;
  }
  out << std::left << std::setw(18) << "unit_id" << std::setw(22) << "phase" << std::setw(20) << "scenario"
      << std::setw(8) << "events" << "platform\n";
  for (const auto& u : kb.units()) {
    out << std::left << std::setw(18) << u.unit_id << std::setw(22) << to_string(u.meta.phase) << std::setw(20)
        << u.scenario_id << std::setw(8) << u.events.size() << to_string(u.platform) << "\n";
  }
  const PlatformSimilarity ps = platform_similarity(kb);
  auto mean = [](const std::optional<double>& v) {
    if (!v) return std::string("n/a");
    std::ostringstream os;
    os << std::fixed << std::setprecision(4) << *v;
    return os.str();
  };
  out << "\nplatform cosine: within " << mean(ps.within) << " (" << ps.within_pairs << " pairs), cross "
      << mean(ps.cross) << " (" << ps.cross_pairs << " pairs), gap " << mean(ps.gap()) << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Provenance-graph attack investigation with a Kill Chain knowledge base", "ananke"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  Flags f;
  app.add_option("--config", f.config_path, "JSON config file (flags override it, env vars sit in between)");

  CLI::App* gen = app.add_subcommand("gen-scenario", "Generate a synthetic labeled scenario directory");
  gen->add_option("--spec", f.spec_path, "Scenario spec JSON")->required();
  gen->add_option("--out", f.out_dir, "Output directory")->required();

  CLI::App* build = app.add_subcommand("build-kb", "Annotate labeled scenarios and append them to a knowledge base");
  build->add_option("--scenario", f.scenario_dirs, "Scenario directory (repeatable)")->required();
  build->add_option("--kb", f.kb_dir, "Knowledge base directory")->required();
  build->add_option("--chunk-size", f.chunk_size, "Events per knowledge unit for a new knowledge base");
  add_backend_flags(build, f);

  CLI::App* inv = app.add_subcommand("investigate", "Investigate an alert over a log directory");
  inv->add_option("--logs", f.logs_dir, "Directory of *.jsonl / *.csv logs")->required();
  inv->add_option("--alert", f.alert_path, "Alert JSON")->required();
  inv->add_option("--kb", f.kb_dir, "Knowledge base directory")->required();
  inv->add_option("--out", f.out_dir, "Output directory")->required();
  inv->add_option("--metric", f.metric, "Similarity metric: cosine|ip|euclid");
  inv->add_option("--n", f.n_max, "Events per context sequence");
  inv->add_option("--max-iterations", f.max_iterations, "Cap on reasoning iterations");
  inv->add_option("--induced-edges", f.induced_edges, "Neighborhood edges: full|star");
  inv->add_option("--entity-match", f.entity_match, "Entity resolution: exact|substring_fallback");
  inv->add_option("--retrieval-k", f.retrieval_k, "Knowledge units per prompt");
  inv->add_option("--lexicon", f.lexicon_path, "Ground truth JSON used by the oracle backend");
  inv->add_option("--lexicon-percent", f.lexicon_percent, "Oracle lexicon: leading share of the chain, in percent");
  inv->add_flag("--no-narrative", f.no_narrative, "Skip the narrative report call");
  add_backend_flags(inv, f);

  CLI::App* ev = app.add_subcommand("eval", "Score an investigation against ground truth");
  ev->add_option("--investigation", f.investigation_path, "investigation.json")->required();
  ev->add_option("--ground-truth", f.ground_truth_path, "ground_truth.json")->required();
  ev->add_flag("--event-level", f.event_level, "Score edges instead of entities");

  CLI::App* kbcmd = app.add_subcommand("kb", "Knowledge base utilities");
  kbcmd->require_subcommand(1);
  CLI::App* inspect = kbcmd->add_subcommand("inspect", "List units or dump one");
  inspect->add_option("--kb", f.kb_dir, "Knowledge base directory")->required();
  inspect->add_option("--unit", f.unit_id, "Unit id to dump");

  CLI::App* cfg = app.add_subcommand("config", "Configuration utilities");
  cfg->require_subcommand(1);
  CLI::App* show = cfg->add_subcommand("show", "Print the effective configuration with defaults");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitSpec;
  }

  try {
    if (gen->parsed()) return cmd_gen_scenario(f, out);
    if (build->parsed()) return cmd_build_kb(build, f, out);
    if (inv->parsed()) return cmd_investigate(inv, f, out, err);
    if (ev->parsed()) return cmd_eval(ev, f, out);
    if (inspect->parsed()) return cmd_kb_inspect(f, out);
    if (show->parsed()) {
      out << effective_config(show, f).to_json().dump(2) << "\n";
      return kExitOk;
    }
  } catch (const MalformedLine& e) {
    err << "error: " << e.what() << "\n";
    return kExitSpec;
  } catch (const KbUnavailable& e) {
    err << "error: knowledge base: " << e.what() << "\n";
    return kExitKb;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace ananke
