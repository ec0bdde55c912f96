#include <fmt/format.h>

#include <csignal>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "instructlr/agreement.hpp"
#include "instructlr/analytics.hpp"
#include "instructlr/annotation.hpp"
#include "instructlr/checker.hpp"
#include "instructlr/config.hpp"
#include "instructlr/cost.hpp"
#include "instructlr/draft_gen.hpp"
#include "instructlr/error.hpp"
#include "instructlr/jsonl.hpp"
#include "instructlr/pipeline.hpp"
#include "instructlr/retrieval.hpp"
#include "instructlr/seed_gen.hpp"
#include "instructlr/service.hpp"

namespace fs = std::filesystem;
using namespace instructlr;

namespace {

void write_text(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
}

int run_stages(const fs::path& config_path, std::set<std::string> only, bool force) {
  auto config = load_config(config_path);
  RunOptions opt;
  opt.only = std::move(only);
  opt.force = force;
  auto report = run_pipeline(config, opt);
  for (const auto& s : report.stages) {
    if (s.status == "not_run") continue;
    fmt::print("{:<7} {:<8} count={} retries={} failures={} {:.0f}ms{}\n", s.name, s.status, s.count, s.retries,
               s.failures, s.elapsed_ms, s.error.empty() ? "" : "  error: " + s.error);
  }
  return report.ok() ? 0 : 1;
}

/// Gateway selection for the direct-mode stage commands.
struct GatewayArgs {
  std::string backend_kind = "replay";
  fs::path replay_dir = "replay";
  std::string url, model;
  double rpm = 60.0;

  void add(CLI::App* sub) {
    sub->add_option("--backend", backend_kind, "replay, remote or record")
        ->check(CLI::IsMember({"replay", "remote", "record"}));
    sub->add_option("--replay-dir", replay_dir, "recorded completions");
    sub->add_option("--url", url, "chat-completions endpoint (remote, record)");
    sub->add_option("--model", model, "model name (remote, record)");
    sub->add_option("--rpm", rpm, "requests per minute (remote, record)");
  }

  std::shared_ptr<Backend> backend() const {
    PipelineConfig c;
    c.backend = backend_kind == "remote" ? BackendKind::remote
                : backend_kind == "record" ? BackendKind::record
                                           : BackendKind::replay;
    c.replay_dir = replay_dir;
    c.url = url;
    c.model = model;
    c.requests_per_minute = rpm;
    return make_backend(c);
  }
};

/// Resume journal kept next to a direct-mode output until it is written.
fs::path checkpoint_for(const fs::path& out) {
  auto p = out;
  p += ".checkpoint";
  return p;
}

void require_direct(std::initializer_list<std::pair<const char*, bool>> given) {
  for (const auto& [flag, ok] : given)
    if (!ok) throw CLI::ValidationError(flag, "required with --out");
}

std::map<std::string, Draft> originals_of(const std::vector<CheckedDraft>& checked) {
  std::map<std::string, Draft> m;
  for (const auto& c : checked) m.emplace(c.draft.id, c.draft);
  return m;
}

ReviewServer* g_server = nullptr;
extern "C" void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"instructlr: instruction dataset pipeline for low-resource languages"};
  app.require_subcommand(1);

  fs::path config_path = "pipeline.toml";
  bool force = false;
  auto stage_mode = [&](CLI::App* sub, const std::string& stage) {
    sub->add_option("-c,--config", config_path, "pipeline configuration (stage mode)")->check(CLI::ExistingFile);
    sub->add_flag("--force", force, "rerun even when inputs are unchanged");
    return [&, stage] { throw CLI::RuntimeError(run_stages(config_path, {stage}, force)); };
  };

  // Direct mode: explicit input and output files instead of a configuration.
  GatewayArgs gw_args;
  fs::path topics_path, seeds_path, drafts_path, kb_path, lexicon_path, guidelines_path, exemplars_path, direct_out;
  std::size_t count = 0, workers = 4;
  int max_retries = 3;
  std::string lang = "dje", mode = "llm";

  auto* seed = app.add_subcommand("seed", "generate French seed instructions");
  auto seed_stage = stage_mode(seed, "seed");
  seed->add_option("--topics", topics_path, "topic catalog (JSON)")->check(CLI::ExistingFile);
  seed->add_option("--count", count, "total seeds, split equally across topics")->check(CLI::PositiveNumber);
  auto* seed_out = seed->add_option("--out", direct_out, "seeds.jsonl");
  seed->add_option("--workers", workers, "parallel requests")->check(CLI::PositiveNumber);
  seed->add_option("--max-retries", max_retries, "regenerations per slot");
  gw_args.add(seed);
  seed->callback([&, seed_out] {
    if (!*seed_out) seed_stage();
    require_direct({{"--topics", !topics_path.empty()}, {"--count", count > 0}});
    auto catalog = TopicCatalog::load(topics_path.string());
    Gateway gw(gw_args.backend());
    SeedGenOptions opt;
    opt.workers = workers;
    opt.max_retries = max_retries;
    opt.checkpoint = checkpoint_for(direct_out);
    auto result = generate_seeds(SeedBatchPlan::equal_split(catalog, count), catalog, gw, opt);
    write_jsonl(result.seeds, direct_out);
    fs::remove(*opt.checkpoint);
    std::cout << result.report.to_json().dump(2) << '\n';
  });

  auto* draft = app.add_subcommand("draft", "generate target-language drafts from seeds");
  auto draft_stage = stage_mode(draft, "draft");
  draft->add_option("--seeds", seeds_path, "seeds.jsonl")->check(CLI::ExistingFile);
  draft->add_option("--lang", lang, "target language code");
  draft->add_option("--topics", topics_path, "topic catalog (default data/topics.json)")->check(CLI::ExistingFile);
  draft->add_option("--guidelines", guidelines_path, "guideline file (default data/guidelines/<lang>.txt)")
      ->check(CLI::ExistingFile);
  auto* draft_out = draft->add_option("--out", direct_out, "drafts.jsonl");
  draft->add_option("--workers", workers, "parallel requests")->check(CLI::PositiveNumber);
  draft->add_option("--max-retries", max_retries, "regenerations per seed");
  gw_args.add(draft);
  draft->callback([&, draft_out] {
    if (!*draft_out) draft_stage();
    require_direct({{"--seeds", !seeds_path.empty()}});
    LanguageRegistry langs;
    auto code = langs.require(lang);
    if (topics_path.empty()) topics_path = fs::path("data") / "topics.json";
    if (guidelines_path.empty()) guidelines_path = fs::path("data") / "guidelines" / (code.code + ".txt");
    Gateway gw(gw_args.backend());
    DraftGenOptions opt;
    opt.workers = workers;
    opt.max_retries = max_retries;
    opt.checkpoint = checkpoint_for(direct_out);
    auto result = generate_drafts(read_jsonl<SeedInstruction>(seeds_path), TopicCatalog::load(topics_path.string()), code,
                                  langs.display_name(code), load_guidelines(guidelines_path), gw, opt);
    write_jsonl(result.drafts, direct_out);
    fs::remove(*opt.checkpoint);
    std::cout << result.report.to_json().dump(2) << '\n';
  });

  auto* check = app.add_subcommand("check", "run the automated checker and triage");
  auto check_stage = stage_mode(check, "check");
  check->add_option("--in", drafts_path, "drafts.jsonl")->check(CLI::ExistingFile);
  check->add_option("--kb", kb_path, "knowledge-base directory")->check(CLI::ExistingDirectory);
  check->add_option("--lexicon", lexicon_path, "lexicon TSV")->check(CLI::ExistingFile);
  check->add_option("--lang", lang, "target language code");
  check->add_option("--mode", mode, "llm or rules_only")->check(CLI::IsMember({"llm", "rules_only"}));
  check->add_option("--exemplars", exemplars_path, "worked examples (default data/checker/exemplars.json)")
      ->check(CLI::ExistingFile);
  auto* check_out = check->add_option("--out", direct_out, "checked.jsonl");
  check->add_option("--workers", workers, "parallel requests")->check(CLI::PositiveNumber);
  check->add_option("--max-retries", max_retries, "re-asks after unparseable checker output");
  gw_args.add(check);
  check->callback([&, check_out] {
    if (!*check_out) check_stage();
    require_direct({{"--in", !drafts_path.empty()}, {"--kb", !kb_path.empty()}, {"--lexicon", !lexicon_path.empty()}});
    LanguageRegistry langs;
    auto code = langs.require(lang);
    auto kb = KnowledgeBase::load(kb_path, code);
    auto lex = ZarmaLexicon::load(lexicon_path);
    CheckerOptions co;
    co.mode = mode == "llm" ? CheckerMode::llm : CheckerMode::rules_only;
    co.language_name = langs.display_name(code);
    co.max_retries = max_retries;
    std::optional<Gateway> gw;
    std::vector<CheckerExemplar> exemplars;
    if (co.mode == CheckerMode::llm) {
      gw.emplace(gw_args.backend());
      exemplars = load_exemplars(exemplars_path.empty() ? fs::path("data") / "checker" / "exemplars.json" : exemplars_path);
    }
    Checker checker(kb, lex, gw ? &*gw : nullptr, std::move(exemplars), co);
    BatchOptions bo;
    bo.workers = workers;
    bo.checkpoint = checkpoint_for(direct_out);
    auto result = run_batch(read_jsonl<Draft>(drafts_path), checker, bo);
    write_jsonl(result.checked, direct_out);
    fs::remove(*bo.checkpoint);
    std::cout << result.summary.to_json().dump(2) << '\n';
  });

  auto* run = app.add_subcommand("run", "run every pipeline stage");
  run->add_option("-c,--config", config_path, "pipeline configuration")->check(CLI::ExistingFile);
  run->add_flag("--force", force, "rerun every stage");
  run->callback([&] { throw CLI::RuntimeError(run_stages(config_path, {}, force)); });

  fs::path checked_path, out_path, journal_path, csv_path, in_path, scenarios_path;
  std::vector<std::string> statuses;
  std::size_t batch_size = 200;
  auto* exp = app.add_subcommand("export-review", "write review sheets for flagged drafts");
  exp->add_option("--checked", checked_path, "checked.jsonl")->required()->check(CLI::ExistingFile);
  exp->add_option("--out", out_path, "output directory")->required();
  exp->add_option("--status", statuses, "statuses to include (default: top_priority low_priority)");
  exp->add_option("--batch-size", batch_size, "rows per sheet")->check(CLI::PositiveNumber);
  exp->callback([&] {
    ReviewExportOptions opt;
    opt.batch_size = batch_size;
    if (!statuses.empty()) {
      opt.statuses.clear();
      for (const auto& s : statuses) {
        auto st = parse_triage_status(s);
        if (!st) throw CLI::ValidationError("--status", "unknown status " + s);
        opt.statuses.insert(*st);
      }
    }
    auto files = export_review_sheet(read_jsonl<CheckedDraft>(checked_path), out_path, opt);
    for (const auto& f : files) fmt::print("{}\n", f.string());
  });

  std::string annotator;
  auto* imp = app.add_subcommand("import-review", "validate a filled review sheet and append it to the journal");
  imp->add_option("--annotator", annotator, "annotator id")->required();
  imp->add_option("--csv", csv_path, "filled review sheet")->required()->check(CLI::ExistingFile);
  imp->add_option("--checked", checked_path, "checked.jsonl, for draft-id validation")->check(CLI::ExistingFile);
  imp->add_option("--journal", journal_path, "annotation journal")->required();
  imp->callback([&] {
    std::set<std::string> known;
    if (!checked_path.empty())
      for (const auto& c : read_jsonl<CheckedDraft>(checked_path)) known.insert(c.draft.id);
    auto result = import_annotations_file(csv_path, annotator, known);
    for (const auto& r : result.records) append_annotation(journal_path, r);
    for (const auto& e : result.errors)
      fmt::print(stderr, "line {}: {} [{}] {}\n", e.line, e.draft_id, e.field, e.message);
    fmt::print("imported {} records, {} row errors\n", result.records.size(), result.errors.size());
    if (!result.errors.empty()) throw CLI::RuntimeError(1);
  });

  auto* merge = app.add_subcommand("merge", "majority-vote the annotation journal");
  merge->add_option("--journal", journal_path, "annotation journal")->required()->check(CLI::ExistingFile);
  merge->add_option("--checked", checked_path, "checked.jsonl, for original texts")->check(CLI::ExistingFile);
  merge->add_option("--out", out_path, "merged CSV (default: stdout)");
  merge->callback([&] {
    std::map<std::string, Draft> originals;
    if (!checked_path.empty()) originals = originals_of(read_jsonl<CheckedDraft>(checked_path));
    auto csv = render_merge_csv(merge_annotations(read_jsonl<AnnotationRecord>(journal_path), originals));
    if (out_path.empty())
      std::cout << csv;
    else
      write_text(out_path, csv);
  });

  bool as_json = false;
  auto* stats = app.add_subcommand("stats", "dataset and triage statistics");
  stats->add_option("--in", in_path, "final.jsonl or drafts.jsonl")->required()->check(CLI::ExistingFile);
  stats->add_option("--checked", checked_path, "checked.jsonl, adds the triage table")->check(CLI::ExistingFile);
  stats->add_option("--journal", journal_path, "annotation journal, adds human outcomes")->check(CLI::ExistingFile);
  stats->add_flag("--json", as_json, "print JSON");
  stats->callback([&] {
    auto ds = dataset_stats(read_jsonl<Draft>(in_path));
    std::optional<TriageStats> ts;
    if (!checked_path.empty()) {
      auto checked = read_jsonl<CheckedDraft>(checked_path);
      std::vector<MergeDecision> decisions;
      if (!journal_path.empty())
        decisions = merge_annotations(read_jsonl<AnnotationRecord>(journal_path), originals_of(checked));
      ts = triage_stats(checked, decisions);
    }
    if (as_json) {
      Json j = {{"dataset", ds.to_json()}};
      if (ts) j["triage"] = ts->to_json();
      std::cout << j.dump(2) << '\n';
    } else {
      std::cout << render_stats_table(ds, ts ? &*ts : nullptr);
    }
  });

  std::string preset;
  auto* cost = app.add_subcommand("cost", "production cost scenarios");
  cost->add_option("--scenarios", scenarios_path, "scenario presets (JSON)")->required()->check(CLI::ExistingFile);
  cost->add_option("--out", out_path, "CSV output");
  cost->add_option("--preset", preset, "reviewed-pairs preset name");
  cost->callback([&] {
    auto set = CostModelSet::load(scenarios_path);
    if (!preset.empty()) set.use_preset(preset);
    auto rows = scenario_table(set);
    if (!out_path.empty()) write_text(out_path, render_cost_csv(rows));
    std::cout << render_cost_text(rows);
  });

  std::size_t items = 0;
  auto* agree = app.add_subcommand("agreement", "Krippendorff's alpha over the annotation journal");
  agree->add_option("--journal", journal_path, "annotation journal")->required()->check(CLI::ExistingFile);
  agree->add_option("--items", items, "use only the first N multiply-annotated drafts (0 = all)");
  agree->callback([&] {
    auto rep = annotation_agreement(read_jsonl<AnnotationRecord>(journal_path), items);
    std::cout << rep.to_json().dump(2) << '\n';
  });

  int port_override = -1;
  auto* serve = app.add_subcommand("serve", "HTTP review service");
  serve->add_option("-c,--config", config_path, "pipeline configuration")->check(CLI::ExistingFile);
  serve->add_option("--port", port_override, "listen port (overrides [serve] port)");
  serve->callback([&] {
    auto config = load_config(config_path);
    WorkLayout layout{config.work_dir};
    ServiceOptions so;
    so.token = config.token;
    so.lease = std::chrono::minutes(config.lease_minutes);
    ReviewService service(read_jsonl<CheckedDraft>(layout.checked()), config.annotations_path(), so);
    ReviewServer server(service);
    int port = server.bind(config.host, port_override >= 0 ? port_override : config.port);
    fmt::print("serving on http://{}:{}\n", config.host, port);
    std::fflush(stdout);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    server.listen();
    g_server = nullptr;
  });

  try {
    CLI11_PARSE(app, argc, argv);
  } catch (const instructlr::Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return 0;
}
