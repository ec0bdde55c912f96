#include "instructlr/pipeline.hpp"

#include <fmt/format.h>

#include <chrono>
#include <algorithm>
#include <cstdlib>
#include <functional>
#include <fstream>
#include <sstream>

#include "instructlr/checker.hpp"
#include "instructlr/checkpoint.hpp"
#include "instructlr/draft_gen.hpp"
#include "instructlr/error.hpp"
#include "instructlr/jsonl.hpp"
#include "instructlr/lexicon.hpp"
#include "instructlr/retrieval.hpp"
#include "instructlr/seed_gen.hpp"

namespace instructlr {

namespace fs = std::filesystem;

Json StageReport::to_json() const {
  Json j;
  j["stage"] = name;
  j["status"] = status;
  j["count"] = count;
  j["retries"] = retries;
  j["failures"] = failures;
  if (!error.empty()) j["error"] = error;
  j["elapsed_ms"] = elapsed_ms;
  if (!details.empty()) j["details"] = details;
  return j;
}

bool RunReport::ok() const {
  for (const auto& s : stages)
    if (s.status == "failed") return false;
  return true;
}

Json RunReport::to_json() const {
  Json j;
  j["ok"] = ok();
  j["stages"] = Json::array();
  for (const auto& s : stages) j["stages"].push_back(s.to_json());
  return j;
}

std::shared_ptr<Backend> make_backend(const PipelineConfig& c) {
  auto store = std::make_shared<ReplayStore>(c.replay_dir);
  if (c.backend == BackendKind::replay) return std::make_shared<ReplayBackend>(store);
  RemoteOptions ro;
  ro.url = c.url;
  ro.model = c.model;
  if (const char* key = std::getenv("INSTRUCTLR_API_KEY")) ro.api_key = key;
  ro.max_attempts = c.max_attempts;
  ro.requests_per_minute = c.requests_per_minute;
  ro.timeout_seconds = c.timeout_seconds;
  auto remote = std::make_shared<RemoteBackend>(std::move(ro));
  if (c.backend == BackendKind::remote) return remote;
  return std::make_shared<RecordingBackend>(store, remote);
}

std::vector<AnnotationRecord> load_annotations(const fs::path& journal) {
  if (!fs::exists(journal)) return {};
  return read_jsonl<AnnotationRecord>(journal);
}

std::vector<Draft> build_final(const std::vector<CheckedDraft>& checked, const std::vector<MergeDecision>& decisions) {
  std::map<std::string, const MergeDecision*> by_id;
  for (const auto& d : decisions)
    if (d.is_correct) by_id[d.draft_id] = &d;
  std::vector<Draft> out;
  for (const auto& c : checked) {
    if (auto it = by_id.find(c.draft.id); it != by_id.end()) {
      const auto& d = *it->second;
      Draft draft = c.draft;
      if (!*d.is_correct) {
        if (d.final_instruction) draft.instr_lrl = *d.final_instruction;
        if (d.final_response) draft.resp_lrl = *d.final_response;
      }
      out.push_back(std::move(draft));
      continue;
    }
    switch (c.status) {
      case TriageStatus::accepted: out.push_back(c.draft); break;
      case TriageStatus::low_priority: out.push_back(corrected_draft(c)); break;
      case TriageStatus::top_priority: break;
    }
  }
  return out;
}

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot open " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Hash over labelled parts; a missing file hashes as a marker so its later creation counts as a change.
class InputHash {
 public:
  InputHash& value(std::string_view label, const std::string& v) {
    buf_ += fmt::format("{}={}:{}\n", label, v.size(), v);
    return *this;
  }
  InputHash& file(std::string_view label, const fs::path& p) {
    return value(label, fs::exists(p) ? sha256_hex(read_file(p)) : std::string("<absent>"));
  }
  std::string digest() const { return sha256_hex(buf_); }

 private:
  std::string buf_;
};

std::string output_hash(const fs::path& p) {
  if (!fs::exists(p)) return {};
  if (!fs::is_directory(p)) return sha256_hex(read_file(p));
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(p))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  InputHash h;
  for (const auto& f : files) h.file(f.filename().string(), f);
  return h.digest();
}

class Manifest {
 public:
  explicit Manifest(fs::path path) : path_(std::move(path)) {
    if (fs::exists(path_)) {
      try {
        data_ = Json::parse(read_file(path_));
      } catch (const Json::exception&) {
        data_ = Json::object();  // unreadable manifest: every stage reruns
      }
    }
    if (!data_.is_object()) data_ = Json::object();
  }

  bool fresh(const std::string& stage, const std::string& inputs, const fs::path& output) const {
    auto it = data_.find(stage);
    if (it == data_.end() || !it->is_object()) return false;
    return it->value("inputs", "") == inputs && it->value("output", "") == output_hash(output) &&
           fs::exists(output);
  }

  void record(const std::string& stage, const std::string& inputs, const fs::path& output, std::size_t count) {
    data_[stage] = {{"inputs", inputs}, {"output", output_hash(output)}, {"count", count}};
    save();
  }

  void forget(const std::string& stage) {
    data_.erase(stage);
    save();
  }

  std::size_t count(const std::string& stage) const {
    auto it = data_.find(stage);
    return it == data_.end() ? 0 : it->value("count", std::size_t{0});
  }

 private:
  void save() const {
    fs::create_directories(path_.parent_path());
    auto tmp = path_;
    tmp += ".tmp";
    {
      // Stage order, so reruns do not reorder the file.
      Json ordered = Json::object();
      for (const char* name : kStages)
        if (auto it = data_.find(name); it != data_.end()) ordered[name] = *it;
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << ordered.dump(2) << '\n';
    }
    fs::rename(tmp, path_);
  }

  fs::path path_;
  Json data_ = Json::object();
};

struct Context {
  const PipelineConfig& config;
  WorkLayout layout;
  std::shared_ptr<Backend> backend;
  std::optional<TopicCatalog> topics;
  std::optional<Gateway> gateway;

  const TopicCatalog& catalog() {
    if (!topics) topics = TopicCatalog::load(config.topics_path().string());
    return *topics;
  }
  const Gateway& gw() {
    if (!gateway) gateway.emplace(backend ? backend : make_backend(config));
    return *gateway;
  }
  fs::path checkpoint(const std::string& stage, const std::string& inputs) const {
    return layout.checkpoints() / fmt::format("{}-{}.jsonl", stage, inputs.substr(0, 16));
  }
};

struct StageDef {
  std::string name;
  fs::path output;
  std::function<std::string(Context&)> inputs;
  std::function<void(Context&, const std::string& inputs, StageReport&)> run;
};

std::string seed_inputs(Context& cx) {
  const auto& c = cx.config;
  InputHash h;
  h.value("lang", c.lang).value("total", std::to_string(c.total_seeds)).value("retries", std::to_string(c.max_retries));
  h.value("jaccard", fmt::format("{}", c.duplicate_jaccard)).file("topics", c.topics_path());
  if (c.verbs) h.file("verbs", *c.verbs);
  return h.digest();
}

void run_seed(Context& cx, const std::string& inputs, StageReport& rep) {
  const auto& c = cx.config;
  SeedGenOptions opt;
  opt.max_retries = c.max_retries;
  opt.workers = c.workers;
  opt.duplicate_jaccard = c.duplicate_jaccard;
  if (c.verbs) opt.verbs = VerbLexicon::load(*c.verbs);
  auto journal = cx.checkpoint("seed", inputs);
  opt.checkpoint = journal;
  auto plan = SeedBatchPlan::equal_split(cx.catalog(), c.total_seeds);
  auto result = generate_seeds(plan, cx.catalog(), cx.gw(), opt);
  write_jsonl(result.seeds, cx.layout.seeds());
  CheckpointJournal(journal).remove();
  rep.count = result.seeds.size();
  rep.retries = result.report.retries;
  rep.failures = result.report.failed.size();
  rep.details = result.report.to_json();
}

std::string draft_inputs(Context& cx) {
  const auto& c = cx.config;
  return InputHash()
      .value("lang", c.lang)
      .value("retries", std::to_string(c.max_retries))
      .file("seeds", cx.layout.seeds())
      .file("topics", c.topics_path())
      .file("guidelines", c.guidelines_path())
      .digest();
}

void run_draft(Context& cx, const std::string& inputs, StageReport& rep) {
  const auto& c = cx.config;
  LanguageRegistry langs;
  auto lang = langs.require(c.lang);
  auto seeds = read_jsonl<SeedInstruction>(cx.layout.seeds());
  DraftGenOptions opt;
  opt.max_retries = c.max_retries;
  opt.workers = c.workers;
  auto journal = cx.checkpoint("draft", inputs);
  opt.checkpoint = journal;
  auto result = generate_drafts(seeds, cx.catalog(), lang, langs.display_name(lang), load_guidelines(c.guidelines_path()),
                                cx.gw(), opt);
  write_jsonl(result.drafts, cx.layout.drafts());
  CheckpointJournal(journal).remove();
  rep.count = result.drafts.size();
  rep.retries = result.report.retries;
  rep.failures = result.report.failures.size();
  rep.details = result.report.to_json();
}

std::string check_inputs(Context& cx) {
  const auto& c = cx.config;
  auto kb = c.kb_path();
  return InputHash()
      .value("lang", c.lang)
      .value("mode", c.checker_mode == CheckerMode::llm ? "llm" : "rules_only")
      .value("retrieved", std::to_string(c.retrieved_sentences))
      .value("n_shot", std::to_string(c.n_shot))
      .value("retries", std::to_string(c.max_retries))
      .file("drafts", cx.layout.drafts())
      .file("sentences", kb / "sentences.txt")
      .file("rules", kb / "rules" / (c.lang + ".json"))
      .file("glossary", kb / "glossary.tsv")
      .file("lexicon", c.lexicon_path())
      .file("exemplars", c.exemplars_path())
      .digest();
}

void run_check(Context& cx, const std::string& inputs, StageReport& rep) {
  const auto& c = cx.config;
  LanguageRegistry langs;
  auto lang = langs.require(c.lang);
  auto drafts = read_jsonl<Draft>(cx.layout.drafts());
  auto kb = KnowledgeBase::load(c.kb_path(), lang);
  auto lex = ZarmaLexicon::load(c.lexicon_path());
  CheckerOptions co;
  co.mode = c.checker_mode;
  co.retrieved_sentences = c.retrieved_sentences;
  co.n_shot = c.n_shot;
  co.language_name = langs.display_name(lang);
  co.max_retries = c.max_retries;
  const Gateway* gw = c.checker_mode == CheckerMode::llm ? &cx.gw() : nullptr;
  Checker checker(kb, lex, gw, load_exemplars(c.exemplars_path()), co);
  BatchOptions bo;
  bo.workers = c.workers;
  auto journal = cx.checkpoint("check", inputs);
  bo.checkpoint = journal;
  auto result = run_batch(drafts, checker, bo);
  write_jsonl(result.checked, cx.layout.checked());
  CheckpointJournal(journal).remove();
  rep.count = result.checked.size();
  rep.details = result.summary.to_json();
}

std::string export_inputs(Context& cx) {
  return InputHash()
      .value("batch", std::to_string(cx.config.batch_size))
      .file("checked", cx.layout.checked())
      .digest();
}

void run_export(Context& cx, const std::string&, StageReport& rep) {
  auto checked = read_jsonl<CheckedDraft>(cx.layout.checked());
  auto dir = cx.layout.review_dir();
  if (fs::exists(dir)) {
    for (const auto& e : fs::directory_iterator(dir))
      if (e.path().extension() == ".csv") fs::remove(e.path());
  }
  ReviewExportOptions opt;
  opt.batch_size = cx.config.batch_size;
  auto files = export_review_sheet(checked, dir, opt);
  rep.count = review_queue(checked, opt.statuses).size();
  rep.details = {{"files", files.size()}};
}

std::string final_inputs(Context& cx) {
  return InputHash()
      .file("checked", cx.layout.checked())
      .file("annotations", cx.config.annotations_path())
      .digest();
}

void run_final(Context& cx, const std::string&, StageReport& rep) {
  auto checked = read_jsonl<CheckedDraft>(cx.layout.checked());
  std::map<std::string, Draft> originals;
  for (const auto& c : checked) originals.emplace(c.draft.id, c.draft);
  auto decisions = merge_annotations(load_annotations(cx.config.annotations_path()), originals);
  auto final_set = build_final(checked, decisions);
  write_jsonl(final_set, cx.layout.final_dataset());
  std::size_t excluded = 0, pending = 0;
  std::set<std::string> decided;
  for (const auto& d : decisions) {
    if (d.is_correct) decided.insert(d.draft_id);
    if (d.needs_adjudication) ++pending;
  }
  for (const auto& c : checked)
    if (c.status == TriageStatus::top_priority && !decided.count(c.draft.id)) ++excluded;
  rep.count = final_set.size();
  rep.details = {{"human_decisions", decided.size()},
                 {"needs_adjudication", pending},
                 {"excluded_top_priority", excluded}};
}

}  // namespace

RunReport run_pipeline(const PipelineConfig& config, const RunOptions& options) {
  for (const auto& s : options.only)
    if (std::find_if(std::begin(kStages), std::end(kStages), [&](const char* n) { return s == n; }) ==
        std::end(kStages))
      throw ConfigError("unknown stage \"" + s + "\"");

  Context cx{config, WorkLayout{config.work_dir}, options.backend, {}, {}};
  fs::create_directories(cx.layout.dir);
  Manifest manifest(cx.layout.manifest());

  const std::vector<StageDef> stages = {
      {"seed", cx.layout.seeds(), seed_inputs, run_seed},
      {"draft", cx.layout.drafts(), draft_inputs, run_draft},
      {"check", cx.layout.checked(), check_inputs, run_check},
      {"export", cx.layout.review_dir(), export_inputs, run_export},
      {"final", cx.layout.final_dataset(), final_inputs, run_final},
  };

  RunReport report;
  bool halted = false;
  for (const auto& st : stages) {
    StageReport rep;
    rep.name = st.name;
    if (halted || (!options.only.empty() && !options.only.count(st.name))) {
      report.stages.push_back(std::move(rep));
      continue;
    }
    auto start = std::chrono::steady_clock::now();
    try {
      auto inputs = st.inputs(cx);
      if (!options.force && manifest.fresh(st.name, inputs, st.output)) {
        rep.status = "skipped";
        rep.count = manifest.count(st.name);
      } else {
        manifest.forget(st.name);
        st.run(cx, inputs, rep);
        manifest.record(st.name, inputs, st.output, rep.count);
        rep.status = "ran";
      }
    } catch (const std::exception& e) {
      rep.status = "failed";
      rep.error = e.what();
      halted = true;
    }
    rep.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    report.stages.push_back(std::move(rep));
  }

  std::ofstream out(cx.layout.report(), std::ios::binary | std::ios::trunc);
  out << report.to_json().dump(2) << '\n';
  return report;
}

}  // namespace instructlr
