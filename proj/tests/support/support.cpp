#include "support.hpp"

#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include "instructlr/checker.hpp"
#include "instructlr/jsonl.hpp"
#include "instructlr/lexicon.hpp"
#include "instructlr/pipeline.hpp"
#include "instructlr/retrieval.hpp"

#ifndef INSTRUCTLR_SOURCE_DIR
#error "INSTRUCTLR_SOURCE_DIR must be defined"
#endif

using namespace instructlr;

namespace testsupport {

fs::path source_dir() { return fs::path(INSTRUCTLR_SOURCE_DIR); }
fs::path data_dir() { return source_dir() / "data"; }
fs::path fixtures_dir() { return source_dir() / "tests" / "fixtures"; }
fs::path reference_replay_dir() { return fixtures_dir() / "replay" / "reference"; }

TempDir::TempDir() {
  static std::mutex mu;
  static std::uint64_t counter = 0;
  std::lock_guard lock(mu);
  std::random_device rd;
  for (;;) {
    auto p = fs::temp_directory_path() / ("instructlr-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    if (fs::create_directories(p)) {
      path_ = p;
      return;
    }
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& content) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << content;
}

std::vector<SeedInstruction> reference_seeds() { return read_jsonl<SeedInstruction>(fixtures_dir() / "reference_seeds.jsonl"); }
std::vector<Draft> reference_drafts() { return read_jsonl<Draft>(fixtures_dir() / "reference_drafts.jsonl"); }

namespace {

class ReferenceModel : public Backend {
 public:
  ReferenceModel()
      : kb_(KnowledgeBase::load(data_dir() / "kb", LanguageCode{"dje"})),
        lex_(ZarmaLexicon::load(data_dir() / "lexicon" / "dje.tsv")),
        checker_(kb_, lex_, nullptr, {}, CheckerOptions{CheckerMode::rules_only}) {
    for (auto& s : reference_seeds()) seeds_.emplace(s.id, s);
    for (auto& d : reference_drafts()) drafts_.emplace(d.id, d);
  }

  std::string complete(const GenerationRequest& r) override {
    const auto& tag = r.request_tag;
    auto parts = split(tag);
    if (parts.size() == 2 && parts[0] == "seed") {
      const auto& s = seeds_.at(parts[1]);
      return "```json\n" + Json{{"instruction_fr", s.instruction_fr}, {"context_fr", s.context_fr}}.dump(2) + "\n```";
    }
    if (parts.size() == 2 && parts[0] == "draft") {
      const auto& d = drafts_.at("dje-" + parts[1]);
      return Json{{"instr_fr", d.instr_fr},
                  {"instr_lrl", d.instr_lrl},
                  {"resp_lrl", d.resp_lrl},
                  {"CoT_lrl", d.cot_lrl},
                  {"lang", d.lang.code}}
          .dump(2);
    }
    if (parts.size() == 3 && parts[0] == "check") {
      const auto& d = drafts_.at(parts[1]);
      const std::string& sentence = parts[2] == kFieldInstr ? d.instr_lrl : parts[2] == kFieldResp ? d.resp_lrl : d.cot_lrl;
      return render_checker_output(checker_.analyze(sentence, tag));
    }
    throw FixtureMissing(tag);
  }

 private:
  static std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
      if (c == ':') {
        out.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    out.push_back(cur);
    return out;
  }

  KnowledgeBase kb_;
  ZarmaLexicon lex_;
  Checker checker_;
  std::map<std::string, SeedInstruction> seeds_;
  std::map<std::string, Draft> drafts_;
};

}  // namespace

std::shared_ptr<Backend> reference_backend() { return std::make_shared<ReferenceModel>(); }

PipelineConfig reference_config(const fs::path& work_dir, const fs::path& replay_dir) {
  PipelineConfig c;
  c.lang = "dje";
  c.total_seeds = 20;
  c.workers = 4;
  c.data_dir = data_dir();
  c.work_dir = work_dir;
  c.backend = BackendKind::replay;
  c.replay_dir = replay_dir;
  c.checker_mode = CheckerMode::llm;
  return c;
}

void generate_reference_replay(const fs::path& replay_dir) {
  TempDir work;
  fs::create_directories(replay_dir);
  for (const auto& e : fs::directory_iterator(replay_dir)) fs::remove(e.path());
  auto store = std::make_shared<ReplayStore>(replay_dir);
  RunOptions opt;
  opt.backend = std::make_shared<RecordingBackend>(store, reference_backend());
  auto report = run_pipeline(reference_config(work.path(), replay_dir), opt);
  if (!report.ok()) throw std::runtime_error("replay generation failed: " + report.to_json().dump());
}

std::string random_word(Rng& rng, std::size_t min_len, std::size_t max_len, std::size_t alphabet) {
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<int> ch(0, static_cast<int>(alphabet) - 1);
  std::string w;
  for (std::size_t i = 0, n = len(rng); i < n; ++i) w += static_cast<char>('a' + ch(rng));
  return w;
}

std::string random_sentence(Rng& rng, std::size_t min_words, std::size_t max_words, std::size_t alphabet) {
  std::uniform_int_distribution<std::size_t> n(min_words, max_words);
  std::string s;
  for (std::size_t i = 0, k = n(rng); i < k; ++i) {
    if (i) s += ' ';
    s += random_word(rng, 1, 3, alphabet);
  }
  return s;
}

}  // namespace testsupport
