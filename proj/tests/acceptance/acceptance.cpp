// Acceptance suite: one PASS/FAIL line per primary criterion. Exit status is the number of failures.
#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "instructlr/agreement.hpp"
#include "instructlr/analytics.hpp"
#include "instructlr/annotation.hpp"
#include "instructlr/checker.hpp"
#include "instructlr/cost.hpp"
#include "instructlr/csv.hpp"
#include "instructlr/error.hpp"
#include "instructlr/gleu.hpp"
#include "instructlr/grammar.hpp"
#include "instructlr/jsonl.hpp"
#include "instructlr/pipeline.hpp"
#include "instructlr/retrieval.hpp"
#include "instructlr/text.hpp"
#include "support.hpp"

using namespace instructlr;
using namespace testsupport;

namespace {

// Tolerances.
constexpr double kMoneyTol = 1e-9;
constexpr double kSavingPct = 87.8;
constexpr double kSavingTolPct = 0.1;
constexpr double kCostRuntimeSeconds = 1.0;
constexpr double kAlphaTol = 1e-9;
constexpr double kAlphaNoiseBound = 0.02;
constexpr double kGleuTol = 1e-12;
constexpr double kPercentTol = 0.005;  // two decimals

/// A failed expectation; the message becomes the FAIL line's detail.
void expect(bool ok, const std::string& what) {
  if (!ok) throw std::runtime_error(what);
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

struct Resources {
  KnowledgeBase kb = KnowledgeBase::load(data_dir() / "kb", LanguageCode{"dje"});
  ZarmaLexicon lex = ZarmaLexicon::load(data_dir() / "lexicon" / "dje.tsv");
  std::vector<CheckerExemplar> exemplars = load_exemplars(data_dir() / "checker" / "exemplars.json");
};

const Resources& res() {
  static const Resources r;
  return r;
}

// ---------------------------------------------------------------- cost

std::string cost_model() {
  auto start = std::chrono::steady_clock::now();
  CostScenario s;
  s.model_name = "Gemini 2.5 Pro";
  s.price_per_million_tokens = 12.0;
  s.reviewed_pairs = 6000;
  s.qc_mode = QcMode::full_human;
  auto full = scenario_cost(s);
  s.qc_mode = QcMode::instructlr;
  auto ours = scenario_cost(s);
  auto table = scenario_table(CostModelSet::load(data_dir() / "scenarios.json"));
  double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  expect(near(s.tokens_per_pair * s.total_pairs, 3.75e6, kMoneyTol), "token volume is not 3.75M");
  expect(near(full.human_cost, 20000.0, kMoneyTol), fmt::format("full human labor {}", full.human_cost));
  expect(near(ours.human_cost, 2400.0, kMoneyTol), fmt::format("reviewed labor {}", ours.human_cost));
  expect(near(ours.llm_cost, 45.0, kMoneyTol), fmt::format("model cost {}", ours.llm_cost));
  expect(near(ours.total_cost, 2445.0, kMoneyTol), fmt::format("total {}", ours.total_cost));
  double pct = ours.saving_vs_full_human * 100.0;
  expect(near(pct, kSavingPct, kSavingTolPct), fmt::format("saving {:.3f}%", pct));
  auto it = std::find_if(table.begin(), table.end(), [](const CostBreakdown& b) {
    return b.model_name == "Gemini 2.5 Pro" && b.qc_mode == QcMode::instructlr;
  });
  expect(it != table.end() && near(it->total_cost, 2445.0, kMoneyTol), "shipped scenarios lack the $2,445 row");
  expect(elapsed < kCostRuntimeSeconds, fmt::format("took {:.3f}s", elapsed));
  return fmt::format("full=${:.2f} llm=${:.2f} human=${:.2f} total=${:.2f} saving={:.2f}% in {:.1f}ms", full.human_cost,
                     ours.llm_cost, ours.human_cost, ours.total_cost, pct, elapsed * 1000);
}

// ---------------------------------------------------------------- grammar

std::string option1(std::string_view s) {
  const auto& r = res();
  auto o = suggest(s, check(s, r.lex, r.kb.glossary()), r.lex, r.kb.glossary());
  return o.empty() ? std::string() : o.front().text;
}

std::string grammar_golden() {
  const std::pair<const char*, const char*> cases[] = {
      {"Ay na hansi di", "Ay na hanso di"},
      {"Suba, a koy Niamey", "Suba, a ga koy Niamey"},
      {"Iri ga barma te", "Iri ga barna te"},
      {"Demain, a koy Niamey", "Suba, a ga koy Niamey"},
  };
  for (const auto& [wrong, right] : cases) {
    auto got = option1(wrong);
    expect(got == right, fmt::format("\"{}\" gave \"{}\"", wrong, got));
    expect(check(got, res().lex, res().kb.glossary()).empty(), fmt::format("\"{}\" still has violations", got));
  }
  const char* calque = "Boro fo kaŋ ga ti alfa go no.";
  expect(check(calque, res().lex, res().kb.glossary()).empty(), "calque sentence was flagged by the rule engine");
  return "4/4 Option 1 exact, calque not flagged";
}

std::string rule_examples() {
  const auto& r = res();
  std::size_t clean = 0, flagged = 0;
  for (const auto& rule : r.kb.rules()) {
    for (const auto& ex : rule.examples) {
      auto v = check(ex.right, r.lex, r.kb.glossary());
      expect(v.empty(), fmt::format("rule {} right-hand \"{}\" has {} violation(s)", rule.id, ex.right, v.size()));
      ++clean;
      if (ex.wrong) {
        expect(!check(*ex.wrong, r.lex, r.kb.glossary()).empty(),
               fmt::format("rule {} wrong-hand \"{}\" not flagged", rule.id, *ex.wrong));
        ++flagged;
      }
    }
  }
  expect(clean >= 35, fmt::format("only {} right-hand examples", clean));
  expect(flagged > 0, "no wrong-hand examples");
  return fmt::format("{} right-hand clean (false positive rate 0.0), {} wrong-hand flagged", clean, flagged);
}

// ---------------------------------------------------------------- triage

CheckerAnalysis analysis(bool correct, std::size_t options) {
  CheckerAnalysis a;
  a.is_correct = correct;
  if (!correct) {
    a.reason = "r";
    for (std::size_t i = 0; i < options; ++i) a.options.push_back({"fix " + std::to_string(i + 1), ""});
  }
  return a;
}

Draft numbered_draft(std::size_t i) {
  Draft d;
  d.id = fmt::format("dje-s06-{:04}", i);
  d.instr_fr = "Calcule.";
  d.instr_lrl = "Instr " + std::to_string(i);
  d.resp_lrl = "Resp " + std::to_string(i);
  d.topic_fr = "Mathématiques";
  d.lang = LanguageCode{"dje"};
  return d;
}

std::string triage_mapping() {
  Rng rng(1001);
  Draft d = numbered_draft(0);
  for (int i = 0; i < 10000; ++i) {
    bool ok = rng() % 2;
    std::size_t opts = rng() % 4;
    auto a = analysis(ok, opts);
    auto want = ok ? TriageStatus::accepted : opts ? TriageStatus::low_priority : TriageStatus::top_priority;
    expect(field_status(a) == want, fmt::format("field_status mismatch at case {}", i));
    expect(triage(d, {{"resp_lrl", a}}).status == want, fmt::format("triage mismatch at case {}", i));
  }

  // Scripted 1,000-draft run: 858 accepted, 51 corrected, 91 without a usable correction.
  constexpr std::size_t kAccepted = 858, kLow = 51, kTop = 91, kTotal = kAccepted + kLow + kTop;
  std::vector<Draft> drafts;
  for (std::size_t i = 0; i < kTotal; ++i) drafts.push_back(numbered_draft(i));
  Gateway gw(std::make_shared<CallbackBackend>([&](const GenerationRequest& rq) {
    auto id = rq.request_tag.substr(6, rq.request_tag.find(':', 6) - 6);
    auto field = rq.request_tag.substr(rq.request_tag.rfind(':') + 1);
    std::size_t i = std::stoul(id.substr(id.size() - 4));
    if (i < kAccepted) return render_checker_output(analysis(true, 0));
    if (i < kAccepted + kLow) return render_checker_output(analysis(field != "resp_lrl", 2));
    return render_checker_output(analysis(false, field == "instr_lrl" ? 0 : 1));
  }));
  const auto& r = res();
  auto result = run_batch(drafts, Checker(r.kb, r.lex, &gw, r.exemplars));
  const auto& s = result.summary;
  double want_acc = 100.0 * kAccepted / kTotal, want_low = 100.0 * kLow / kTotal, want_top = 100.0 * kTop / kTotal;
  expect(s.accepted == kAccepted && s.low_priority == kLow && s.top_priority == kTop,
         fmt::format("counts {}/{}/{}", s.accepted, s.low_priority, s.top_priority));
  expect(near(s.accepted_pct, want_acc, kPercentTol) && near(s.low_pct, want_low, kPercentTol) &&
             near(s.top_pct, want_top, kPercentTol),
         fmt::format("percentages {:.2f}/{:.2f}/{:.2f}", s.accepted_pct, s.low_pct, s.top_pct));
  return fmt::format("10000 random analyses mapped; scripted run {:.2f}/{:.2f}/{:.2f}% (reference 85.80/5.07/9.13)",
                     s.accepted_pct, s.low_pct, s.top_pct);
}

// ---------------------------------------------------------------- agreement

double oracle_alpha(const ReliabilityMatrix& m) {
  std::vector<std::vector<int>> units;
  for (const auto& row : m) {
    std::vector<int> u;
    for (const auto& c : row)
      if (c) u.push_back(*c);
    if (u.size() >= 2) units.push_back(u);
  }
  std::vector<int> all;
  for (const auto& u : units) all.insert(all.end(), u.begin(), u.end());
  double n = static_cast<double>(all.size());
  double observed = 0;
  for (const auto& u : units) {
    double d = 0;
    for (std::size_t i = 0; i < u.size(); ++i)
      for (std::size_t j = 0; j < u.size(); ++j)
        if (i != j && u[i] != u[j]) d += 1;
    observed += d / static_cast<double>(u.size() - 1);
  }
  observed /= n;
  double expected = 0;
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = 0; j < all.size(); ++j)
      if (i != j && all[i] != all[j]) expected += 1;
  expected /= n * (n - 1);
  return expected == 0 ? 1.0 : 1.0 - observed / expected;
}

ReliabilityMatrix random_matrix(Rng& rng, std::size_t items, std::size_t raters, int labels, double missing) {
  std::uniform_real_distribution<double> u(0, 1);
  ReliabilityMatrix m(items, std::vector<std::optional<int>>(raters));
  for (auto& row : m)
    for (auto& c : row)
      if (u(rng) >= missing) c = static_cast<int>(rng() % static_cast<unsigned>(labels));
  return m;
}

bool pairable(const ReliabilityMatrix& m) {
  return std::any_of(m.begin(), m.end(), [](const auto& row) {
    return std::count_if(row.begin(), row.end(), [](const auto& c) { return c.has_value(); }) >= 2;
  });
}

std::string agreement() {
  Rng rng(73);
  std::size_t compared = 0;
  double worst = 0;
  while (compared < 200) {
    auto m = random_matrix(rng, 5 + rng() % 46, 2 + rng() % 4, 2 + static_cast<int>(rng() % 4), 0.25);
    if (compared % 2)
      for (auto& row : m)
        for (auto& c : row)
          if (c && rng() % 2) c = row[0].value_or(*c);
    if (!pairable(m)) continue;
    double diff = std::abs(krippendorff_alpha(m) - oracle_alpha(m));
    worst = std::max(worst, diff);
    expect(diff <= kAlphaTol, fmt::format("matrix {} differs by {:.3e}", compared, diff));
    ++compared;
  }
  ReliabilityMatrix perfect = {{1, 1, 1}, {0, 0, std::nullopt}, {3, 3, 3}};
  expect(krippendorff_alpha(perfect) == 1.0, "perfect agreement is not 1.0");
  auto noise = random_matrix(rng, 10000, 3, 5, 0.1);
  double a = krippendorff_alpha(noise);
  expect(std::abs(a) < kAlphaNoiseBound, fmt::format("random ratings alpha {:.4f}", a));
  return fmt::format("200 matrices within {:.1e} of the pairwise oracle, perfect=1.0, random 10k alpha={:.4f}", worst, a);
}

// ---------------------------------------------------------------- GLEU

double oracle_gleu(const std::string& hyp_s, const std::string& ref_s) {
  auto hyp = text::split_whitespace(hyp_s);
  auto ref = text::split_whitespace(ref_s);
  auto grams = [](const std::vector<std::string>& t, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i + n <= t.size(); ++i) {
      std::string g;
      for (std::size_t k = 0; k < n; ++k) g += t[i + k] + '\x1f';
      out.push_back(g);
    }
    return out;
  };
  double product = 1.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    auto h = grams(hyp, n), r = grams(ref, n);
    std::vector<bool> used(r.size(), false);
    double match = 0;
    for (const auto& g : h)
      for (std::size_t j = 0; j < r.size(); ++j)
        if (!used[j] && r[j] == g) {
          used[j] = true;
          ++match;
          break;
        }
    double hn = static_cast<double>(h.size()), rn = static_cast<double>(r.size());
    product *= match > 0 ? std::min(match / hn, match / rn) : std::min(1.0 / (hn + 1), 1.0 / (rn + 1));
  }
  return std::pow(product, 0.25);
}

std::string gleu_and_evaluation() {
  expect(gleu("Suba, a ga koy Niamey", "Suba, a ga koy Niamey") == 1.0, "identity is not 1.0");
  Rng rng(5150);
  double worst = 0;
  for (int i = 0; i < 500; ++i) {
    auto h = random_sentence(rng, 0, 12, 4);
    auto r = random_sentence(rng, 1, 12, 4);
    double diff = std::abs(gleu(h, r) - oracle_gleu(h, r));
    worst = std::max(worst, diff);
    expect(diff <= kGleuTol, fmt::format("pair {} differs by {:.3e}", i, diff));
  }

  std::vector<EvalItem> items = {
      {"Suba, a koy Niamey", std::string("Suba, a ga koy Niamey")},
      {"Ay na hansi di", std::string("Ay na hanso di")},
      {"Iri ga barma te", std::string("Iri ga barna te")},
      {"A ga koy Niamey", std::nullopt},
      {"Iri ga barna te", std::nullopt},
  };
  std::map<std::string, std::string> gold;
  for (const auto& it : items)
    if (it.gold) gold[it.sentence] = *it.gold;
  auto echo = evaluate_checker(items, [&](std::string_view s) {
    auto it = gold.find(std::string(s));
    if (it == gold.end()) return CheckerAnalysis{};
    CheckerAnalysis a;
    a.is_correct = false;
    a.options = {{it->second, ""}};
    return a;
  });
  expect(echo.mean_gleu == 1.0 && echo.exact_match_rate == 1.0 && echo.false_positive_rate == 0.0,
         fmt::format("echo-gold {}/{}/{}", echo.mean_gleu, echo.exact_match_rate, echo.false_positive_rate));
  auto yes = evaluate_checker(items, [](std::string_view) { return CheckerAnalysis{}; });
  expect(yes.false_positive_rate == 0.0 && yes.exact_match_rate == 0.0,
         fmt::format("always-yes FPR {} match {}", yes.false_positive_rate, yes.exact_match_rate));
  return fmt::format("identity=1.0, 500 pairs within {:.1e} of the oracle; echo-gold 1.0/1.0/0.0, always-yes FPR 0.0 match 0.0",
                     worst);
}

// ---------------------------------------------------------------- end to end

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    auto rel = fs::relative(e.path(), dir).generic_string();
    if (rel != "report.json") out[rel] = read_file(e.path());
  }
  return out;
}

class FailingAfter : public Backend {
 public:
  FailingAfter(std::shared_ptr<Backend> inner, int limit) : inner_(std::move(inner)), left_(limit) {}
  std::string complete(const GenerationRequest& r) override {
    if (left_.fetch_sub(1) <= 0) throw GatewayError("interrupted", false);
    return inner_->complete(r);
  }

 private:
  std::shared_ptr<Backend> inner_;
  std::atomic<int> left_;
};

std::string end_to_end() {
  TempDir a, b, c;
  auto ra = run_pipeline(reference_config(a.path(), reference_replay_dir()));
  expect(ra.ok(), "first run failed: " + ra.to_json().dump());
  auto rb = run_pipeline(reference_config(b.path(), reference_replay_dir()));
  expect(rb.ok(), "second run failed");
  auto sa = snapshot(a.path());
  expect(sa == snapshot(b.path()), "two runs differ");

  auto cfg = reference_config(c.path(), reference_replay_dir());
  cfg.workers = 1;
  auto replay = std::make_shared<ReplayBackend>(std::make_shared<ReplayStore>(reference_replay_dir()));
  auto broken = run_pipeline(cfg, {std::make_shared<FailingAfter>(replay, 33), {}, false});
  expect(!broken.ok(), "interrupt did not stop the run");
  auto resumed = run_pipeline(cfg);
  expect(resumed.ok(), "resume failed");
  expect(snapshot(c.path()) == sa, "resumed run differs");

  auto final_set = read_jsonl<Draft>(a / "final.jsonl");
  auto stats = dataset_stats(final_set);
  expect(final_set.size() == 20, fmt::format("{} final records", final_set.size()));
  expect(stats.cot_count == 4, fmt::format("cot_count {}", stats.cot_count));
  return fmt::format("{} files byte-identical across runs and resume; 20 records, cot_count=4", sa.size());
}

// ---------------------------------------------------------------- CSV round trip

std::string csv_round_trip() {
  const std::vector<std::string> columns = {"draft_id",          "instruction_lrl",    "response_lrl",
                                            "rag_status",        "is_correct",         "corrected_instruction",
                                            "corrected_response", "error_category",    "comments"};
  std::vector<std::string> shipped(kReviewColumns.begin(), kReviewColumns.end());
  expect(shipped == columns, "review columns differ from the documented list");

  std::vector<CheckedDraft> checked;
  for (std::size_t i = 0; i < 12; ++i) {
    CheckedDraft cd;
    cd.draft = numbered_draft(i);
    cd.draft.resp_lrl = fmt::format("Resp, \"{}\"\nline two é ŋ", i);
    cd.status = i % 3 == 0 ? TriageStatus::accepted : i % 3 == 1 ? TriageStatus::low_priority : TriageStatus::top_priority;
    checked.push_back(cd);
  }
  ReviewExportOptions opt;
  opt.batch_size = 5;
  TempDir dir;
  auto files = export_review_sheet(checked, dir.path(), opt);
  expect(files.size() == 2, fmt::format("{} review files", files.size()));

  std::set<std::string> known;
  std::map<std::string, Draft> originals;
  for (const auto& c : checked) {
    known.insert(c.draft.id);
    originals.emplace(c.draft.id, c.draft);
  }
  std::vector<AnnotationRecord> expected;
  std::vector<AnnotationRecord> imported;
  std::size_t k = 0;
  for (const auto& f : files) {
    auto rows = csv::parse(read_file(f));
    expect(rows.at(0) == columns, "exported header differs");
    std::string filled = csv::format_row(rows[0]);
    for (std::size_t i = 1; i < rows.size(); ++i, ++k) {
      auto row = rows[i];
      const auto& orig = originals.at(row[0]);
      expect(row[1] == orig.instr_lrl && row[2] == orig.resp_lrl, "exported text differs for " + row[0]);
      AnnotationRecord rec;
      rec.draft_id = row[0];
      rec.annotator_id = "ana";
      rec.is_correct = k % 2 == 0;
      if (!rec.is_correct) {
        rec.corrected_instruction = fmt::format("Instr, \"{}\" corrigé", k);
        rec.corrected_response = fmt::format("Réponse {}\nsur deux lignes", k);
        rec.error_category = kAllErrorCategories[k % 4];
        rec.comments = "note; \"quoted\"";
      }
      row[4] = rec.is_correct ? "Yes" : "No";
      row[5] = rec.corrected_instruction.value_or("");
      row[6] = rec.corrected_response.value_or("");
      row[7] = rec.error_category ? std::string(to_label(*rec.error_category)) : "";
      row[8] = rec.comments.value_or("");
      filled += csv::format_row(row);
      expected.push_back(rec);
    }
    auto result = import_annotations(filled, "ana", known);
    expect(result.errors.empty(), fmt::format("{} import errors", result.errors.size()));
    imported.insert(imported.end(), result.records.begin(), result.records.end());
  }
  expect(imported == expected, "imported records differ from the filled sheet");

  auto journal = dir / "annotations.jsonl";
  for (const auto& r : imported) append_annotation(journal, r);
  expect(read_jsonl<AnnotationRecord>(journal) == expected, "journal round trip differs");

  auto decisions = merge_annotations(imported, originals);
  expect(decisions.size() == expected.size(), "merge lost drafts");
  for (const auto& rec : expected) {
    auto d = std::find_if(decisions.begin(), decisions.end(), [&](const MergeDecision& m) { return m.draft_id == rec.draft_id; });
    expect(d != decisions.end() && d->is_correct == rec.is_correct, "merge verdict differs for " + rec.draft_id);
    const auto& orig = originals.at(rec.draft_id);
    expect(d->final_instruction == (rec.is_correct ? orig.instr_lrl : *rec.corrected_instruction),
           "merged instruction differs for " + rec.draft_id);
    expect(d->final_response == (rec.is_correct ? orig.resp_lrl : *rec.corrected_response),
           "merged response differs for " + rec.draft_id);
    if (rec.error_category) expect(d->category_tally.at(*rec.error_category) == 1, "tally differs for " + rec.draft_id);
  }
  auto merged = csv::parse(render_merge_csv(decisions));
  expect(merged.size() == decisions.size() + 1, "merge CSV row count");
  return fmt::format("{} flagged rows exported in {} files, filled, imported and merged with every field intact",
                     expected.size(), files.size());
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<std::string()>>> criteria = {
      {"cost-model", cost_model},
      {"grammar-golden", grammar_golden},
      {"rule-examples", rule_examples},
      {"triage-mapping", triage_mapping},
      {"krippendorff-alpha", agreement},
      {"gleu-and-checker-eval", gleu_and_evaluation},
      {"e2e-replay", end_to_end},
      {"csv-round-trip", csv_round_trip},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    try {
      auto detail = run();
      std::cout << "PASS " << name << ": " << detail << '\n';
    } catch (const std::exception& e) {
      ++failures;
      std::cout << "FAIL " << name << ": " << e.what() << '\n';
    }
  }
  std::cout << fmt::format("{}/{} criteria passed\n", criteria.size() - failures, criteria.size());
  return failures;
}
