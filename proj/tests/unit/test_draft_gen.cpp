#include <atomic>
#include <map>

#include "doctest.h"
#include "instructlr/draft_gen.hpp"
#include "instructlr/error.hpp"
#include "instructlr/jsonl.hpp"
#include "support.hpp"

using namespace instructlr;
using testsupport::TempDir;

namespace {

const LanguageCode kDje{"dje"};

TopicCatalog catalog() { return TopicCatalog::load((testsupport::data_dir() / "topics.json").string()); }

std::vector<std::string> guidelines() { return load_guidelines(testsupport::data_dir() / "guidelines" / "dje.txt"); }

std::string completion_for(const Draft& d) {
  return Json{{"instr_fr", d.instr_fr}, {"instr_lrl", d.instr_lrl}, {"resp_lrl", d.resp_lrl},
              {"CoT_lrl", d.cot_lrl}, {"lang", d.lang.code}}
      .dump();
}

/// Answers draft:<seed> with the matching reference row.
std::shared_ptr<Backend> reference_drafts_backend(std::atomic<int>* calls = nullptr,
                                                std::set<std::string> unavailable = {}) {
  std::map<std::string, std::string> answers;
  for (const auto& d : testsupport::reference_drafts()) answers["draft:" + d.id.substr(4)] = completion_for(d);
  return std::make_shared<CallbackBackend>([answers, calls, unavailable](const GenerationRequest& r) {
    if (calls) ++*calls;
    auto it = answers.find(r.request_tag);
    if (it == answers.end() || unavailable.count(r.request_tag)) throw FixtureMissing(r.request_tag);
    return it->second;
  });
}

std::string words(std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += i ? " koy" : "koy";
  return s;
}

}  // namespace

TEST_CASE("guidelines file loads one guideline per line") {
  auto g = guidelines();
  REQUIRE(g.size() == 5);
  CHECK(g[0] == "La instr_lrl DOIT être uniquement en Zarma.");
}

TEST_CASE("draft prompt carries the preamble, constraints, seed and guidelines") {
  SeedInstruction seed{"s06-0001", "Calcule 7 + 5.", "Mathématiques"};
  auto p = render_draft_prompt(seed, kDje, "Zarma", guidelines());
  auto t = p.text();
  CHECK(t.find("NE DOIVENT PAS DÉPASSER 100 MOTS") != std::string::npos);
  CHECK(t.find("spécifiquement pour le Zarma") != std::string::npos);
  CHECK(t.find("ÉQUIVALENT EN ZARMA") != std::string::npos);
  CHECK(t.find("{target_language}") == std::string::npos);
  for (int k = 1; k <= 5; ++k) CHECK(t.find(std::to_string(k) + ". ") != std::string::npos);
  CHECK(t.find("\"instruction_fr\": \"Calcule 7 + 5.\"") != std::string::npos);
  CHECK(t.find("\"context_fr\": \"Mathématiques\"") != std::string::npos);
  for (const auto& g : guidelines()) CHECK(t.find(g) != std::string::npos);
  CHECK(t.find("\"lang\": \"dje\"") != std::string::npos);
}

TEST_CASE("draft ids are a pure function of seed ids") {
  SeedInstruction a{"s06-0001", "x", "Mathématiques"};
  SeedInstruction b{"s06-0001", "autre", "Santé"};
  CHECK(draft_id_for(a, kDje) == "dje-s06-0001");
  CHECK(draft_id_for(a, kDje) == draft_id_for(b, kDje));
}

TEST_CASE("parse_draft_response rebuilds every reference row") {
  auto cat = catalog();
  auto seeds = testsupport::reference_seeds();
  auto drafts = testsupport::reference_drafts();
  REQUIRE(seeds.size() == drafts.size());
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const Topic* topic = cat.find_by_name(seeds[i].context_fr);
    REQUIRE(topic != nullptr);
    CHECK(parse_draft_response(completion_for(drafts[i]), seeds[i], *topic, kDje) == drafts[i]);
  }
}

TEST_CASE("parse_draft_response rejects broken drafts") {
  auto cat = catalog();
  const Topic* math = cat.find_by_name("Mathématiques");
  const Topic* causal = cat.find_by_name("Raisonnement causal");
  REQUIRE(math);
  REQUIRE(causal);
  SeedInstruction seed{"s06-0001", "Calcule 7 + 5.", "Mathématiques"};
  auto make = [](std::string resp, std::string cot) {
    return Json{{"instr_lrl", "7 nda 5 baani?"}, {"resp_lrl", resp}, {"CoT_lrl", cot}, {"lang", "dje"}}.dump();
  };
  CHECK(parse_draft_response(make(words(100), "N/A"), seed, *math, kDje).resp_lrl == words(100));
  CHECK_THROWS_AS(parse_draft_response(make(words(101), "N/A"), seed, *math, kDje), DraftRejected);
  CHECK_THROWS_AS(parse_draft_response("rien", seed, *math, kDje), ParseError);
  CHECK_THROWS_AS(parse_draft_response(R"({"instr_lrl": "a", "resp_lrl": "b"})", seed, *math, kDje), SchemaError);
  CHECK_THROWS_AS(parse_draft_response(make("b", "N/A"), seed, *causal, kDje), DraftRejected);
  auto wrong_lang = Json{{"instr_lrl", "a"}, {"resp_lrl", "b"}, {"CoT_lrl", "N/A"}, {"lang", "bam"}}.dump();
  CHECK_THROWS_AS(parse_draft_response(wrong_lang, seed, *math, kDje), SchemaError);
}

TEST_CASE("20-seed fixture yields 20 drafts matching the snapshot rows") {
  auto r = generate_drafts(testsupport::reference_seeds(), catalog(), kDje, "Zarma", guidelines(),
                           Gateway(reference_drafts_backend()));
  CHECK(r.report.produced == 20);
  CHECK(r.report.failures.empty());
  CHECK(r.drafts == testsupport::reference_drafts());
}

TEST_CASE("missing CoT on a reasoning topic is retried, then reported") {
  auto cat = catalog();
  SeedInstruction seed{"s19-0001", "Pourquoi le sol est-il mouillé ?", "Raisonnement causal"};
  std::map<std::string, std::string> answers;
  answers["draft:s19-0001"] = Json{{"instr_lrl", "a"}, {"resp_lrl", "b"}, {"CoT_lrl", "N/A"}}.dump();
  answers["draft:s19-0001:retry1"] = Json{{"instr_lrl", "a"}, {"resp_lrl", "b"}, {"CoT_lrl", "Hari kaŋ."}}.dump();
  auto backend = std::make_shared<CallbackBackend>([answers](const GenerationRequest& r) { return answers.at(r.request_tag); });
  auto r = generate_drafts({seed}, cat, kDje, "Zarma", guidelines(), Gateway(backend));
  REQUIRE(r.drafts.size() == 1);
  CHECK(r.report.retries == 1);
  CHECK(r.drafts[0].cot_lrl == "Hari kaŋ.");

  auto always_bad = std::make_shared<CallbackBackend>([](const GenerationRequest&) {
    return Json{{"instr_lrl", "a"}, {"resp_lrl", "b"}, {"CoT_lrl", "N/A"}}.dump();
  });
  auto r2 = generate_drafts({seed}, cat, kDje, "Zarma", guidelines(), Gateway(always_bad));
  CHECK(r2.drafts.empty());
  CHECK(r2.report.retries == 3);
  REQUIRE(r2.report.failures.size() == 1);
  CHECK(r2.report.failures[0].seed_id == "s19-0001");
}

TEST_CASE("seed with unknown topic fails without a gateway call, others unaffected") {
  auto seeds = testsupport::reference_seeds();
  seeds[3].context_fr = "Astrologie";
  std::atomic<int> calls{0};
  auto r = generate_drafts(seeds, catalog(), kDje, "Zarma", guidelines(), Gateway(reference_drafts_backend(&calls)));
  CHECK(calls == 19);
  CHECK(r.drafts.size() == 19);
  REQUIRE(r.report.failures.size() == 1);
  CHECK(r.report.failures[0].seed_id == seeds[3].id);
  CHECK(r.report.failures[0].reason.find("Astrologie") != std::string::npos);
}

TEST_CASE("interrupted then resumed run equals an uninterrupted run") {
  TempDir tmp;
  auto seeds = testsupport::reference_seeds();
  DraftGenOptions opt;
  opt.workers = 1;
  opt.checkpoint = tmp / "drafts.ckpt";
  std::string cut = "draft:" + seeds[12].id;
  CHECK_THROWS_AS(generate_drafts(seeds, catalog(), kDje, "Zarma", guidelines(),
                                  Gateway(reference_drafts_backend(nullptr, {cut})), opt),
                  FixtureMissing);
  std::atomic<int> calls{0};
  auto resumed = generate_drafts(seeds, catalog(), kDje, "Zarma", guidelines(), Gateway(reference_drafts_backend(&calls)), opt);
  CHECK(calls == 8);
  auto fresh = generate_drafts(seeds, catalog(), kDje, "Zarma", guidelines(), Gateway(reference_drafts_backend()));
  CHECK(resumed.drafts == fresh.drafts);
  std::string a, b;
  for (const auto& d : resumed.drafts) a += dump_line(to_json(d)) + "\n";
  for (const auto& d : fresh.drafts) b += dump_line(to_json(d)) + "\n";
  CHECK(a == b);
}
