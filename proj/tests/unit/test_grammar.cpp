#include <algorithm>

#include "doctest.h"
#include "instructlr/grammar.hpp"
#include "instructlr/lexicon.hpp"
#include "support.hpp"

using namespace instructlr;

namespace {

struct Engine {
  ZarmaLexicon lex = ZarmaLexicon::load(testsupport::data_dir() / "lexicon" / "dje.tsv");
  Glossary glossary{load_glossary((testsupport::data_dir() / "kb" / "glossary.tsv").string())};
  std::vector<GrammarRule> rules = load_rules((testsupport::data_dir() / "kb" / "rules" / "dje.json").string());

  std::vector<Violation> check(std::string_view s) const { return instructlr::check(s, lex, glossary); }
  std::vector<CorrectionOption> suggest(std::string_view s) const {
    return instructlr::suggest(s, check(s), lex, glossary);
  }
};

const Engine& engine() {
  static const Engine e;
  return e;
}

std::vector<std::string> texts(const std::vector<Token>& toks) {
  std::vector<std::string> out;
  for (const auto& t : toks) out.push_back(t.text);
  return out;
}

std::string token_at(std::string_view s, const Violation& v) { return tokenize(s).at(v.span.begin).text; }

}  // namespace

TEST_CASE("tokenize examples") {
  using V = std::vector<std::string>;
  CHECK(texts(tokenize("Suba, a koy Niamey")) == V{"Suba", ",", "a", "koy", "Niamey"});
  CHECK(texts(tokenize("Haŋ!")) == V{"Haŋ", "!"});
  CHECK(tokenize("").empty());
  CHECK(texts(tokenize("« Ma haŋ ! »")) == V{"«", "Ma", "haŋ", "!", "»"});
  CHECK(texts(tokenize("go-no-ga c'est")) == V{"go-no-ga", "c'est"});
  CHECK(texts(tokenize("\"koy.\"")) == V{"\"", "koy", ".", "\""});
}

TEST_CASE("token spans index the original bytes") {
  std::string s = "  Suba,  a ga koy Niamey. ";
  for (const auto& t : tokenize(s)) CHECK(s.substr(t.begin, t.end - t.begin) == t.text);
  auto toks = tokenize("Haŋ!");
  CHECK(toks[0].end == std::string("Haŋ").size());
  CHECK(toks[1].punct);
  CHECK_FALSE(toks[0].punct);
}

TEST_CASE("error-taxonomy rows: one violation each, on the expected token") {
  const auto& e = engine();
  {
    std::string s = "Suba, a koy Niamey";
    auto v = e.check(s);
    REQUIRE(v.size() == 1);
    CHECK(v[0].category == ErrorCategory::tense_inconsistency);
    CHECK(token_at(s, v[0]) == "koy");
  }
  {
    std::string s = "Ay na hansi di";
    auto v = e.check(s);
    REQUIRE(v.size() == 1);
    CHECK(v[0].category == ErrorCategory::suffix_misuse);
    CHECK(token_at(s, v[0]) == "hansi");
  }
  {
    std::string s = "Iri ga barma te";
    auto v = e.check(s);
    REQUIRE(v.size() == 1);
    CHECK(v[0].category == ErrorCategory::orthography);
    CHECK(token_at(s, v[0]) == "barma");
  }
}

TEST_CASE("loanword is a fluency finding") {
  std::string s = "Demain, a koy Niamey";
  auto v = engine().check(s);
  REQUIRE(v.size() == 2);
  CHECK(v[0].category == ErrorCategory::fluency);
  CHECK(token_at(s, v[0]) == "Demain");
  CHECK(v[1].category == ErrorCategory::tense_inconsistency);
}

TEST_CASE("suggestions: full repair first") {
  const auto& e = engine();
  auto o = e.suggest("Demain, a koy Niamey");
  REQUIRE(!o.empty());
  CHECK(o.size() <= 3);
  CHECK(o[0].text == "Suba, a ga koy Niamey");
  CHECK(o.size() == 3);
  CHECK(o[1].text != o[0].text);
  CHECK(e.suggest("Ay na hansi di").at(0).text == "Ay na hanso di");
  CHECK(e.suggest("Iri ga barma te").at(0).text == "Iri ga barna te");
  CHECK(e.suggest("Suba, a ga koy Niamey").empty());
}

TEST_CASE("option 1 follows repairs that expose a further violation") {
  const auto& e = engine();
  // Respelling barma gives barna, which then needs its definite form at the end of the sentence.
  REQUIRE(e.check("A neera barma").size() == 1);
  auto o = e.suggest("A neera barma");
  REQUIRE(o.size() == 2);
  CHECK(o[0].text == "A neera barnaa");
  CHECK(e.check(o[0].text).empty());
  CHECK(o[1].text == "A neera barna");
}

TEST_CASE("a calque is not rule-detectable") {
  CHECK(engine().check("Boro fo kaŋ ga ti alfa go no.").empty());
  CHECK(engine().check("Alfa fo go no.").empty());
}

TEST_CASE("every right-hand rule example is clean") {
  const auto& e = engine();
  REQUIRE(e.rules.size() == 20);
  std::size_t n = 0;
  for (const auto& r : e.rules) {
    for (const auto& ex : r.examples) {
      ++n;
      INFO("rule " << r.id << ": " << ex.right);
      CHECK(e.check(ex.right).empty());
    }
  }
  CHECK(n >= 40);
}

TEST_CASE("every wrong-hand rule example is flagged and Option 1 restores the right form") {
  const auto& e = engine();
  std::size_t n = 0;
  for (const auto& r : e.rules) {
    for (const auto& ex : r.examples) {
      if (!ex.wrong) continue;
      ++n;
      INFO("rule " << r.id << ": " << *ex.wrong);
      auto v = e.check(*ex.wrong);
      CHECK(!v.empty());
      auto o = e.suggest(*ex.wrong);
      REQUIRE(!o.empty());
      CHECK(o[0].text == ex.right);
      CHECK(e.check(o[0].text).size() < v.size());
    }
  }
  CHECK(n == 9);
}

TEST_CASE("option 1 strictly reduces violations on random perturbations") {
  // Property: repairing with Option 1 never leaves as many violations as before.
  const auto& e = engine();
  testsupport::Rng rng(7);
  const std::vector<std::string> subjects = {"Ay", "A", "Iri", "I"};
  const std::vector<std::string> verbs = {"koy", "neera", "di"};
  const std::vector<std::string> objects = {"hansi", "hanso", "zanka", "barma", "Niamey", "farkay"};
  const std::vector<std::string> openers = {"", "Suba, ", "Demain, "};
  for (int i = 0; i < 300; ++i) {
    std::string s = openers[rng() % openers.size()] + subjects[rng() % subjects.size()] +
                    (rng() % 2 ? " ga " : " ") + verbs[rng() % verbs.size()] + " " + objects[rng() % objects.size()];
    auto v = e.check(s);
    auto o = e.suggest(s);
    INFO(s);
    CHECK(v.empty() == o.empty());
    if (!o.empty()) CHECK(e.check(o[0].text).size() < v.size());
    CHECK(e.check(s) == v);
  }
}

TEST_CASE("violations carry a category and are ordered by position") {
  const auto& e = engine();
  auto v = e.check("Demain, ay neera mana hansoey");
  REQUIRE(v.size() >= 3);
  for (std::size_t i = 1; i < v.size(); ++i)
    CHECK((v[i - 1].span.begin < v[i].span.begin ||
           (v[i - 1].span.begin == v[i].span.begin && v[i - 1].rule_id <= v[i].rule_id)));
}

TEST_CASE("apply_edits skips overlapping edits") {
  CHECK(apply_edits("abc def", {{4, 7, "xyz"}, {0, 3, "ABC"}}) == "ABC xyz");
  CHECK(apply_edits("abc def", {{0, 3, "A"}, {1, 2, "B"}}) == "A def");
  CHECK(apply_edits("abc", {{1, 1, "-"}}) == "a-bc");
}
