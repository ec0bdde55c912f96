#include "doctest.h"
#include "instructlr/error.hpp"
#include "instructlr/jsonl.hpp"
#include "support.hpp"

using namespace instructlr;
using testsupport::TempDir;

TEST_CASE("dump_line is compact and keeps non-ASCII text") {
  Json j = {{"a", "é ŋ «»"}, {"b", 1}};
  CHECK(dump_line(j) == "{\"a\":\"é ŋ «»\",\"b\":1}");
}

TEST_CASE("fixture drafts round trip byte for byte") {
  auto path = testsupport::fixtures_dir() / "reference_drafts.jsonl";
  auto drafts = read_jsonl<Draft>(path);
  REQUIRE(drafts.size() == 20);
  TempDir tmp;
  write_jsonl(drafts, tmp / "out.jsonl");
  CHECK(testsupport::read_file(tmp / "out.jsonl") == testsupport::read_file(path));
}

TEST_CASE("random drafts survive a write/read cycle") {
  testsupport::Rng rng(3);
  std::vector<Draft> drafts;
  for (int i = 0; i < 200; ++i) {
    Draft d;
    d.id = "d" + std::to_string(i);
    d.instr_fr = testsupport::random_sentence(rng, 1, 8) + " \"q\" \\ é";
    d.instr_lrl = testsupport::random_sentence(rng, 1, 8) + " ŋ";
    d.resp_lrl = testsupport::random_sentence(rng, 1, 20) + "\n\t";
    d.cot_lrl = i % 3 == 0 ? testsupport::random_sentence(rng, 1, 10) : std::string(kNoCot);
    d.topic_fr = "Physique";
    d.lang = {"dje"};
    drafts.push_back(d);
  }
  TempDir tmp;
  write_jsonl(drafts, tmp / "d.jsonl");
  CHECK(read_jsonl<Draft>(tmp / "d.jsonl") == drafts);
}

TEST_CASE("read errors carry the line number") {
  TempDir tmp;
  auto good = dump_line(to_json(SeedInstruction{"s01-0001", "Explique.", "Physique"}));
  testsupport::write_file(tmp / "bad.jsonl", good + "\n{not json\n");
  try {
    (void)read_jsonl<SeedInstruction>(tmp / "bad.jsonl");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  testsupport::write_file(tmp / "schema.jsonl", good + "\n\n{\"id\":\"x\",\"instruction_fr\":\"a\"}\n");
  try {
    (void)read_jsonl<SeedInstruction>(tmp / "schema.jsonl");
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.line() == 3);
    CHECK(e.field() == "context_fr");
  }
  CHECK_THROWS_AS(read_jsonl<SeedInstruction>(tmp / "missing.jsonl"), Error);
}
