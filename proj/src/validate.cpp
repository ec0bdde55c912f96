#include "instructlr/validate.hpp"

#include "instructlr/text.hpp"

namespace instructlr {

ValidationReport validate_draft(const Draft& draft, const TopicCatalog& topics) {
  ValidationReport report;
  if (draft.id.empty()) report.emplace_back("empty id");
  if (text::trim(draft.instr_fr).empty()) report.emplace_back("empty instr_fr");
  if (text::trim(draft.instr_lrl).empty()) report.emplace_back("empty instr_lrl");
  if (text::trim(draft.resp_lrl).empty()) report.emplace_back("empty resp_lrl");
  if (draft.lang.code.empty()) report.emplace_back("empty language code");

  if (auto n = text::word_count(draft.resp_lrl); n > kMaxResponseWords)
    report.push_back("response exceeds 100 words (" + std::to_string(n) + ")");
  if (draft.has_cot()) {
    if (auto n = text::word_count(draft.cot_lrl); n > kMaxCotWords)
      report.push_back("chain-of-thought exceeds 200 words (" + std::to_string(n) + ")");
  }

  const Topic* topic = topics.find_by_name(draft.topic_fr);
  if (topic == nullptr) {
    report.push_back("unknown topic \"" + draft.topic_fr + "\"");
  } else if (topic->requires_cot && !draft.has_cot()) {
    report.emplace_back("missing CoT for reasoning topic");
  } else if (!topic->requires_cot && draft.has_cot()) {
    report.emplace_back("cot mismatch: CoT present for a non-reasoning topic");
  }
  return report;
}

}  // namespace instructlr
