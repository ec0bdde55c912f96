#include "instructlr/analytics.hpp"

#include <fmt/format.h>

#include <regex>

#include "instructlr/checker.hpp"
#include "instructlr/text.hpp"

namespace instructlr {

std::string_view to_token(InstructionType t) {
  switch (t) {
    case InstructionType::open_ended: return "open_ended";
    case InstructionType::definition: return "definition";
    case InstructionType::explanation: return "explanation";
    case InstructionType::list_generation: return "list_generation";
  }
  return "open_ended";
}

InstructionType classify_instruction_type(std::string_view instr_fr) {
  // Patterns run on the case-folded text with typographic apostrophes normalized.
  std::string s = text::fold_case(instr_fr);
  for (std::size_t p; (p = s.find("\xE2\x80\x99")) != std::string::npos;) s.replace(p, 3, "'");
  static const std::regex list_re(
      R"((^|[^a-z])(donnez?|citez?|énumérez?|listez?|nommez?)\b[^.?!]*\b(exemples?|\d+|deux|trois|quatre|cinq|six|sept|huit|neuf|dix|liste)\b|(^|[^a-z])(listez?|énumérez?)\b|(^|[^a-z])dresse(z)? (une|la) liste)");
  static const std::regex definition_re(
      R"(qu'est[- ]ce qu[e']|(^|[^a-z])(définis|définissez|définir)\b|que signifie|quelle est la définition)");
  static const std::regex explanation_re(
      R"((^|[^a-z])(expliquez?|explique-moi|pourquoi)\b|décri(s|vez) le fonctionnement|comment fonctionne)");
  if (std::regex_search(s, list_re)) return InstructionType::list_generation;
  if (std::regex_search(s, definition_re)) return InstructionType::definition;
  if (std::regex_search(s, explanation_re)) return InstructionType::explanation;
  return InstructionType::open_ended;
}

Json DatasetStats::to_json() const {
  Json j;
  j["total"] = total;
  j["instruction_buckets"] = {{"1-10", instr_1_10}, {"11-20", instr_11_20}, {">20", instr_over_20}};
  j["response_buckets"] = {{"<50", resp_under_50}, {"50-100", resp_50_100}, {">100", resp_over_100}};
  j["cot_count"] = cot_count;
  Json t = Json::object();
  for (auto k : kAllInstructionTypes) t[std::string(to_token(k))] = types.count(k) ? types.at(k) : 0;
  j["instruction_types"] = std::move(t);
  return j;
}

DatasetStats dataset_stats(const std::vector<Draft>& drafts) {
  DatasetStats s;
  for (auto k : kAllInstructionTypes) s.types[k] = 0;
  for (const auto& d : drafts) {
    ++s.total;
    auto iw = text::word_count(d.instr_lrl);
    if (iw <= 10)
      ++s.instr_1_10;
    else if (iw <= 20)
      ++s.instr_11_20;
    else
      ++s.instr_over_20;
    auto rw = text::word_count(d.resp_lrl);
    if (rw < 50)
      ++s.resp_under_50;
    else if (rw <= 100)
      ++s.resp_50_100;
    else
      ++s.resp_over_100;
    if (d.has_cot()) ++s.cot_count;
    ++s.types[classify_instruction_type(d.instr_fr)];
  }
  return s;
}

Json TriageStats::to_json() const {
  Json j;
  j["total"] = total;
  j["accepted"] = {{"count", accepted}, {"pct", percent(accepted, total)}};
  j["low_priority"] = {{"count", low_priority}, {"pct", percent(low_priority, total)}};
  j["top_priority"] = {{"count", top_priority}, {"pct", percent(top_priority, total)}};
  Json cats = Json::object();
  for (const auto& [c, n] : top_categories)
    cats[std::string(to_token(c))] = {{"count", n}, {"pct", percent(n, top_priority)}};
  j["top_priority_categories"] = std::move(cats);
  j["low_priority_outcomes"] = {
      {"already_correct", {{"count", low_already_correct}, {"pct", percent(low_already_correct, low_priority)}}},
      {"adjusted", {{"count", low_adjusted}, {"pct", percent(low_adjusted, low_priority)}}}};
  return j;
}

TriageStats triage_stats(const std::vector<CheckedDraft>& checked, const std::vector<MergeDecision>& decisions) {
  TriageStats s;
  std::map<std::string, TriageStatus> status_of;
  for (const auto& c : checked) {
    ++s.total;
    status_of[c.draft.id] = c.status;
    switch (c.status) {
      case TriageStatus::accepted: ++s.accepted; break;
      case TriageStatus::low_priority: ++s.low_priority; break;
      case TriageStatus::top_priority: ++s.top_priority; break;
    }
  }
  for (const auto& d : decisions) {
    auto it = status_of.find(d.draft_id);
    if (it == status_of.end() || !d.is_correct) continue;
    if (it->second == TriageStatus::low_priority) {
      if (*d.is_correct)
        ++s.low_already_correct;
      else
        ++s.low_adjusted;
    } else if (it->second == TriageStatus::top_priority && !*d.is_correct) {
      std::optional<ErrorCategory> best;
      std::size_t best_n = 0;
      for (auto c : kAllErrorCategories) {
        auto n = d.category_tally.count(c) ? d.category_tally.at(c) : 0;
        if (n > best_n) {
          best = c;
          best_n = n;
        }
      }
      if (best) ++s.top_categories[*best];
    }
  }
  return s;
}

std::string render_stats_table(const DatasetStats& d, const TriageStats* t) {
  std::string out;
  auto line = [&](std::string_view label, std::size_t n, std::size_t whole) {
    out += fmt::format("{:<40} {:>8} {:>7.2f}\n", label, n, percent(n, whole));
  };
  out += "Dataset characteristics\n";
  line("Instructions with 1-10 tokens", d.instr_1_10, d.total);
  line("Instructions with 11-20 tokens", d.instr_11_20, d.total);
  line("Instructions with >20 tokens", d.instr_over_20, d.total);
  line("Responses with <50 tokens", d.resp_under_50, d.total);
  line("Responses with 50-100 tokens", d.resp_50_100, d.total);
  if (d.resp_over_100 > 0) line("Responses with >100 tokens (flagged)", d.resp_over_100, d.total);
  line("Instructions with CoT reasoning", d.cot_count, d.total);
  line("Open-ended questions", d.types.at(InstructionType::open_ended), d.total);
  line("Definition requests", d.types.at(InstructionType::definition), d.total);
  line("Explanation tasks", d.types.at(InstructionType::explanation), d.total);
  line("List generation tasks", d.types.at(InstructionType::list_generation), d.total);
  if (t) {
    out += "\nQuality assessment\n";
    line("Total drafts processed", t->total, t->total);
    line("Accepted without correction", t->accepted, t->total);
    line("Low priority (corrected)", t->low_priority, t->total);
    line("Top priority (needs human review)", t->top_priority, t->total);
    for (const auto& [c, n] : t->top_categories)
      line(fmt::format("Top priority: {}", to_label(c)), n, t->top_priority);
    line("Low priority: already correct", t->low_already_correct, t->low_priority);
    line("Low priority: adjusted", t->low_adjusted, t->low_priority);
  }
  return out;
}

}  // namespace instructlr
