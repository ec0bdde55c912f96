#pragma once

#include <cstddef>
#include <map>
#include <string_view>
#include <vector>

#include "instructlr/annotation.hpp"
#include "instructlr/types.hpp"

namespace instructlr {

enum class InstructionType { open_ended, definition, explanation, list_generation };
inline constexpr InstructionType kAllInstructionTypes[] = {InstructionType::open_ended, InstructionType::definition,
                                                           InstructionType::explanation,
                                                           InstructionType::list_generation};
std::string_view to_token(InstructionType t);

/// Ordered pattern match on the French instruction: list requests, then definitions, then
/// explanations; anything else is open-ended.
InstructionType classify_instruction_type(std::string_view instr_fr);

struct DatasetStats {
  std::size_t total = 0;
  std::size_t instr_1_10 = 0;
  std::size_t instr_11_20 = 0;
  std::size_t instr_over_20 = 0;
  std::size_t resp_under_50 = 0;
  std::size_t resp_50_100 = 0;
  std::size_t resp_over_100 = 0;  // breaks the response limit
  std::size_t cot_count = 0;
  std::map<InstructionType, std::size_t> types;
  Json to_json() const;
};

/// Buckets use the word count of instr_lrl and resp_lrl.
DatasetStats dataset_stats(const std::vector<Draft>& drafts);

struct TriageStats {
  std::size_t total = 0;
  std::size_t accepted = 0;
  std::size_t low_priority = 0;
  std::size_t top_priority = 0;
  /// Human category of each decided top-priority draft, over top_priority.
  std::map<ErrorCategory, std::size_t> top_categories;
  /// Decided low-priority drafts judged correct / edited, over low_priority.
  std::size_t low_already_correct = 0;
  std::size_t low_adjusted = 0;
  Json to_json() const;
};

/// Counts per status. When merge decisions are given, decided top-priority drafts are
/// tallied under their most frequent annotated category (ties go to the earlier category)
/// and decided low-priority drafts by verdict.
TriageStats triage_stats(const std::vector<CheckedDraft>& checked, const std::vector<MergeDecision>& decisions = {});

/// Aligned two-column text rendering of both tables.
std::string render_stats_table(const DatasetStats& dataset, const TriageStats* triage = nullptr);

}  // namespace instructlr
