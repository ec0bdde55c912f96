#pragma once

// Domain records shared by every pipeline stage, with their canonical JSON form.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace instructlr {

using Json = nlohmann::ordered_json;

/// Marks an absent chain-of-thought. Exact and case-sensitive.
inline constexpr std::string_view kNoCot = "N/A";

inline constexpr std::size_t kMaxResponseWords = 100;
inline constexpr std::size_t kMaxCotWords = 200;

struct LanguageCode {
  std::string code;
  friend bool operator==(const LanguageCode&, const LanguageCode&) = default;
};

/// Language codes the pipeline knows about, with display names used in prompts.
class LanguageRegistry {
 public:
  LanguageRegistry();  // dje, bam, ful
  void add(std::string code, std::string display_name);
  bool contains(std::string_view code) const;
  /// Throws ConfigError for unknown or empty codes.
  LanguageCode require(std::string_view code) const;
  const std::string& display_name(const LanguageCode& lang) const;

 private:
  std::map<std::string, std::string, std::less<>> names_;
};

struct Topic {
  int id = 0;
  std::string name_fr;
  std::string description_fr;
  bool requires_cot = false;
  friend bool operator==(const Topic&, const Topic&) = default;
};

class TopicCatalog {
 public:
  TopicCatalog() = default;
  /// Throws ConfigError on duplicate ids or names.
  explicit TopicCatalog(std::vector<Topic> topics);
  static TopicCatalog load(const std::string& path);

  const std::vector<Topic>& topics() const { return topics_; }
  std::size_t size() const { return topics_.size(); }
  const Topic* find_by_name(std::string_view name_fr) const;
  const Topic* find_by_id(int id) const;

 private:
  std::vector<Topic> topics_;
};

struct SeedInstruction {
  std::string id;
  std::string instruction_fr;
  std::string context_fr;
  friend bool operator==(const SeedInstruction&, const SeedInstruction&) = default;
};

struct Draft {
  std::string id;
  std::string instr_fr;
  std::string instr_lrl;
  std::string resp_lrl;
  std::string cot_lrl{kNoCot};
  std::string topic_fr;
  LanguageCode lang;

  bool has_cot() const { return cot_lrl != kNoCot; }
  friend bool operator==(const Draft&, const Draft&) = default;
};

enum class ErrorCategory { fluency, suffix_misuse, tense_inconsistency, orthography };
inline constexpr ErrorCategory kAllErrorCategories[] = {ErrorCategory::fluency, ErrorCategory::suffix_misuse,
                                                        ErrorCategory::tense_inconsistency,
                                                        ErrorCategory::orthography};

/// Wire token: fluency, suffix_misuse, tense_inconsistency, orthography.
std::string_view to_token(ErrorCategory c);
/// Review-sheet label: Fluency, Suffix Misuse, Tense Inconsistency, Orthography.
std::string_view to_label(ErrorCategory c);
/// Accepts either the token or the label (label match is case-insensitive).
std::optional<ErrorCategory> parse_error_category(std::string_view s);

struct TokenSpan {
  std::size_t begin = 0;  // first token index
  std::size_t end = 0;    // one past the last token index
  friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
};

struct Violation {
  int rule_id = 0;  // 1..20, or 0 for lexicon/glossary findings
  ErrorCategory category = ErrorCategory::fluency;
  TokenSpan span;
  std::string message;
  friend bool operator==(const Violation&, const Violation&) = default;
};

struct CorrectionOption {
  std::string text;
  std::string explanation;
  friend bool operator==(const CorrectionOption&, const CorrectionOption&) = default;
};

inline constexpr std::size_t kMaxOptions = 3;

struct CheckerAnalysis {
  bool is_correct = true;
  std::optional<std::string> reason;
  std::vector<CorrectionOption> options;
  friend bool operator==(const CheckerAnalysis&, const CheckerAnalysis&) = default;
};

/// Ordered by review urgency: accepted < low_priority < top_priority.
enum class TriageStatus { accepted = 0, low_priority = 1, top_priority = 2 };
std::string_view to_token(TriageStatus s);
std::optional<TriageStatus> parse_triage_status(std::string_view s);

/// Field names a checker analysis can be attached to.
inline constexpr std::string_view kFieldInstr = "instr_lrl";
inline constexpr std::string_view kFieldResp = "resp_lrl";
inline constexpr std::string_view kFieldCot = "CoT_lrl";

struct FieldAnalysis {
  std::string field;
  CheckerAnalysis analysis;
  friend bool operator==(const FieldAnalysis&, const FieldAnalysis&) = default;
};

struct AppliedCorrection {
  std::string field;
  std::string text;
  friend bool operator==(const AppliedCorrection&, const AppliedCorrection&) = default;
};

struct CheckedDraft {
  Draft draft;
  TriageStatus status = TriageStatus::accepted;
  /// One entry per checked field, in check order. Empty only when checking was bypassed.
  std::vector<FieldAnalysis> analysis;
  /// Option 1 of every low-priority field. Non-empty iff status == low_priority.
  std::vector<AppliedCorrection> applied_correction;
  friend bool operator==(const CheckedDraft&, const CheckedDraft&) = default;
};

struct AnnotationRecord {
  std::string draft_id;
  std::string annotator_id;
  bool is_correct = true;
  std::optional<std::string> corrected_instruction;
  std::optional<std::string> corrected_response;
  std::optional<ErrorCategory> error_category;
  std::optional<std::string> comments;
  friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

/// Empty when the record satisfies its invariants, else the offending field name.
std::optional<std::string> annotation_invariant_violation(const AnnotationRecord& r);

enum class RuleKind { lexicon, morphology, syntax, negation };
std::string_view to_token(RuleKind k);

struct RuleExample {
  std::optional<std::string> wrong;
  std::string right;
  friend bool operator==(const RuleExample&, const RuleExample&) = default;
};

struct GrammarRule {
  int id = 0;
  std::string title;
  RuleKind kind = RuleKind::lexicon;
  std::vector<std::string> patterns;
  std::vector<RuleExample> examples;
  friend bool operator==(const GrammarRule&, const GrammarRule&) = default;
};

/// Loads rules/<lang>.json. Throws SchemaError unless ids cover exactly 1..20.
std::vector<GrammarRule> load_rules(const std::string& path);

struct GlossaryEntry {
  std::string term_fr;
  std::string term_lrl;
  friend bool operator==(const GlossaryEntry&, const GlossaryEntry&) = default;
};

/// Loads glossary.tsv (term_fr TAB term_lrl, '#' comments). Throws on empty terms or duplicate pairs.
std::vector<GlossaryEntry> load_glossary(const std::string& path);

// --- JSON conversions. from_json rejects unknown fields and names missing ones (SchemaError).

Json to_json(const Topic& t);
Json to_json(const SeedInstruction& s);
Json to_json(const Draft& d);
Json to_json(const Violation& v);
Json to_json(const CheckerAnalysis& a);
Json to_json(const CheckedDraft& c);
Json to_json(const AnnotationRecord& r);
Json to_json(const GrammarRule& r);

template <typename T>
T from_json(const Json& j);

template <>
Topic from_json<Topic>(const Json& j);
template <>
SeedInstruction from_json<SeedInstruction>(const Json& j);
template <>
Draft from_json<Draft>(const Json& j);
template <>
CheckerAnalysis from_json<CheckerAnalysis>(const Json& j);
template <>
CheckedDraft from_json<CheckedDraft>(const Json& j);
template <>
AnnotationRecord from_json<AnnotationRecord>(const Json& j);
template <>
GrammarRule from_json<GrammarRule>(const Json& j);

}  // namespace instructlr
