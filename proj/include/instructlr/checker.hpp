#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "instructlr/gateway.hpp"
#include "instructlr/grammar.hpp"
#include "instructlr/lexicon.hpp"
#include "instructlr/retrieval.hpp"
#include "instructlr/types.hpp"

namespace instructlr {

std::string render_checker_prompt(std::string_view sentence, std::string_view grammar_check,
                                  std::string_view glossary_info);

/// Numbered rule citations with categories, or "no rule violations detected".
std::string render_grammar_check(const std::vector<Violation>& violations, std::string_view sentence,
                                 const std::vector<GrammarRule>& rules);

/// One line per matched token: `Demain: French "demain", Zarma "suba"`.
std::string render_glossary_info(std::string_view sentence, const KnowledgeBase& kb, std::string_view language_name);

/// Throws ParseError when no "Is the sentence correct?" verdict line is present.
CheckerAnalysis parse_checker_output(std::string_view completion);

/// Inverse of parse_checker_output, in the prompt's output format.
std::string render_checker_output(const CheckerAnalysis& analysis);

/// correct -> accepted; incorrect with options -> low_priority; incorrect without -> top_priority.
TriageStatus field_status(const CheckerAnalysis& analysis);

/// Draft status is the worst field status. Option 1 of every low-priority field is recorded
/// as the applied correction when the draft ends up low_priority.
CheckedDraft triage(const Draft& draft, std::vector<FieldAnalysis> analysis);

/// The draft with its applied corrections substituted into the matching fields.
Draft corrected_draft(const CheckedDraft& checked);

struct CheckerExemplar {
  std::string sentence;
  std::string grammar_check;
  std::string glossary_info;
  std::string output;
};

/// JSON array of {sentence, grammar_check, glossary_info, output}.
std::vector<CheckerExemplar> load_exemplars(const std::filesystem::path& path);

enum class CheckerMode { llm, rules_only };

struct CheckerOptions {
  CheckerMode mode = CheckerMode::llm;
  std::size_t retrieved_sentences = 5;
  std::size_t n_shot = 3;
  std::string language_name = "Zarma";
  int max_retries = 3;
};

class Checker {
 public:
  /// `gateway` may be null in rules_only mode.
  Checker(const KnowledgeBase& kb, const ZarmaLexicon& lexicon, const Gateway* gateway,
          std::vector<CheckerExemplar> exemplars, CheckerOptions options = {});

  GenerationRequest build_request(std::string_view sentence, std::string request_tag) const;

  /// One sentence. In llm mode an unparseable completion is retried under a retry tag; when
  /// the budget runs out the sentence is reported incorrect with no options.
  CheckerAnalysis analyze(std::string_view sentence, const std::string& request_tag) const;

  /// Checks instr_lrl and resp_lrl, then CoT_lrl only when both were accepted.
  CheckedDraft check_draft(const Draft& draft) const;

  const CheckerOptions& options() const { return opt_; }

 private:
  const KnowledgeBase& kb_;
  const ZarmaLexicon& lex_;
  const Gateway* gateway_;
  std::vector<CheckerExemplar> exemplars_;
  CheckerOptions opt_;
};

struct TriageSummary {
  std::size_t total = 0;
  std::size_t accepted = 0;
  std::size_t low_priority = 0;
  std::size_t top_priority = 0;
  double accepted_pct = 0.0;
  double low_pct = 0.0;
  double top_pct = 0.0;
  Json to_json() const;
};

/// Percentages rounded to 2 decimals; 0 when there are no drafts.
TriageSummary summarize(const std::vector<CheckedDraft>& checked);
double percent(std::size_t part, std::size_t whole);

struct BatchOptions {
  std::size_t workers = 4;
  std::optional<std::filesystem::path> checkpoint;
};

struct BatchResult {
  std::vector<CheckedDraft> checked;  // input order
  TriageSummary summary;
};

BatchResult run_batch(const std::vector<Draft>& drafts, const Checker& checker, const BatchOptions& options = {});

// ---------------------------------------------------------------- evaluation

struct EvalItem {
  std::string sentence;
  std::optional<std::string> gold;  // absent for clean sentences
};

struct CheckerEvaluation {
  double mean_gleu = 0.0;
  double exact_match_rate = 0.0;
  double false_positive_rate = 0.0;
  std::optional<double> fluency;  // externally supplied rating, never computed
  std::size_t error_items = 0;
  std::size_t clean_items = 0;
  Json to_json() const;
};

using CheckerFn = std::function<CheckerAnalysis(std::string_view sentence)>;

/// Throws std::invalid_argument when either partition is empty.
CheckerEvaluation evaluate_checker(const std::vector<EvalItem>& items, const CheckerFn& checker);

}  // namespace instructlr
