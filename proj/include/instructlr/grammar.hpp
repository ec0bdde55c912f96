#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "instructlr/lexicon.hpp"
#include "instructlr/types.hpp"

namespace instructlr {

struct Token {
  std::string text;
  std::size_t begin = 0;  // byte offsets into the sentence
  std::size_t end = 0;
  bool punct = false;
  friend bool operator==(const Token&, const Token&) = default;
};

/// Whitespace split; leading and trailing . , ! ? ; : « » " “ ” become separate tokens.
/// Hyphens and apostrophes stay inside words.
std::vector<Token> tokenize(std::string_view sentence);

struct TextEdit {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string replacement;
};

struct Finding {
  Violation violation;
  std::vector<TextEdit> edits;  // applying these repairs the violation
};

/// Violations with their repairs, sorted by token position then rule id.
std::vector<Finding> analyze(std::string_view sentence, const ZarmaLexicon& lexicon, const Glossary& glossary);

std::vector<Violation> check(std::string_view sentence, const ZarmaLexicon& lexicon, const Glossary& glossary);

/// Full repair first, then one option per single violation, duplicates dropped, at most three.
std::vector<CorrectionOption> suggest(std::string_view sentence, const std::vector<Violation>& violations,
                                      const ZarmaLexicon& lexicon, const Glossary& glossary);

/// Applies edits in offset order; an edit overlapping an earlier one is skipped.
std::string apply_edits(std::string_view sentence, std::vector<TextEdit> edits);

}  // namespace instructlr
