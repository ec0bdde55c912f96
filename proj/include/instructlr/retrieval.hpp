#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "instructlr/lexicon.hpp"
#include "instructlr/types.hpp"

namespace instructlr {

/// Sparse term-count vector keyed by case-folded token.
using TermCounts = std::map<std::string, long long, std::less<>>;

class Vectorizer {
 public:
  virtual ~Vectorizer() = default;
  virtual TermCounts vectorize(std::string_view text) const = 0;
};

/// Case-folded word tokens of the grammar tokenizer; punctuation is dropped.
class BagOfWords : public Vectorizer {
 public:
  TermCounts vectorize(std::string_view text) const override;
};

/// Cosine of two count vectors; 0 when either is empty. Exactly 1.0 for equal vectors.
double cosine(const TermCounts& a, const TermCounts& b);

struct KbSentence {
  std::string text;
  std::string source;
};

struct RetrievalHit {
  std::size_t index = 0;  // position in KnowledgeBase::sentences()
  double score = 0.0;
  std::size_t rank = 0;  // 1-based
};

class KnowledgeBase {
 public:
  /// Throws ConfigError on an empty sentence list or a repeated glossary term_fr.
  static KnowledgeBase build(std::vector<KbSentence> sentences, std::vector<GrammarRule> rules,
                             std::vector<GlossaryEntry> glossary,
                             std::shared_ptr<const Vectorizer> vectorizer = std::make_shared<BagOfWords>());

  /// Reads <dir>/sentences.txt, <dir>/rules/<lang>.json and <dir>/glossary.tsv.
  static KnowledgeBase load(const std::filesystem::path& dir, const LanguageCode& lang);

  /// Top k sentences by cosine score, ties in insertion order. Zero-score entries are included.
  std::vector<RetrievalHit> retrieve(std::string_view query, std::size_t k) const;

  /// Per token: the glossary entry matching either side (case-folded), if any.
  std::vector<std::optional<GlossaryEntry>> glossary_info(const std::vector<std::string>& tokens) const;

  const std::vector<KbSentence>& sentences() const { return sentences_; }
  const std::vector<GrammarRule>& rules() const { return rules_; }
  const GrammarRule* rule(int id) const;
  const Glossary& glossary() const { return glossary_; }
  std::size_t index_size() const { return vectors_.size(); }

 private:
  std::vector<KbSentence> sentences_;
  std::vector<GrammarRule> rules_;
  Glossary glossary_;
  std::shared_ptr<const Vectorizer> vectorizer_;
  std::vector<TermCounts> vectors_;
};

}  // namespace instructlr
