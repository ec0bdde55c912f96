#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "instructlr/types.hpp"

namespace instructlr {

enum class WordKind {
  pronoun,
  demonstrative,
  indefinite,
  gender,
  be,
  irregular,
  future_adverb,
  verb,
  noun,
  negation,
  aspect,
  particle,
  adjective,
  word,
};

std::string_view to_token(WordKind k);
std::optional<WordKind> parse_word_kind(std::string_view s);

/// Definite forms a base noun may take: ko -> kwa; ay -> a | +o; a -> +a; o -> a | +a;
/// e/i/u -> o | +o; consonant -> +o.
std::vector<std::string> definite_candidates(std::string_view base);
/// Definite plural: the trailing vowel run of the definite form replaced by "ey".
std::string definite_plural(std::string_view definite);

struct NounForms {
  std::string base;
  std::vector<std::string> definite;  // empty: no definite form asserted
  std::string plural;                 // empty iff definite is empty
};

/// Word inventory for the rule engine. All lookups are case-folded.
class ZarmaLexicon {
 public:
  /// TSV rows: kind, form, definite ('|'-separated, '-' for none), definite_plural, gloss.
  /// Noun rows are checked against the definite and plural patterns; marker words may not be nouns.
  /// Throws SchemaError with the line number.
  static ZarmaLexicon load(const std::filesystem::path& path);

  void add(WordKind kind, std::string_view form);
  /// Throws SchemaError when the forms break the definite/plural patterns.
  void add_noun(std::string_view base, std::vector<std::string> definite, std::string plural);
  /// Throws SchemaError if a negation or aspect marker is also a noun.
  void check_disjoint() const;

  bool is(std::string_view token, WordKind kind) const;
  /// Any listed form, including definite and plural noun forms.
  bool known(std::string_view token) const;
  const NounForms* noun(std::string_view base) const;
  /// Malformed plural (base+"ey" or definite+"ey") mapped to its noun, if it is not the listed plural.
  const NounForms* malformed_plural(std::string_view token) const;
  std::vector<std::string> forms(WordKind kind) const;
  std::size_t size() const { return kinds_.size(); }

 private:
  std::map<std::string, std::set<WordKind>, std::less<>> kinds_;
  std::map<std::string, NounForms, std::less<>> nouns_;
  std::map<std::string, std::string, std::less<>> inflected_;  // definite/plural form -> base
  std::map<std::string, std::string, std::less<>> bad_plural_;
};

/// Bilingual term list with case-folded lookup on either side.
class Glossary {
 public:
  Glossary() = default;
  /// Throws ConfigError naming the term when a French term occurs twice.
  explicit Glossary(std::vector<GlossaryEntry> entries);

  const std::vector<GlossaryEntry>& entries() const { return entries_; }
  const GlossaryEntry* by_french(std::string_view token) const;
  /// First entry in file order with this target-language term.
  const GlossaryEntry* by_target(std::string_view token) const;
  /// French side first, then target side.
  const GlossaryEntry* lookup(std::string_view token) const;

 private:
  std::vector<GlossaryEntry> entries_;
  std::map<std::string, std::size_t, std::less<>> fr_;
  std::map<std::string, std::size_t, std::less<>> lrl_;
};

}  // namespace instructlr
