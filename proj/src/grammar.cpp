#include "instructlr/grammar.hpp"

#include <algorithm>
#include <array>
#include <optional>

#include "instructlr/text.hpp"

namespace instructlr {

namespace {

constexpr int kMaxRepairPasses = 3;

constexpr std::array<std::string_view, 12> kPunct = {".", ",", "!", "?", ";", ":", "«", "»", "\"", "“", "”", "…"};
constexpr std::array<std::string_view, 7> kPreverbal = {"ga", "si", "mana", "ma", "wa", "go", "na"};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::size_t punct_prefix(std::string_view s) {
  for (auto p : kPunct)
    if (s.substr(0, p.size()) == p) return p.size();
  return 0;
}

std::size_t punct_suffix(std::string_view s) {
  for (auto p : kPunct)
    if (s.size() >= p.size() && s.substr(s.size() - p.size()) == p) return p.size();
  return 0;
}

bool has_letter(std::string_view s) {
  for (char32_t cp : text::decode_utf8(s))
    if ((cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z') || (cp >= 0xC0 && cp <= 0x24F)) return true;
  return false;
}

bool all_letters(std::string_view s) {
  for (char32_t cp : text::decode_utf8(s)) {
    bool letter = (cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z') ||
                  (cp >= 0xC0 && cp <= 0x24F && cp != 0xD7 && cp != 0xF7);
    if (!letter) return false;
  }
  return true;
}

std::string match_case(std::string_view original, std::string_view replacement) {
  return text::starts_upper(original) ? text::capitalize_first(replacement) : std::string(replacement);
}

bool is_preverbal(std::string_view t) {
  auto f = text::fold_case(t);
  return std::find(kPreverbal.begin(), kPreverbal.end(), f) != kPreverbal.end();
}

class Analyzer {
 public:
  Analyzer(std::string_view s, const ZarmaLexicon& lex, const Glossary& glossary)
      : s_(s), lex_(lex), gl_(glossary), toks_(tokenize(s)) {
    for (std::size_t i = 0; i < toks_.size(); ++i)
      if (!toks_[i].punct) words_.push_back(i);
  }

  std::vector<Finding> run() {
    find_subject_and_verb();
    future_ = detect_future();
    check_future_marker();
    check_negation();
    check_suffixes();
    check_words();
    std::stable_sort(out_.begin(), out_.end(), [](const Finding& a, const Finding& b) {
      if (a.violation.span.begin != b.violation.span.begin) return a.violation.span.begin < b.violation.span.begin;
      return a.violation.rule_id < b.violation.rule_id;
    });
    return std::move(out_);
  }

 private:
  std::string_view s_;
  const ZarmaLexicon& lex_;
  const Glossary& gl_;
  std::vector<Token> toks_;
  std::vector<std::size_t> words_;  // token indices of non-punctuation tokens
  std::optional<std::size_t> subject_;
  std::optional<std::size_t> verb_;
  bool future_ = false;
  std::vector<Finding> out_;

  const std::string& word(std::size_t k) const { return toks_[words_[k]].text; }

  void emit(int rule, ErrorCategory cat, std::size_t tok, std::string msg, std::vector<TextEdit> edits) {
    out_.push_back({Violation{rule, cat, TokenSpan{tok, tok + 1}, std::move(msg)}, std::move(edits)});
  }

  TextEdit replace(std::size_t tok, std::string text) const { return {toks_[tok].begin, toks_[tok].end, std::move(text)}; }
  TextEdit insert_before(std::size_t tok, std::string text) const {
    return {toks_[tok].begin, toks_[tok].begin, std::move(text)};
  }
  /// Removes a token together with the whitespace before it.
  TextEdit remove(std::size_t tok) const {
    std::size_t b = toks_[tok].begin;
    while (b > 0 && is_space(s_[b - 1])) --b;
    if (b == 0) {
      std::size_t e = toks_[tok].end;
      while (e < s_.size() && is_space(s_[e])) ++e;
      return {0, e, ""};
    }
    return {b, toks_[tok].end, ""};
  }

  void find_subject_and_verb() {
    for (std::size_t k = 0; k < words_.size(); ++k) {
      if (lex_.is(word(k), WordKind::pronoun)) {
        subject_ = k;
        break;
      }
    }
    if (!subject_) return;
    for (std::size_t k = *subject_ + 1; k < words_.size(); ++k) {
      if (lex_.is(word(k), WordKind::verb)) {
        verb_ = k;
        break;
      }
    }
  }

  bool detect_future() const {
    for (std::size_t k = 0; k < words_.size(); ++k) {
      if (lex_.is(word(k), WordKind::future_adverb)) return true;
      if (const auto* e = gl_.by_french(word(k)); e && lex_.is(e->term_lrl, WordKind::future_adverb)) return true;
    }
    return false;
  }

  bool marker_between(std::size_t from, std::size_t to) const {
    for (std::size_t k = from + 1; k < to; ++k)
      if (is_preverbal(word(k))) return true;
    return false;
  }

  void check_future_marker() {
    if (!future_ || !subject_ || !verb_) return;
    if (marker_between(*subject_, *verb_)) return;
    std::size_t tok = words_[*verb_];
    emit(9, ErrorCategory::tense_inconsistency, tok,
         "future context needs \"ga\" before the verb \"" + word(*verb_) + "\"", {insert_before(tok, "ga ")});
  }

  void check_negation() {
    for (std::size_t k = 0; k < words_.size(); ++k) {
      auto f = text::fold_case(word(k));
      std::size_t tok = words_[k];
      if (f == "mana" && subject_ && verb_ && k > *verb_) {
        std::size_t vt = words_[*verb_];
        emit(19, ErrorCategory::tense_inconsistency, tok, "past negative \"mana\" goes between subject and verb",
             {remove(tok), insert_before(vt, match_case(word(k), "mana") + " ")});
      }
      if (f == "mana" && future_) {
        emit(20, ErrorCategory::tense_inconsistency, tok, "future negative uses \"si\", not \"mana\"",
             {replace(tok, match_case(word(k), "si"))});
      }
      if (f == "ga") {
        bool next_si = k + 1 < words_.size() && text::fold_case(word(k + 1)) == "si";
        bool prev_si = k > 0 && text::fold_case(word(k - 1)) == "si";
        if (next_si || prev_si)
          emit(20, ErrorCategory::tense_inconsistency, tok, "negative \"si\" replaces \"ga\"", {remove(tok)});
      }
    }
  }

  void check_suffixes() {
    for (std::size_t k = 0; k < words_.size(); ++k) {
      const auto& w = word(k);
      std::size_t tok = words_[k];
      if (const auto* n = lex_.noun(w); n && !n->definite.empty()) {
        bool after_na = k > 0 && text::fold_case(word(k - 1)) == "na" && k + 1 < words_.size() &&
                        lex_.is(word(k + 1), WordKind::verb);
        bool final_object = k + 1 == words_.size() && k > 0 && subject_ && *subject_ < k - 1 &&
                            lex_.is(word(k - 1), WordKind::verb) && !lex_.is(word(k - 1), WordKind::be);
        if (after_na || final_object) {
          emit(after_na ? 17 : 4, ErrorCategory::suffix_misuse, tok,
               "\"" + w + "\" needs its definite form \"" + n->definite.front() + "\"",
               {replace(tok, match_case(w, n->definite.front()))});
        }
      } else if (const auto* p = lex_.malformed_plural(w); p && !lex_.known(w)) {
        emit(5, ErrorCategory::suffix_misuse, tok, "definite plural of \"" + p->base + "\" is \"" + p->plural + "\"",
             {replace(tok, match_case(w, p->plural))});
      }
    }
  }

  bool sentence_initial(std::size_t k) const {
    std::size_t tok = words_[k];
    if (k == 0) return true;
    for (std::size_t t = tok; t > words_[k - 1] + 1; --t) {
      const auto& p = toks_[t - 1].text;
      if (p == "." || p == "!" || p == "?") return true;
    }
    return false;
  }

  void check_words() {
    for (std::size_t k = 0; k < words_.size(); ++k) {
      const auto& w = word(k);
      std::size_t tok = words_[k];
      if (!has_letter(w)) continue;
      if (const auto* e = gl_.by_french(w);
          e && text::fold_case(e->term_fr) != text::fold_case(e->term_lrl) && !lex_.known(w)) {
        emit(0, ErrorCategory::fluency, tok, "\"" + w + "\" is French; use \"" + e->term_lrl + "\"",
             {replace(tok, match_case(w, e->term_lrl))});
        continue;
      }
      if (text::codepoint_count(w) < 4 || !all_letters(w)) continue;
      if (lex_.known(w) || gl_.lookup(w)) continue;
      if (text::starts_upper(w) && !sentence_initial(k)) continue;
      auto folded = text::fold_case(w);
      for (const auto& e : gl_.entries()) {
        if (text::levenshtein(folded, text::fold_case(e.term_lrl)) == 1) {
          emit(0, ErrorCategory::orthography, tok, "\"" + w + "\" is a misspelling of \"" + e.term_lrl + "\"",
               {replace(tok, match_case(w, e.term_lrl))});
          break;
        }
      }
    }
  }
};

}  // namespace

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_space(s[j])) ++j;
    if (j == i) break;
    std::size_t b = i, e = j;
    std::vector<Token> tail;
    while (b < e) {
      auto n = punct_prefix(s.substr(b, e - b));
      if (n == 0) break;
      out.push_back({std::string(s.substr(b, n)), b, b + n, true});
      b += n;
    }
    while (e > b) {
      auto n = punct_suffix(s.substr(b, e - b));
      if (n == 0) break;
      tail.push_back({std::string(s.substr(e - n, n)), e - n, e, true});
      e -= n;
    }
    if (e > b) out.push_back({std::string(s.substr(b, e - b)), b, e, false});
    out.insert(out.end(), tail.rbegin(), tail.rend());
    i = j;
  }
  return out;
}

std::vector<Finding> analyze(std::string_view sentence, const ZarmaLexicon& lexicon, const Glossary& glossary) {
  return Analyzer(sentence, lexicon, glossary).run();
}

std::vector<Violation> check(std::string_view sentence, const ZarmaLexicon& lexicon, const Glossary& glossary) {
  std::vector<Violation> out;
  for (auto& f : analyze(sentence, lexicon, glossary)) out.push_back(std::move(f.violation));
  return out;
}

std::string apply_edits(std::string_view sentence, std::vector<TextEdit> edits) {
  std::stable_sort(edits.begin(), edits.end(), [](const TextEdit& a, const TextEdit& b) { return a.begin < b.begin; });
  std::string out;
  std::size_t pos = 0;
  for (const auto& e : edits) {
    if (e.begin < pos) continue;
    out.append(sentence.substr(pos, e.begin - pos));
    out += e.replacement;
    pos = e.end;
  }
  out.append(sentence.substr(pos));
  return out;
}

std::vector<CorrectionOption> suggest(std::string_view sentence, const std::vector<Violation>& violations,
                                      const ZarmaLexicon& lexicon, const Glossary& glossary) {
  std::vector<Finding> chosen;
  for (auto& f : analyze(sentence, lexicon, glossary))
    if (std::find(violations.begin(), violations.end(), f.violation) != violations.end()) chosen.push_back(std::move(f));
  if (chosen.empty()) return {};

  std::vector<CorrectionOption> options;
  auto add = [&](std::string text, std::string explanation) {
    for (const auto& o : options)
      if (o.text == text) return;
    if (text == sentence) return;
    options.push_back({std::move(text), std::move(explanation)});
  };

  std::vector<TextEdit> all;
  std::vector<std::string> msgs;
  for (const auto& f : chosen) {
    all.insert(all.end(), f.edits.begin(), f.edits.end());
    msgs.push_back(f.violation.message);
  }
  // Repairs can expose further violations (a respelled noun that now needs its definite
  // form). Option 1 keeps repairing while the violation count drops.
  std::string repaired = apply_edits(sentence, all);
  for (int pass = 0; pass < kMaxRepairPasses; ++pass) {
    auto next = analyze(repaired, lexicon, glossary);
    std::vector<TextEdit> edits;
    std::vector<std::string> more;
    for (const auto& f : next) {
      if (f.edits.empty()) continue;
      edits.insert(edits.end(), f.edits.begin(), f.edits.end());
      more.push_back(f.violation.message);
    }
    if (edits.empty()) break;
    auto candidate = apply_edits(repaired, edits);
    if (analyze(candidate, lexicon, glossary).size() >= next.size()) break;
    repaired = std::move(candidate);
    msgs.insert(msgs.end(), more.begin(), more.end());
  }
  add(repaired, text::join(msgs, "; "));
  for (const auto& f : chosen) add(apply_edits(sentence, f.edits), f.violation.message);
  if (options.size() > kMaxOptions) options.resize(kMaxOptions);
  return options;
}

}  // namespace instructlr
