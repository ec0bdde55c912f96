#include "instructlr/lexicon.hpp"

#include <algorithm>
#include <array>
#include <fstream>

#include "instructlr/error.hpp"
#include "instructlr/text.hpp"

namespace instructlr {

namespace {

constexpr std::array<std::pair<WordKind, std::string_view>, 14> kKindNames = {{
    {WordKind::pronoun, "pronoun"},
    {WordKind::demonstrative, "demonstrative"},
    {WordKind::indefinite, "indefinite"},
    {WordKind::gender, "gender"},
    {WordKind::be, "be"},
    {WordKind::irregular, "irregular"},
    {WordKind::future_adverb, "future_adverb"},
    {WordKind::verb, "verb"},
    {WordKind::noun, "noun"},
    {WordKind::negation, "negation"},
    {WordKind::aspect, "aspect"},
    {WordKind::particle, "particle"},
    {WordKind::adjective, "adjective"},
    {WordKind::word, "word"},
}};

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::vector<std::string> split_bar(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    auto bar = s.find('|', start);
    auto part = text::trim(s.substr(start, bar == std::string_view::npos ? std::string_view::npos : bar - start));
    if (!part.empty()) out.emplace_back(part);
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  return out;
}

}  // namespace

std::string_view to_token(WordKind k) {
  for (const auto& [kind, name] : kKindNames)
    if (kind == k) return name;
  return "word";
}

std::optional<WordKind> parse_word_kind(std::string_view s) {
  for (const auto& [kind, name] : kKindNames)
    if (name == s) return kind;
  return std::nullopt;
}

std::vector<std::string> definite_candidates(std::string_view base) {
  std::string b(base);
  if (b.empty()) return {};
  auto stem = [&](std::size_t n) { return b.substr(0, b.size() - n); };
  if (ends_with(b, "ko")) return {stem(2) + "kwa"};
  if (ends_with(b, "ay")) return {stem(2) + "a", b + "o"};
  char last = b.back();
  if (last == 'a') return {b + "a"};
  if (last == 'o') return {stem(1) + "a", b + "a"};
  if (last == 'e' || last == 'i' || last == 'u') return {stem(1) + "o", b + "o"};
  return {b + "o"};
}

std::string definite_plural(std::string_view definite) {
  std::size_t n = definite.size();
  while (n > 0 && is_vowel(definite[n - 1])) --n;
  return std::string(definite.substr(0, n)) + "ey";
}

// ---------------------------------------------------------------- lexicon

ZarmaLexicon ZarmaLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open lexicon " + path.string());
  ZarmaLexicon lex;
  std::string line;
  long n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty() || line.front() == '#') continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    for (;;) {
      auto tab = line.find('\t', start);
      cols.emplace_back(text::trim(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start)));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (cols.size() < 2 || cols[1].empty()) throw SchemaError("form", path.string() + ": missing form", n);
    auto kind = parse_word_kind(cols[0]);
    if (!kind) throw SchemaError("kind", path.string() + ": unknown kind \"" + cols[0] + "\"", n);
    try {
      if (*kind == WordKind::noun) {
        std::vector<std::string> definite;
        if (cols.size() > 2 && cols[2] != "-") definite = split_bar(cols[2]);
        std::string plural = cols.size() > 3 && cols[3] != "-" ? cols[3] : "";
        lex.add_noun(cols[1], std::move(definite), std::move(plural));
      } else {
        lex.add(*kind, cols[1]);
      }
    } catch (const SchemaError& e) {
      throw SchemaError(e.field(), path.string() + ": " + e.what(), n);
    }
  }
  lex.check_disjoint();
  return lex;
}

void ZarmaLexicon::add(WordKind kind, std::string_view form) { kinds_[text::fold_case(form)].insert(kind); }

void ZarmaLexicon::add_noun(std::string_view base_in, std::vector<std::string> definite, std::string plural) {
  NounForms nf;
  nf.base = text::fold_case(base_in);
  auto allowed = definite_candidates(nf.base);
  for (auto& d : definite) {
    d = text::fold_case(d);
    if (std::find(allowed.begin(), allowed.end(), d) == allowed.end())
      throw SchemaError("definite", "\"" + d + "\" is not a definite form of \"" + nf.base + "\"");
  }
  plural = text::fold_case(plural);
  if (definite.empty() != plural.empty())
    throw SchemaError("definite_plural", "\"" + nf.base + "\" needs both definite and plural forms, or neither");
  if (!definite.empty()) {
    bool ok = std::any_of(definite.begin(), definite.end(),
                          [&](const std::string& d) { return definite_plural(d) == plural; });
    if (!ok) throw SchemaError("definite_plural", "\"" + plural + "\" is not the plural of \"" + nf.base + "\"");
  }
  nf.definite = std::move(definite);
  nf.plural = std::move(plural);

  kinds_[nf.base].insert(WordKind::noun);
  for (const auto& d : nf.definite) inflected_[d] = nf.base;
  if (!nf.plural.empty()) inflected_[nf.plural] = nf.base;
  auto mark_bad = [&](const std::string& form) {
    if (form != nf.plural && !inflected_.count(form) && !kinds_.count(form)) bad_plural_[form] = nf.base;
  };
  if (!nf.plural.empty()) {
    mark_bad(nf.base + "ey");
    for (const auto& d : nf.definite) mark_bad(d + "ey");
  }
  nouns_[nf.base] = std::move(nf);
}

void ZarmaLexicon::check_disjoint() const {
  for (const auto& [form, kinds] : kinds_) {
    if (!kinds.count(WordKind::noun)) continue;
    if (kinds.count(WordKind::negation) || kinds.count(WordKind::aspect))
      throw SchemaError("kind", "marker \"" + form + "\" is also listed as a noun");
  }
}

bool ZarmaLexicon::is(std::string_view token, WordKind kind) const {
  auto it = kinds_.find(text::fold_case(token));
  return it != kinds_.end() && it->second.count(kind) > 0;
}

bool ZarmaLexicon::known(std::string_view token) const {
  auto f = text::fold_case(token);
  return kinds_.count(f) > 0 || inflected_.count(f) > 0;
}

const NounForms* ZarmaLexicon::noun(std::string_view base) const {
  auto it = nouns_.find(text::fold_case(base));
  return it == nouns_.end() ? nullptr : &it->second;
}

const NounForms* ZarmaLexicon::malformed_plural(std::string_view token) const {
  auto it = bad_plural_.find(text::fold_case(token));
  return it == bad_plural_.end() ? nullptr : noun(it->second);
}

std::vector<std::string> ZarmaLexicon::forms(WordKind kind) const {
  std::vector<std::string> out;
  for (const auto& [form, kinds] : kinds_)
    if (kinds.count(kind)) out.push_back(form);
  return out;
}

// ---------------------------------------------------------------- glossary

Glossary::Glossary(std::vector<GlossaryEntry> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (text::trim(e.term_fr).empty() || text::trim(e.term_lrl).empty())
      throw ConfigError("glossary entry " + std::to_string(i + 1) + " has an empty term");
    auto key = text::fold_case(e.term_fr);
    if (!fr_.emplace(key, i).second) throw ConfigError("duplicate glossary term_fr \"" + key + "\"");
    lrl_.emplace(text::fold_case(e.term_lrl), i);
  }
}

const GlossaryEntry* Glossary::by_french(std::string_view token) const {
  auto it = fr_.find(text::fold_case(token));
  return it == fr_.end() ? nullptr : &entries_[it->second];
}

const GlossaryEntry* Glossary::by_target(std::string_view token) const {
  auto it = lrl_.find(text::fold_case(token));
  return it == lrl_.end() ? nullptr : &entries_[it->second];
}

const GlossaryEntry* Glossary::lookup(std::string_view token) const {
  if (const auto* e = by_french(token)) return e;
  return by_target(token);
}

}  // namespace instructlr
