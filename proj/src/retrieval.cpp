#include "instructlr/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "instructlr/error.hpp"
#include "instructlr/grammar.hpp"
#include "instructlr/text.hpp"

namespace instructlr {

TermCounts BagOfWords::vectorize(std::string_view s) const {
  TermCounts counts;
  for (const auto& t : tokenize(s))
    if (!t.punct) ++counts[text::fold_case(t.text)];
  return counts;
}

double cosine(const TermCounts& a, const TermCounts& b) {
  long long dot = 0, aa = 0, bb = 0;
  for (const auto& [_, n] : a) aa += n * n;
  for (const auto& [_, n] : b) bb += n * n;
  if (aa == 0 || bb == 0) return 0.0;
  const auto& small = a.size() <= b.size() ? a : b;
  const auto& large = a.size() <= b.size() ? b : a;
  for (const auto& [term, n] : small)
    if (auto it = large.find(term); it != large.end()) dot += n * it->second;
  if (dot == 0) return 0.0;
  // Integer norms keep self-similarity exact: sqrt(d*d) == d for d < 2^26.
  double score = static_cast<double>(dot) / std::sqrt(static_cast<double>(aa) * static_cast<double>(bb));
  return std::min(score, 1.0);
}

KnowledgeBase KnowledgeBase::build(std::vector<KbSentence> sentences, std::vector<GrammarRule> rules,
                                   std::vector<GlossaryEntry> glossary, std::shared_ptr<const Vectorizer> vectorizer) {
  if (sentences.empty()) throw ConfigError("knowledge base needs at least one sentence");
  if (!vectorizer) throw ConfigError("knowledge base needs a vectorizer");
  KnowledgeBase kb;
  kb.glossary_ = Glossary(std::move(glossary));
  kb.sentences_ = std::move(sentences);
  kb.rules_ = std::move(rules);
  kb.vectorizer_ = std::move(vectorizer);
  kb.vectors_.reserve(kb.sentences_.size());
  for (const auto& s : kb.sentences_) kb.vectors_.push_back(kb.vectorizer_->vectorize(s.text));
  return kb;
}

KnowledgeBase KnowledgeBase::load(const std::filesystem::path& dir, const LanguageCode& lang) {
  auto path = dir / "sentences.txt";
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::vector<KbSentence> sentences;
  std::string line;
  long n = 0;
  while (std::getline(in, line)) {
    ++n;
    auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    sentences.push_back({std::string(t), "sentences.txt:" + std::to_string(n)});
  }
  auto rules = load_rules((dir / "rules" / (lang.code + ".json")).string());
  auto glossary = load_glossary((dir / "glossary.tsv").string());
  return build(std::move(sentences), std::move(rules), std::move(glossary));
}

std::vector<RetrievalHit> KnowledgeBase::retrieve(std::string_view query, std::size_t k) const {
  if (k == 0) throw std::invalid_argument("retrieve: k must be at least 1");
  auto q = vectorizer_->vectorize(query);
  std::vector<RetrievalHit> hits(vectors_.size());
  for (std::size_t i = 0; i < vectors_.size(); ++i) hits[i] = {i, cosine(q, vectors_[i]), 0};
  auto by_score = [](const RetrievalHit& a, const RetrievalHit& b) { return a.score > b.score; };
  std::size_t take = std::min(k, hits.size());
  std::stable_sort(hits.begin(), hits.end(), by_score);
  hits.resize(take);
  for (std::size_t i = 0; i < hits.size(); ++i) hits[i].rank = i + 1;
  return hits;
}

std::vector<std::optional<GlossaryEntry>> KnowledgeBase::glossary_info(const std::vector<std::string>& tokens) const {
  std::vector<std::optional<GlossaryEntry>> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    const auto* e = glossary_.lookup(t);
    out.push_back(e ? std::optional<GlossaryEntry>(*e) : std::nullopt);
  }
  return out;
}

const GrammarRule* KnowledgeBase::rule(int id) const {
  for (const auto& r : rules_)
    if (r.id == id) return &r;
  return nullptr;
}

}  // namespace instructlr
