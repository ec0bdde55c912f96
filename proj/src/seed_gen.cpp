#include "instructlr/seed_gen.hpp"

#include <fmt/format.h>

#include <cmath>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>

#include "instructlr/checkpoint.hpp"
#include "instructlr/completion.hpp"
#include "instructlr/parallel.hpp"
#include "instructlr/text.hpp"

namespace instructlr {

namespace {

constexpr std::string_view kSeedTemplate = R"(Domaine : {domain}

TASK:
GÉNÉREZ UNE SEULE CONSIGNE OU QUESTION EN FRANÇAIS, REPRÉSENTATIVE DE CE DOMAINE.
VOUS POUVEZ CHOISIR :
- QUESTION À CHOIX MULTIPLES (Options: A)..., B)... etc.)
- QUESTION VRAI/FAUX
- AFFIRMATION À COMPLÉTER
- DEMANDE DE LISTE (ex. : "Donnez x exemples de...")
- TÂCHE OUVERTE (CLASSIFICATION, RÉSUMÉ, EXPLICATION, EXEMPLE, ETC.)
- OU N'IMPORTE QUEL AUTRE STYLE.

CONTRAINTES :
1. RESTEZ EN 1 À 4 PHRASES.
2. NE DEMANDEZ PAS DE DESSIN, DE CHANT, DE GÉNÉRATION D'IMAGE, NI DE RECHERCHE SUR LE WEB.
3. UTILISEZ UN VERBE UNIQUE POUR ÉVITER LA RÉPÉTITION ET MAXIMISER LA DIVERSITÉ.
4. FOURNISSEZ UNE ENTRÉE RÉALISTE (<=150 MOTS).
5. L'ENTRÉE DOIT ÊTRE SPÉCIFIQUE, SUBSTANTIELLE ET FOURNIR UN CONTENU STIMULANT.
6. NE RÉPONDEZ PAS AUX INSTRUCTIONS OU QUESTIONS — LIMITEZ-VOUS JUSTE À L'INSTRUCTION OU À LA QUESTION.

OUTPUT FORMAT (JSON):
RENVOYEZ STRICTEMENT CE JSON :
{
  "instruction_fr": "<VOTRE INSTRUCTION>",
  "context_fr": "{domain}"
}
)";

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
  return s;
}

bool is_word_cp(char32_t cp) {
  if ((cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z') || (cp >= U'0' && cp <= U'9')) return true;
  // Latin-1 letters (minus × and ÷) and Latin Extended-A.
  return (cp >= 0xC0 && cp <= 0x24F && cp != 0xD7 && cp != 0xF7) || cp == 0x14B || cp == 0x14A;
}

double set_jaccard(const std::set<std::string>& x, const std::set<std::string>& y);

std::set<std::string> word_set(std::string_view s) {
  auto words = text::split_whitespace(normalize_instruction(s));
  return {words.begin(), words.end()};
}

struct SlotPlan {
  const Topic* topic;
  std::size_t index;  // 1-based within topic
  std::size_t quota;
  std::string id;
};

GenerationRequest seed_request(const SlotPlan& slot, int attempt) {
  GenerationRequest req;
  req.user_content = render_seed_prompt(*slot.topic);
  req.max_output_tokens = 512;
  req.temperature = 0.9;
  req.request_tag = attempt == 0 ? "seed:" + slot.id : fmt::format("seed:{}:retry{}", slot.id, attempt);
  return req;
}

}  // namespace

std::string render_seed_prompt(const Topic& topic) {
  return replace_all(std::string(kSeedTemplate), "{domain}", topic.name_fr);
}

SeedInstruction parse_seed_response(std::string_view completion, const Topic& expected) {
  auto j = extract_json_object(completion);
  if (!j) throw ParseError("no JSON object in seed completion");
  auto str_field = [&](const char* key) -> std::string {
    auto it = j->find(key);
    if (it == j->end() || !it->is_string()) throw SchemaError(key, "missing or not a string");
    return it->get<std::string>();
  };
  SeedInstruction seed;
  seed.instruction_fr = std::string(text::trim(str_field("instruction_fr")));
  if (seed.instruction_fr.empty()) throw SchemaError("instruction_fr", "empty instruction");
  seed.context_fr = std::string(text::trim(str_field("context_fr")));
  if (seed.context_fr != expected.name_fr) throw TopicMismatchError(expected.name_fr, seed.context_fr);
  return seed;
}

std::string normalize_instruction(std::string_view s) {
  auto cps = text::decode_utf8(text::fold_case(s));
  for (char32_t& cp : cps)
    if (!is_word_cp(cp)) cp = U' ';
  return text::normalize_spaces(text::encode_utf8(cps));
}

double word_jaccard(std::string_view a, std::string_view b) { return set_jaccard(word_set(a), word_set(b)); }

namespace {

double set_jaccard(const std::set<std::string>& x, const std::set<std::string>& y) {
  if (x.empty() && y.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& w : x) inter += y.count(w);
  return static_cast<double>(inter) / static_cast<double>(x.size() + y.size() - inter);
}

}  // namespace

// ---------------------------------------------------------------- verbs

VerbLexicon VerbLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open verb lexicon " + path.string());
  VerbLexicon lex;
  std::string line;
  while (std::getline(in, line)) {
    auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto words = text::split_whitespace(t);
    lex.add(words.front(), {words.begin() + 1, words.end()});
  }
  return lex;
}

VerbLexicon VerbLexicon::builtin_french() {
  VerbLexicon lex;
  const std::vector<std::vector<std::string>> table = {
      {"explique", "expliquez", "expliquer"},     {"décris", "décrivez", "décrire"},
      {"analyse", "analysez", "analyser"},        {"calcule", "calculez", "calculer"},
      {"donne", "donnez", "donner"},              {"définis", "définissez", "définir"},
      {"résous", "résolvez", "résoudre"},         {"compare", "comparez", "comparer"},
      {"cite", "citez", "citer"},                 {"liste", "listez", "lister"},
      {"identifie", "identifiez", "identifier"},  {"évalue", "évaluez", "évaluer"},
      {"propose", "proposez", "proposer"},        {"résume", "résumez", "résumer"},
      {"trouve", "trouvez", "trouver"},           {"lis", "lisez", "lire"},
      {"justifie", "justifiez", "justifier"},     {"démontre", "démontrez", "démontrer"},
      {"classe", "classez", "classer"},           {"énumère", "énumérez", "énumérer"},
      {"détermine", "déterminez", "déterminer"},  {"rédige", "rédigez", "rédiger"},
      {"illustre", "illustrez", "illustrer"},     {"interprète", "interprétez", "interpréter"},
      {"complète", "complétez", "compléter"},     {"indique", "indiquez", "indiquer"},
      {"discute", "discutez", "discuter"},        {"estime", "estimez", "estimer"},
  };
  for (const auto& row : table) lex.add(row.front(), {row.begin() + 1, row.end()});
  return lex;
}

void VerbLexicon::add(const std::string& lemma, const std::vector<std::string>& forms) {
  auto key = text::fold_case(lemma);
  forms_[key] = key;
  for (const auto& f : forms) forms_[text::fold_case(f)] = key;
}

std::optional<std::string> VerbLexicon::leading_verb(std::string_view instruction) const {
  for (const auto& word : text::split_whitespace(normalize_instruction(instruction))) {
    auto it = forms_.find(word);
    if (it != forms_.end()) return it->second;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- plan

std::size_t SeedBatchPlan::total_count() const {
  std::size_t n = 0;
  for (const auto& q : quotas) n += q.count;
  return n;
}

SeedBatchPlan SeedBatchPlan::equal_split(const TopicCatalog& catalog, std::size_t total) {
  if (catalog.size() == 0) throw ConfigError("empty topic catalog");
  SeedBatchPlan plan;
  std::size_t base = total / catalog.size();
  std::size_t extra = total % catalog.size();
  for (std::size_t i = 0; i < catalog.size(); ++i)
    plan.quotas.push_back({catalog.topics()[i].id, base + (i < extra ? 1 : 0)});
  return plan;
}

std::string seed_slot_id(int topic_id, std::size_t index) { return fmt::format("s{:02}-{:04}", topic_id, index); }

Json SeedRunReport::to_json() const {
  Json j;
  j["requested"] = requested;
  j["produced"] = produced;
  j["retries"] = retries;
  j["verb_repeats_accepted"] = verb_repeats_accepted;
  Json f = Json::array();
  for (const auto& s : failed) f.push_back(Json{{"slot", s.slot_id}, {"topic_id", s.topic_id}, {"reason", s.reason}});
  j["failed"] = std::move(f);
  Json sf = Json::object();
  for (const auto& [topic, n] : shortfall) sf[std::to_string(topic)] = n;
  j["shortfall"] = std::move(sf);
  return j;
}

// ---------------------------------------------------------------- generation

SeedRunResult generate_seeds(const SeedBatchPlan& plan, const TopicCatalog& catalog, const Gateway& gateway,
                             const SeedGenOptions& options) {
  std::vector<SlotPlan> slots;
  for (const auto& q : plan.quotas) {
    const Topic* topic = catalog.find_by_id(q.topic_id);
    if (topic == nullptr) throw ConfigError("plan references unknown topic id " + std::to_string(q.topic_id));
    if (q.count == 0) throw ConfigError("plan quota for topic " + std::to_string(q.topic_id) + " is zero");
    for (std::size_t i = 1; i <= q.count; ++i) slots.push_back({topic, i, q.count, seed_slot_id(q.topic_id, i)});
  }

  std::optional<CheckpointJournal> journal;
  std::map<std::string, Json> done;
  if (options.checkpoint) {
    journal.emplace(*options.checkpoint);
    for (auto& e : journal->load()) {
      auto key = e.at("slot").get<std::string>();
      done[key] = std::move(e);
    }
  }

  // First attempts in parallel; failures are parked and surface in slot order.
  std::vector<std::string> first(slots.size());
  std::vector<std::exception_ptr> first_error(slots.size());
  parallel_for(slots.size(), options.workers, [&](std::size_t i) {
    if (done.count(slots[i].id)) return;
    try {
      first[i] = gateway.generate(seed_request(slots[i], 0)).text;
    } catch (...) {
      first_error[i] = std::current_exception();
    }
  });

  SeedRunResult result;
  result.report.requested = slots.size();
  std::map<int, std::vector<std::string>> verbs_by_topic;

  std::vector<std::pair<std::string, std::set<std::string>>> accepted_words;

  auto accept = [&](const SeedInstruction& seed, int topic_id) {
    result.seeds.push_back(seed);
    accepted_words.emplace_back(normalize_instruction(seed.instruction_fr), word_set(seed.instruction_fr));
    if (auto v = options.verbs.leading_verb(seed.instruction_fr)) verbs_by_topic[topic_id].push_back(*v);
  };

  for (std::size_t i = 0; i < slots.size(); ++i) {
    const auto& slot = slots[i];
    if (auto it = done.find(slot.id); it != done.end()) {
      const Json& e = it->second;
      result.report.retries += e.at("retries").get<std::size_t>();
      if (e.contains("seed")) {
        accept(from_json<SeedInstruction>(e.at("seed")), slot.topic->id);
        if (e.value("verb_repeat", false)) ++result.report.verb_repeats_accepted;
      } else {
        result.report.failed.push_back({slot.id, slot.topic->id, e.at("failed").get<std::string>()});
      }
      continue;
    }

    const std::size_t window = (slot.quota + 4) / 5;
    std::size_t retries = 0;
    std::optional<SeedInstruction> accepted;
    bool verb_repeat = false;
    std::string reason;
    for (int attempt = 0; attempt <= options.max_retries && !accepted; ++attempt) {
      if (attempt > 0) ++retries;
      const bool last = attempt == options.max_retries;
      std::string completion;
      if (attempt == 0) {
        if (first_error[i]) std::rethrow_exception(first_error[i]);
        completion = first[i];
      } else {
        completion = gateway.generate(seed_request(slot, attempt)).text;
      }

      SeedInstruction seed;
      try {
        seed = parse_seed_response(completion, *slot.topic);
      } catch (const ParseError& e) {
        reason = e.what();
        continue;
      } catch (const SchemaError& e) {
        reason = e.what();
        continue;
      } catch (const TopicMismatchError& e) {
        reason = e.what();
        continue;
      }
      seed.id = slot.id;

      bool duplicate = false;
      auto norm = normalize_instruction(seed.instruction_fr);
      auto words = word_set(seed.instruction_fr);
      for (std::size_t k = 0; k < accepted_words.size() && !duplicate; ++k) {
        const auto& [prev_norm, prev_words] = accepted_words[k];
        // Jaccard never exceeds the size ratio, which skips most pairs cheaply.
        auto [lo, hi] = std::minmax(prev_words.size(), words.size());
        bool may_overlap = hi == 0 || static_cast<double>(lo) / static_cast<double>(hi) > options.duplicate_jaccard;
        if (prev_norm == norm || (may_overlap && set_jaccard(prev_words, words) > options.duplicate_jaccard)) {
          duplicate = true;
          reason = "duplicate of " + result.seeds[k].id;
        }
      }
      if (duplicate) continue;

      if (auto verb = options.verbs.leading_verb(seed.instruction_fr)) {
        const auto& recent = verbs_by_topic[slot.topic->id];
        auto from = recent.size() > window ? recent.end() - static_cast<std::ptrdiff_t>(window) : recent.begin();
        if (std::find(from, recent.end(), *verb) != recent.end()) {
          if (!last) {
            reason = "repeated directive verb \"" + *verb + "\"";
            continue;
          }
          verb_repeat = true;
        }
      }
      accepted = std::move(seed);
    }

    Json entry;
    entry["slot"] = slot.id;
    entry["retries"] = retries;
    result.report.retries += retries;
    if (accepted) {
      accept(*accepted, slot.topic->id);
      entry["seed"] = to_json(*accepted);
      if (verb_repeat) {
        entry["verb_repeat"] = true;
        ++result.report.verb_repeats_accepted;
      }
    } else {
      result.report.failed.push_back({slot.id, slot.topic->id, reason});
      entry["failed"] = reason;
    }
    if (journal) journal->append(entry);
  }

  result.report.produced = result.seeds.size();
  for (const auto& f : result.report.failed) ++result.report.shortfall[f.topic_id];
  return result;
}

}  // namespace instructlr
