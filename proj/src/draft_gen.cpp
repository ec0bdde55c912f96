#include "instructlr/draft_gen.hpp"

#include <fmt/format.h>

#include <cctype>
#include <exception>
#include <fstream>
#include <map>

#include "instructlr/checkpoint.hpp"
#include "instructlr/completion.hpp"
#include "instructlr/parallel.hpp"
#include "instructlr/text.hpp"
#include "instructlr/validate.hpp"

namespace instructlr {

namespace {

constexpr std::string_view kDraftPreamble =
    R"(Vous êtes un assistant IA expert dans la génération de paires instruction–réponse pour des langues à faibles ressources, spécifiquement pour le {target_language}. Votre tâche : (1) générer instr_lrl—la version de l'instruction en {target_language}; (2) générer resp_lrl—une réponse pertinente et grammaticalement correcte en {target_language}; (3) pour les sujets de raisonnement, générer CoT_lrl—une explication des étapes de raisonnement (max 200 mots); pour les autres sujets, CoT_lrl doit être "N/A".

CONTRAINTES:
1. LES MOTS TECHNIQUES (SCIENCE, MÉDECINE, ETC.) DOIVENT RESTER INCHANGÉS MAIS UTILISER LEUR VERSION FRANÇAISE.
2. SI UN MOT N'A PAS D'ÉQUIVALENT EN {TARGET_LANGUAGE}, ÉCRIVEZ SA TRANSCRIPTION PHONÉTIQUE EN FRANÇAIS.
3. N'INVENTEZ PAS DE MOTS. SUIVEZ LES DIRECTIVES.
4. PAS DE TRADUCTION MOT À MOT.
5. LES RÉPONSES (resp_lrl) NE DOIVENT PAS DÉPASSER 100 MOTS.)";

constexpr std::string_view kExpectedOutput = R"(EXPECTED OUTPUT (JSONL):
{
  "instr_fr": "...", "instr_lrl": "...", "resp_lrl": "...", "CoT_lrl": "...", "lang": "{code}"
})";

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
  return s;
}

std::string ascii_upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

GenerationRequest draft_request(const DraftPrompt& prompt, const std::string& seed_id, int attempt) {
  GenerationRequest req;
  req.system_preamble = prompt.system_preamble;
  req.user_content = prompt.user_content;
  req.max_output_tokens = 1024;
  req.temperature = 0.7;
  req.request_tag = attempt == 0 ? "draft:" + seed_id : fmt::format("draft:{}:retry{}", seed_id, attempt);
  return req;
}

}  // namespace

std::vector<std::string> load_guidelines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open guidelines " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    out.emplace_back(t);
  }
  return out;
}

DraftPrompt render_draft_prompt(const SeedInstruction& seed, const LanguageCode& lang, std::string_view language_name,
                                const std::vector<std::string>& guidelines) {
  DraftPrompt p;
  p.system_preamble = replace_all(std::string(kDraftPreamble), "{target_language}", language_name);
  p.system_preamble = replace_all(std::move(p.system_preamble), "{TARGET_LANGUAGE}", ascii_upper(language_name));

  Json request;
  request["instruction_fr"] = seed.instruction_fr;
  request["context_fr"] = seed.context_fr;
  request["specific_guidelines"] = guidelines;
  p.user_content = "USER REQUEST (JSON INPUT):\n" + request.dump(2, ' ', false) + "\n\n" +
                   replace_all(std::string(kExpectedOutput), "{code}", lang.code);
  return p;
}

std::string draft_id_for(const SeedInstruction& seed, const LanguageCode& lang) { return lang.code + "-" + seed.id; }

Draft parse_draft_response(std::string_view completion, const SeedInstruction& seed, const Topic& topic,
                           const LanguageCode& lang) {
  auto j = extract_json_object(completion);
  if (!j) throw ParseError("no JSON object in draft completion");
  auto str_field = [&](const char* key) -> std::string {
    auto it = j->find(key);
    if (it == j->end() || !it->is_string()) throw SchemaError(key, "missing or not a string");
    return std::string(text::trim(it->get<std::string>()));
  };

  Draft d;
  d.id = draft_id_for(seed, lang);
  d.instr_fr = seed.instruction_fr;
  d.instr_lrl = str_field("instr_lrl");
  d.resp_lrl = str_field("resp_lrl");
  d.cot_lrl = str_field("CoT_lrl");
  d.topic_fr = topic.name_fr;
  d.lang = lang;
  if (j->contains("lang")) {
    if (auto got = str_field("lang"); got != lang.code)
      throw SchemaError("lang", "expected \"" + lang.code + "\", got \"" + got + "\"");
  }
  if (d.instr_lrl.empty()) throw SchemaError("instr_lrl", "empty instruction");
  if (d.resp_lrl.empty()) throw SchemaError("resp_lrl", "empty response");

  auto report = validate_draft(d, TopicCatalog({topic}));
  if (!report.empty()) throw DraftRejected(report.front());
  return d;
}

Json DraftRunReport::to_json() const {
  Json j;
  j["requested"] = requested;
  j["produced"] = produced;
  j["retries"] = retries;
  Json f = Json::array();
  for (const auto& x : failures) f.push_back(Json{{"seed", x.seed_id}, {"reason", x.reason}});
  j["failures"] = std::move(f);
  return j;
}

DraftRunResult generate_drafts(const std::vector<SeedInstruction>& seeds, const TopicCatalog& topics,
                               const LanguageCode& lang, std::string_view language_name,
                               const std::vector<std::string>& guidelines, const Gateway& gateway,
                               const DraftGenOptions& options) {
  std::optional<CheckpointJournal> journal;
  std::map<std::string, Json> done;
  if (options.checkpoint) {
    journal.emplace(*options.checkpoint);
    for (auto& e : journal->load()) {
      auto key = e.at("seed").get<std::string>();
      done[key] = std::move(e);
    }
  }

  std::vector<const Topic*> topic_of(seeds.size());
  std::vector<DraftPrompt> prompts(seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    topic_of[i] = topics.find_by_name(seeds[i].context_fr);
    if (topic_of[i]) prompts[i] = render_draft_prompt(seeds[i], lang, language_name, guidelines);
  }

  std::vector<std::string> first(seeds.size());
  std::vector<std::exception_ptr> first_error(seeds.size());
  parallel_for(seeds.size(), options.workers, [&](std::size_t i) {
    if (!topic_of[i] || done.count(seeds[i].id)) return;
    try {
      first[i] = gateway.generate(draft_request(prompts[i], seeds[i].id, 0)).text;
    } catch (...) {
      first_error[i] = std::current_exception();
    }
  });

  DraftRunResult result;
  result.report.requested = seeds.size();
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const auto& seed = seeds[i];
    if (auto it = done.find(seed.id); it != done.end()) {
      const Json& e = it->second;
      result.report.retries += e.at("retries").get<std::size_t>();
      if (e.contains("draft"))
        result.drafts.push_back(from_json<Draft>(e.at("draft")));
      else
        result.report.failures.push_back({seed.id, e.at("failed").get<std::string>()});
      continue;
    }

    Json entry;
    entry["seed"] = seed.id;
    std::size_t retries = 0;
    std::optional<Draft> draft;
    std::string reason;
    if (!topic_of[i]) {
      reason = "unknown topic \"" + seed.context_fr + "\"";
    } else {
      for (int attempt = 0; attempt <= options.max_retries && !draft; ++attempt) {
        std::string completion;
        if (attempt == 0) {
          if (first_error[i]) std::rethrow_exception(first_error[i]);
          completion = first[i];
        } else {
          ++retries;
          completion = gateway.generate(draft_request(prompts[i], seed.id, attempt)).text;
        }
        try {
          draft = parse_draft_response(completion, seed, *topic_of[i], lang);
        } catch (const ParseError& e) {
          reason = e.what();
        } catch (const SchemaError& e) {
          reason = e.what();
        } catch (const DraftRejected& e) {
          reason = e.what();
        }
      }
    }

    entry["retries"] = retries;
    result.report.retries += retries;
    if (draft) {
      entry["draft"] = to_json(*draft);
      result.drafts.push_back(std::move(*draft));
    } else {
      entry["failed"] = reason;
      result.report.failures.push_back({seed.id, reason});
    }
    if (journal) journal->append(entry);
  }
  result.report.produced = result.drafts.size();
  return result;
}

}  // namespace instructlr
