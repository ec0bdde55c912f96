#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "instructlr/error.hpp"
#include "instructlr/gateway.hpp"
#include "instructlr/types.hpp"

namespace instructlr {

class TopicMismatchError : public Error {
 public:
  TopicMismatchError(const std::string& expected, const std::string& got)
      : Error("context_fr \"" + got + "\" does not match topic \"" + expected + "\"") {}
};

std::string render_seed_prompt(const Topic& topic);

/// Parses one seed from a completion. The returned seed has an empty id.
/// Throws ParseError (no JSON object), SchemaError (missing/empty key), TopicMismatchError.
SeedInstruction parse_seed_response(std::string_view completion, const Topic& expected);

/// Lowercased, punctuation stripped, whitespace collapsed.
std::string normalize_instruction(std::string_view text);
/// Jaccard similarity of the normalized word sets.
double word_jaccard(std::string_view a, std::string_view b);

/// French directive verbs: each surface form maps to a lemma.
class VerbLexicon {
 public:
  VerbLexicon() = default;
  /// One lemma per line followed by its other surface forms, whitespace separated.
  static VerbLexicon load(const std::filesystem::path& path);
  static VerbLexicon builtin_french();
  void add(const std::string& lemma, const std::vector<std::string>& forms);
  /// Lemma of the first token of `instruction` found in the lexicon.
  std::optional<std::string> leading_verb(std::string_view instruction) const;
  std::size_t size() const { return forms_.size(); }

 private:
  std::map<std::string, std::string> forms_;
};

struct TopicQuota {
  int topic_id = 0;
  std::size_t count = 0;
};

struct SeedBatchPlan {
  std::vector<TopicQuota> quotas;

  std::size_t total_count() const;
  /// total / catalog size per topic; the remainder goes to the first topics in catalog order.
  static SeedBatchPlan equal_split(const TopicCatalog& catalog, std::size_t total);
};

struct SeedGenOptions {
  int max_retries = 3;
  std::size_t workers = 4;
  double duplicate_jaccard = 0.9;
  VerbLexicon verbs = VerbLexicon::builtin_french();
  std::optional<std::filesystem::path> checkpoint;
};

struct FailedSlot {
  std::string slot_id;
  int topic_id = 0;
  std::string reason;
};

struct SeedRunReport {
  std::size_t requested = 0;
  std::size_t produced = 0;
  std::size_t retries = 0;
  std::size_t verb_repeats_accepted = 0;
  std::vector<FailedSlot> failed;
  std::map<int, std::size_t> shortfall;  // topic id -> missing seeds

  Json to_json() const;
};

struct SeedRunResult {
  std::vector<SeedInstruction> seeds;
  SeedRunReport report;
};

/// Seed id for slot `index` (1-based) of `topic_id`: s<topic:02>-<index:04>.
std::string seed_slot_id(int topic_id, std::size_t index);

/// Generates seeds for every slot of the plan. First attempts are fetched by a worker pool;
/// acceptance (duplicate and verb-diversity checks, retries) runs in slot order so the output
/// is deterministic under replay. Gateway failures propagate after the checkpoint has been
/// written for every slot completed so far.
SeedRunResult generate_seeds(const SeedBatchPlan& plan, const TopicCatalog& catalog, const Gateway& gateway,
                             const SeedGenOptions& options = {});

}  // namespace instructlr
