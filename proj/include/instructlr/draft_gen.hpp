#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "instructlr/error.hpp"
#include "instructlr/gateway.hpp"
#include "instructlr/types.hpp"

namespace instructlr {

class DraftRejected : public Error {
 public:
  using Error::Error;
};

struct DraftPrompt {
  std::string system_preamble;
  std::string user_content;
  /// Both parts joined by a blank line, as a single-message prompt.
  std::string text() const { return system_preamble + "\n\n" + user_content; }
};

/// Loads guidelines/<lang>.txt: one guideline per line, blank lines and '#' comments skipped.
std::vector<std::string> load_guidelines(const std::filesystem::path& path);

DraftPrompt render_draft_prompt(const SeedInstruction& seed, const LanguageCode& lang,
                                std::string_view language_name, const std::vector<std::string>& guidelines);

/// Stable draft identity for a seed: "<lang>-<seed id>".
std::string draft_id_for(const SeedInstruction& seed, const LanguageCode& lang);

/// Builds a Draft from a completion. The French instruction, topic and id come from the
/// seed, not the completion. Throws ParseError / SchemaError, or DraftRejected naming the
/// first broken invariant (word limits, CoT sentinel rule).
Draft parse_draft_response(std::string_view completion, const SeedInstruction& seed, const Topic& topic,
                           const LanguageCode& lang);

struct DraftGenOptions {
  int max_retries = 3;
  std::size_t workers = 4;
  std::optional<std::filesystem::path> checkpoint;
};

struct DraftFailure {
  std::string seed_id;
  std::string reason;
};

struct DraftRunReport {
  std::size_t requested = 0;
  std::size_t produced = 0;
  std::size_t retries = 0;
  std::vector<DraftFailure> failures;  // in seed order
  Json to_json() const;
};

struct DraftRunResult {
  std::vector<Draft> drafts;  // in seed order
  DraftRunReport report;
};

/// One draft per seed, or a reported failure. Seeds whose topic is not in the catalog fail
/// without a gateway call. Gateway errors abort the run; completed seeds stay in the
/// checkpoint and are not requested again on resume.
DraftRunResult generate_drafts(const std::vector<SeedInstruction>& seeds, const TopicCatalog& topics,
                               const LanguageCode& lang, std::string_view language_name,
                               const std::vector<std::string>& guidelines, const Gateway& gateway,
                               const DraftGenOptions& options = {});

}  // namespace instructlr
