#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "instructlr/checker.hpp"
#include "instructlr/types.hpp"

namespace instructlr {

// ---------------------------------------------------------------- TOML subset

/// Values: "basic strings" with \" \\ \n \t \uXXXX escapes, 'literal strings', integers,
/// floats, true/false. No arrays, inline tables or dotted keys.
using TomlValue = std::variant<std::string, long long, double, bool>;
using TomlTable = std::map<std::string, std::map<std::string, TomlValue>>;  // section -> key -> value

/// Keys before the first [section] land in section "". Throws ParseError with the line number.
TomlTable parse_toml(std::string_view text);

// ---------------------------------------------------------------- pipeline configuration

enum class BackendKind { replay, remote, record };

struct PipelineConfig {
  // [pipeline]
  std::string lang;
  std::size_t total_seeds = 50000;
  std::size_t workers = 4;
  int max_retries = 3;
  double duplicate_jaccard = 0.9;
  std::size_t batch_size = 200;
  CheckerMode checker_mode = CheckerMode::llm;
  std::size_t retrieved_sentences = 5;
  std::size_t n_shot = 3;

  // [paths]; relative paths resolve against the config file's directory
  std::filesystem::path data_dir = "data";
  std::filesystem::path work_dir = "work";
  std::optional<std::filesystem::path> topics;      // default <data_dir>/topics.json
  std::optional<std::filesystem::path> kb_dir;      // default <data_dir>/kb
  std::optional<std::filesystem::path> lexicon;     // default <data_dir>/lexicon/<lang>.tsv
  std::optional<std::filesystem::path> guidelines;  // default <data_dir>/guidelines/<lang>.txt
  std::optional<std::filesystem::path> exemplars;   // default <data_dir>/checker/exemplars.json
  std::optional<std::filesystem::path> verbs;       // default: built-in French directive verbs
  std::optional<std::filesystem::path> annotations; // default <work_dir>/annotations.jsonl

  // [gateway]
  BackendKind backend = BackendKind::replay;
  std::filesystem::path replay_dir = "replay";
  std::string url;
  std::string model;
  double requests_per_minute = 60.0;
  int max_attempts = 5;
  int timeout_seconds = 120;

  // [cost]
  std::filesystem::path scenarios;  // default <data_dir>/scenarios.json
  std::string reviewed_preset;

  // [serve]
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string token;
  int lease_minutes = 15;

  std::filesystem::path topics_path() const;
  std::filesystem::path kb_path() const;
  std::filesystem::path lexicon_path() const;
  std::filesystem::path guidelines_path() const;
  std::filesystem::path exemplars_path() const;
  std::filesystem::path annotations_path() const;
};

/// Unknown sections or keys, wrong value types and a missing or unregistered lang are
/// ConfigErrors. `base_dir` anchors relative paths.
PipelineConfig config_from_toml(const TomlTable& table, const std::filesystem::path& base_dir,
                                const LanguageRegistry& languages = {});
PipelineConfig load_config(const std::filesystem::path& path, const LanguageRegistry& languages = {});

}  // namespace instructlr
