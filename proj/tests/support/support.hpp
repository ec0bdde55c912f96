#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "instructlr/config.hpp"
#include "instructlr/gateway.hpp"
#include "instructlr/types.hpp"

namespace testsupport {

namespace fs = std::filesystem;

fs::path source_dir();
fs::path data_dir();
fs::path fixtures_dir();

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

std::string read_file(const fs::path& p);
void write_file(const fs::path& p, const std::string& content);

std::vector<instructlr::SeedInstruction> reference_seeds();
std::vector<instructlr::Draft> reference_drafts();

/// Scripted model for the reference snapshot: seed and draft requests are answered from the
/// fixtures, checker requests with the rule engine's own analysis in the prompt's output format.
std::shared_ptr<instructlr::Backend> reference_backend();

/// Replay-backed configuration over the shipped data for 20 seeds (one per topic).
instructlr::PipelineConfig reference_config(const fs::path& work_dir, const fs::path& replay_dir);

/// Regenerates the committed replay store by running the pipeline once through a recorder.
void generate_reference_replay(const fs::path& replay_dir);

fs::path reference_replay_dir();

/// Deterministic RNG seeded per test.
using Rng = std::mt19937_64;

std::string random_word(Rng& rng, std::size_t min_len = 1, std::size_t max_len = 6, std::size_t alphabet = 6);
std::string random_sentence(Rng& rng, std::size_t min_words, std::size_t max_words, std::size_t alphabet = 6);

}  // namespace testsupport
