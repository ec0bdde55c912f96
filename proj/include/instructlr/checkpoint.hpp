#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <vector>

#include "instructlr/types.hpp"

namespace instructlr {

/// Append-only JSONL progress log for resumable stages. Each entry is one line written
/// and flushed under a lock; a torn final line (crash mid-write) is ignored on load.
class CheckpointJournal {
 public:
  explicit CheckpointJournal(std::filesystem::path path);

  std::vector<Json> load() const;
  void append(const Json& entry);
  /// Deletes the journal once the stage output has been written.
  void remove();
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::mutex mu_;
  std::ofstream out_;
};

}  // namespace instructlr
