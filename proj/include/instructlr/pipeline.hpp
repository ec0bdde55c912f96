#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "instructlr/annotation.hpp"
#include "instructlr/config.hpp"
#include "instructlr/gateway.hpp"
#include "instructlr/types.hpp"

namespace instructlr {

/// Stage order. Each stage reads the previous stage's output from the work directory.
inline constexpr const char* kStages[] = {"seed", "draft", "check", "export", "final"};

/// File names inside the work directory.
struct WorkLayout {
  std::filesystem::path dir;
  std::filesystem::path seeds() const { return dir / "seeds.jsonl"; }
  std::filesystem::path drafts() const { return dir / "drafts.jsonl"; }
  std::filesystem::path checked() const { return dir / "checked.jsonl"; }
  std::filesystem::path review_dir() const { return dir / "review"; }
  std::filesystem::path final_dataset() const { return dir / "final.jsonl"; }
  std::filesystem::path manifest() const { return dir / "manifest.json"; }
  std::filesystem::path report() const { return dir / "report.json"; }
  std::filesystem::path checkpoints() const { return dir / ".checkpoints"; }
};

struct StageReport {
  std::string name;
  std::string status = "not_run";  // ran | skipped | failed | not_run
  std::size_t count = 0;           // records written by the stage
  std::size_t retries = 0;
  std::size_t failures = 0;
  std::string error;
  double elapsed_ms = 0.0;
  Json details = Json::object();
  Json to_json() const;
};

struct RunReport {
  std::vector<StageReport> stages;
  bool ok() const;
  Json to_json() const;
};

struct RunOptions {
  /// Replaces the backend built from the configuration.
  std::shared_ptr<Backend> backend;
  /// Runs only these stages; empty means all.
  std::set<std::string> only;
  /// Reruns selected stages even when their inputs are unchanged.
  bool force = false;
};

/// Backend described by the [gateway] section. The remote credential comes from
/// INSTRUCTLR_API_KEY.
std::shared_ptr<Backend> make_backend(const PipelineConfig& config);

/// Runs the stages in order. A stage is skipped when its recorded input hash matches and its
/// output is intact. The first failing stage stops the run; later stages are reported not_run.
/// Writes manifest.json after every stage and report.json at the end.
RunReport run_pipeline(const PipelineConfig& config, const RunOptions& options = {});

/// Accepted drafts as generated, low-priority drafts with their applied correction, and
/// every draft with a human decision as decided. Top-priority drafts without a decision
/// are left out. Order follows `checked`.
std::vector<Draft> build_final(const std::vector<CheckedDraft>& checked, const std::vector<MergeDecision>& decisions);

/// Annotation journal records, or none when the file does not exist.
std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& journal);

}  // namespace instructlr
