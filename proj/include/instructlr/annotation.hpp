#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "instructlr/types.hpp"

namespace instructlr {

inline constexpr std::array<std::string_view, 9> kReviewColumns = {
    "draft_id",          "instruction_lrl",    "response_lrl",   "rag_status", "is_correct",
    "corrected_instruction", "corrected_response", "error_category", "comments"};

inline constexpr std::string_view kAdjudicator = "adjudicator";

struct ReviewExportOptions {
  std::set<TriageStatus> statuses{TriageStatus::top_priority, TriageStatus::low_priority};
  std::size_t batch_size = 200;
};

/// Drafts to review, top_priority first, then low_priority, each by ascending id.
std::vector<const CheckedDraft*> review_queue(const std::vector<CheckedDraft>& checked,
                                              const std::set<TriageStatus>& statuses);

/// CSV text of each batch, header row included, CRLF line endings.
std::vector<std::string> render_review_batches(const std::vector<CheckedDraft>& checked,
                                               const ReviewExportOptions& options = {});

/// Writes <dir>/<prefix>_001.csv, _002.csv, ... and returns the paths in order.
std::vector<std::filesystem::path> export_review_sheet(const std::vector<CheckedDraft>& checked,
                                                       const std::filesystem::path& dir,
                                                       const ReviewExportOptions& options = {},
                                                       std::string_view prefix = "review");

struct RowError {
  long line = 0;  // 1-based CSV record number, header is record 1
  std::string draft_id;
  std::string field;
  std::string message;
};

struct ImportResult {
  std::vector<AnnotationRecord> records;
  std::vector<RowError> errors;
};

/// Validates every data row; bad rows land in `errors` and are not returned as records.
/// An empty `known_ids` set disables the draft-id check. Throws SchemaError when the header
/// differs from kReviewColumns.
ImportResult import_annotations(std::string_view csv_text, std::string_view annotator_id,
                                const std::set<std::string>& known_ids = {});
ImportResult import_annotations_file(const std::filesystem::path& path, std::string_view annotator_id,
                                     const std::set<std::string>& known_ids = {});

/// Trimmed with internal whitespace collapsed; case preserved.
std::string normalize_correction(std::string_view s);

struct MergeDecision {
  std::string draft_id;
  std::size_t annotators = 0;  // distinct non-adjudicator annotators
  bool needs_adjudication = false;
  bool adjudicated = false;
  std::optional<bool> is_correct;
  std::optional<std::string> final_instruction;
  std::optional<std::string> final_response;
  std::map<ErrorCategory, std::size_t> category_tally;
  Json to_json() const;
};

/// One decision per draft id, sorted by id. A strict majority on Yes, or on No with the same
/// normalized corrected_response, decides; otherwise the draft needs adjudication. A record
/// from the "adjudicator" annotator overrides the vote. Yes takes the original texts from
/// `originals` when present; No takes the corrections, falling back to the original
/// instruction when none was corrected. A later record from the same annotator replaces an
/// earlier one.
std::vector<MergeDecision> merge_annotations(const std::vector<AnnotationRecord>& records,
                                             const std::map<std::string, Draft>& originals = {});

/// CSV with columns draft_id, is_correct, final_instruction, final_response, needs_adjudication,
/// adjudicated, annotators, then one tally column per error category.
std::string render_merge_csv(const std::vector<MergeDecision>& decisions);

/// Annotation journal: one AnnotationRecord JSON object per line, append-only.
void append_annotation(const std::filesystem::path& journal, const AnnotationRecord& record);

}  // namespace instructlr
