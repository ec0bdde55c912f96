#include "instructlr/annotation.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <mutex>
#include <sstream>

#include "instructlr/csv.hpp"
#include "instructlr/error.hpp"
#include "instructlr/jsonl.hpp"
#include "instructlr/text.hpp"

namespace instructlr {

namespace {

/// Blank cells and a lone "-" are empty.
bool blank(std::string_view s) {
  auto t = text::trim(s);
  return t.empty() || t == "-";
}

std::optional<std::string> non_empty(const std::string& s) {
  if (blank(s)) return std::nullopt;
  return s;
}

csv::Row header_row() { return {kReviewColumns.begin(), kReviewColumns.end()}; }

/// Most frequent value, ties broken by the smallest value so the choice ignores input order.
std::optional<std::string> plurality(const std::vector<std::string>& values) {
  std::map<std::string, std::size_t> counts;
  for (const auto& v : values) ++counts[v];
  std::optional<std::string> best;
  std::size_t best_n = 0;
  for (const auto& [v, n] : counts) {
    if (n > best_n) {
      best = v;
      best_n = n;
    }
  }
  return best;
}

}  // namespace

std::vector<const CheckedDraft*> review_queue(const std::vector<CheckedDraft>& checked,
                                              const std::set<TriageStatus>& statuses) {
  std::vector<const CheckedDraft*> out;
  for (const auto& c : checked)
    if (statuses.count(c.status)) out.push_back(&c);
  std::stable_sort(out.begin(), out.end(), [](const CheckedDraft* a, const CheckedDraft* b) {
    if (a->status != b->status) return a->status > b->status;
    return a->draft.id < b->draft.id;
  });
  return out;
}

std::vector<std::string> render_review_batches(const std::vector<CheckedDraft>& checked,
                                               const ReviewExportOptions& options) {
  if (options.batch_size == 0) throw ConfigError("batch size must be positive");
  auto queue = review_queue(checked, options.statuses);
  std::vector<std::string> batches;
  for (std::size_t start = 0; start < queue.size(); start += options.batch_size) {
    std::string out = csv::format_row(header_row());
    for (std::size_t i = start; i < std::min(queue.size(), start + options.batch_size); ++i) {
      const auto& c = *queue[i];
      out += csv::format_row({c.draft.id, c.draft.instr_lrl, c.draft.resp_lrl, std::string(to_token(c.status)), "",
                              "", "", "", ""});
    }
    batches.push_back(std::move(out));
  }
  return batches;
}

std::vector<std::filesystem::path> export_review_sheet(const std::vector<CheckedDraft>& checked,
                                                       const std::filesystem::path& dir,
                                                       const ReviewExportOptions& options, std::string_view prefix) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> paths;
  auto batches = render_review_batches(checked, options);
  for (std::size_t i = 0; i < batches.size(); ++i) {
    auto path = dir / fmt::format("{}_{:03}.csv", prefix, i + 1);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << batches[i];
    paths.push_back(path);
  }
  return paths;
}

ImportResult import_annotations(std::string_view csv_text, std::string_view annotator_id,
                                const std::set<std::string>& known_ids) {
  auto rows = csv::parse(csv_text);
  if (rows.empty() || rows.front() != header_row())
    throw SchemaError("header", "review sheet header must be: " +
                                    text::join(header_row(), ","));
  ImportResult result;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    long line = static_cast<long>(r + 1);
    if (std::all_of(row.begin(), row.end(), [](const std::string& f) { return text::trim(f).empty(); })) continue;
    auto fail = [&](std::string field, std::string msg) {
      result.errors.push_back({line, row.empty() ? "" : row[0], std::move(field), std::move(msg)});
    };
    if (row.size() != kReviewColumns.size()) {
      fail("row", fmt::format("expected {} fields, got {}", kReviewColumns.size(), row.size()));
      continue;
    }
    AnnotationRecord rec;
    rec.draft_id = std::string(text::trim(row[0]));
    rec.annotator_id = std::string(annotator_id);
    if (!known_ids.empty() && !known_ids.count(rec.draft_id)) {
      fail("draft_id", "unknown draft_id \"" + rec.draft_id + "\"");
      continue;
    }
    auto verdict = text::fold_case(text::trim(row[4]));
    if (verdict == "yes") {
      rec.is_correct = true;
    } else if (verdict == "no") {
      rec.is_correct = false;
    } else {
      fail("is_correct", verdict.empty() ? "is_correct is empty" : "is_correct must be Yes or No");
      continue;
    }
    rec.corrected_instruction = non_empty(row[5]);
    rec.corrected_response = non_empty(row[6]);
    if (auto cat = text::trim(row[7]); !blank(cat)) {
      rec.error_category = parse_error_category(cat);
      if (!rec.error_category) {
        fail("error_category", "unknown error category \"" + std::string(cat) + "\"");
        continue;
      }
    }
    rec.comments = non_empty(row[8]);
    if (auto bad = annotation_invariant_violation(rec)) {
      fail(*bad, *bad + " is required when is_correct is No");
      continue;
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

ImportResult import_annotations_file(const std::filesystem::path& path, std::string_view annotator_id,
                                     const std::set<std::string>& known_ids) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return import_annotations(ss.str(), annotator_id, known_ids);
}

std::string normalize_correction(std::string_view s) { return text::normalize_spaces(s); }

Json MergeDecision::to_json() const {
  Json j;
  j["draft_id"] = draft_id;
  j["annotators"] = annotators;
  j["needs_adjudication"] = needs_adjudication;
  j["adjudicated"] = adjudicated;
  j["is_correct"] = is_correct ? Json(*is_correct ? "Yes" : "No") : Json(nullptr);
  j["final_instruction"] = final_instruction ? Json(*final_instruction) : Json(nullptr);
  j["final_response"] = final_response ? Json(*final_response) : Json(nullptr);
  Json tally = Json::object();
  for (auto c : kAllErrorCategories) tally[std::string(to_token(c))] = category_tally.count(c) ? category_tally.at(c) : 0;
  j["category_tally"] = std::move(tally);
  return j;
}

std::vector<MergeDecision> merge_annotations(const std::vector<AnnotationRecord>& records,
                                             const std::map<std::string, Draft>& originals) {
  // draft -> annotator -> latest record
  std::map<std::string, std::map<std::string, const AnnotationRecord*>> groups;
  for (const auto& r : records) groups[r.draft_id][r.annotator_id] = &r;

  std::vector<MergeDecision> out;
  for (const auto& [draft_id, by_annotator] : groups) {
    MergeDecision d;
    d.draft_id = draft_id;
    const Draft* original = nullptr;
    if (auto it = originals.find(draft_id); it != originals.end()) original = &it->second;

    std::vector<const AnnotationRecord*> votes;
    const AnnotationRecord* adjudication = nullptr;
    for (const auto& [annotator, rec] : by_annotator) {
      if (annotator == kAdjudicator) {
        adjudication = rec;
        continue;
      }
      votes.push_back(rec);
      if (rec->error_category) ++d.category_tally[*rec->error_category];
    }
    d.annotators = votes.size();

    auto decide_yes = [&] {
      d.is_correct = true;
      if (original) {
        d.final_instruction = original->instr_lrl;
        d.final_response = original->resp_lrl;
      }
    };
    auto decide_no = [&](const std::vector<const AnnotationRecord*>& agreeing) {
      d.is_correct = false;
      // Votes compare normalized text; the kept text is the first agreeing annotator's own.
      std::vector<std::string> responses, instructions;
      std::map<std::string, std::string> raw;
      for (const auto* r : agreeing) {
        auto resp = normalize_correction(*r->corrected_response);
        raw.emplace(resp, *r->corrected_response);
        responses.push_back(std::move(resp));
        if (r->corrected_instruction) {
          auto instr = normalize_correction(*r->corrected_instruction);
          raw.emplace("\x1f" + instr, *r->corrected_instruction);
          instructions.push_back(std::move(instr));
        }
      }
      if (auto w = plurality(responses)) d.final_response = raw.at(*w);
      if (auto w = plurality(instructions)) d.final_instruction = raw.at("\x1f" + *w);
      if (!d.final_instruction && original) d.final_instruction = original->instr_lrl;
    };

    if (adjudication) {
      d.adjudicated = true;
      if (adjudication->is_correct)
        decide_yes();
      else
        decide_no({adjudication});
      out.push_back(std::move(d));
      continue;
    }

    std::size_t yes = 0;
    std::map<std::string, std::vector<const AnnotationRecord*>> no_groups;
    for (const auto* r : votes) {
      if (r->is_correct)
        ++yes;
      else
        no_groups[normalize_correction(*r->corrected_response)].push_back(r);
    }
    const std::size_t n = votes.size();
    if (2 * yes > n) {
      decide_yes();
    } else {
      const std::vector<const AnnotationRecord*>* winner = nullptr;
      for (const auto& [_, group] : no_groups)
        if (2 * group.size() > n) winner = &group;
      if (winner)
        decide_no(*winner);
      else
        d.needs_adjudication = true;
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::string render_merge_csv(const std::vector<MergeDecision>& decisions) {
  csv::Row header = {"draft_id", "is_correct", "final_instruction", "final_response", "needs_adjudication",
                     "adjudicated", "annotators"};
  for (auto c : kAllErrorCategories) header.emplace_back(to_token(c));
  std::string out = csv::format_row(header);
  for (const auto& d : decisions) {
    csv::Row row = {d.draft_id,
                    d.is_correct ? (*d.is_correct ? "Yes" : "No") : "",
                    d.final_instruction.value_or(""),
                    d.final_response.value_or(""),
                    d.needs_adjudication ? "true" : "false",
                    d.adjudicated ? "true" : "false",
                    std::to_string(d.annotators)};
    for (auto c : kAllErrorCategories)
      row.push_back(std::to_string(d.category_tally.count(c) ? d.category_tally.at(c) : 0));
    out += csv::format_row(row);
  }
  return out;
}

void append_annotation(const std::filesystem::path& journal, const AnnotationRecord& record) {
  static std::mutex mu;
  std::lock_guard lock(mu);
  if (journal.has_parent_path()) std::filesystem::create_directories(journal.parent_path());
  std::ofstream out(journal, std::ios::binary | std::ios::app);
  if (!out) throw Error("cannot open annotation journal " + journal.string());
  out << dump_line(to_json(record)) << '\n';
  out.flush();
  if (!out) throw Error("write failed for " + journal.string());
}

}  // namespace instructlr
