#include "instructlr/agreement.hpp"

#include <map>
#include <set>
#include <stdexcept>
#include <string>

#include "instructlr/annotation.hpp"

namespace instructlr {

double krippendorff_alpha(const ReliabilityMatrix& matrix) {
  std::map<std::pair<int, int>, double> coincidence;
  for (const auto& item : matrix) {
    std::vector<int> values;
    for (const auto& v : item)
      if (v) values.push_back(*v);
    const std::size_t m = values.size();
    if (m < 2) continue;
    const double w = 1.0 / static_cast<double>(m - 1);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        if (i != j) coincidence[{values[i], values[j]}] += w;
  }
  if (coincidence.empty()) throw std::invalid_argument("krippendorff_alpha: no pairable values");

  std::map<int, double> marginal;
  double n = 0.0;
  double observed = 0.0;
  for (const auto& [ck, o] : coincidence) {
    marginal[ck.first] += o;
    n += o;
    if (ck.first != ck.second) observed += o;
  }
  double expected = 0.0;
  for (const auto& [c, nc] : marginal)
    for (const auto& [k, nk] : marginal)
      if (c != k) expected += nc * nk;
  if (expected == 0.0) return 1.0;
  return 1.0 - (n - 1.0) * observed / expected;
}

int annotation_label(const AnnotationRecord& record) {
  if (record.is_correct) return 0;
  if (!record.error_category) return 1;
  return 1 + static_cast<int>(*record.error_category);
}

Json AgreementReport::to_json() const {
  Json j;
  j["alpha"] = alpha ? Json(*alpha) : Json(nullptr);
  j["items"] = items;
  j["annotators"] = annotators;
  return j;
}

namespace {

struct Grid {
  std::vector<std::string> annotators;
  std::map<std::string, std::map<std::string, int>> by_draft;  // draft -> annotator -> label
};

Grid build_grid(const std::vector<AnnotationRecord>& records, std::size_t max_items) {
  std::map<std::string, std::map<std::string, int>> all;
  for (const auto& r : records) {
    if (r.annotator_id == kAdjudicator) continue;
    all[r.draft_id][r.annotator_id] = annotation_label(r);
  }
  Grid g;
  std::set<std::string> names;
  for (auto& [draft, labels] : all) {
    if (labels.size() < 2) continue;
    if (max_items > 0 && g.by_draft.size() >= max_items) break;
    for (const auto& [a, _] : labels) names.insert(a);
    g.by_draft.emplace(draft, std::move(labels));
  }
  g.annotators.assign(names.begin(), names.end());
  return g;
}

ReliabilityMatrix to_matrix(const Grid& g) {
  ReliabilityMatrix m;
  for (const auto& [_, labels] : g.by_draft) {
    std::vector<std::optional<int>> row;
    for (const auto& a : g.annotators) {
      auto it = labels.find(a);
      row.push_back(it == labels.end() ? std::nullopt : std::optional<int>(it->second));
    }
    m.push_back(std::move(row));
  }
  return m;
}

}  // namespace

ReliabilityMatrix annotation_matrix(const std::vector<AnnotationRecord>& records, std::size_t max_items) {
  return to_matrix(build_grid(records, max_items));
}

AgreementReport annotation_agreement(const std::vector<AnnotationRecord>& records, std::size_t max_items) {
  auto g = build_grid(records, max_items);
  AgreementReport rep;
  rep.items = g.by_draft.size();
  rep.annotators = g.annotators.size();
  if (rep.items > 0) rep.alpha = krippendorff_alpha(to_matrix(g));
  return rep;
}

}  // namespace instructlr
