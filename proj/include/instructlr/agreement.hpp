#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "instructlr/types.hpp"

namespace instructlr {

/// items x raters; nullopt marks a missing rating.
using ReliabilityMatrix = std::vector<std::vector<std::optional<int>>>;

/// Nominal Krippendorff's alpha from the coincidence matrix. Items with fewer than two
/// ratings are not pairable and are skipped. Throws std::invalid_argument when no item is
/// pairable. Returns 1.0 when every pairable value is the same.
double krippendorff_alpha(const ReliabilityMatrix& matrix);

/// Nominal label of an annotation: 0 for Yes, 1 + category index for No.
int annotation_label(const AnnotationRecord& record);

struct AgreementReport {
  std::optional<double> alpha;  // absent when nothing is pairable
  std::size_t items = 0;        // drafts with at least two annotators
  std::size_t annotators = 0;
  Json to_json() const;
};

/// Builds the reliability matrix from annotation records (latest per draft and annotator,
/// adjudicator excluded) over drafts rated by at least two annotators, ascending id.
/// `max_items` keeps only the first N such drafts; 0 means all.
ReliabilityMatrix annotation_matrix(const std::vector<AnnotationRecord>& records, std::size_t max_items = 0);

AgreementReport annotation_agreement(const std::vector<AnnotationRecord>& records, std::size_t max_items = 0);

}  // namespace instructlr
