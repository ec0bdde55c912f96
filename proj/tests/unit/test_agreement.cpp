#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "instructlr/agreement.hpp"
#include "support.hpp"

using namespace instructlr;

namespace {

/// Pairwise definition: observed disagreement over within-unit ordered pairs weighted by
/// 1/(m_u - 1), expected disagreement over all ordered pairs of pairable values.
double oracle_alpha(const ReliabilityMatrix& m) {
  std::vector<std::vector<int>> units;
  for (const auto& row : m) {
    std::vector<int> u;
    for (const auto& c : row)
      if (c) u.push_back(*c);
    if (u.size() >= 2) units.push_back(u);
  }
  std::vector<int> all;
  for (const auto& u : units) all.insert(all.end(), u.begin(), u.end());
  double n = static_cast<double>(all.size());
  double observed = 0;
  for (const auto& u : units) {
    double d = 0;
    for (std::size_t i = 0; i < u.size(); ++i)
      for (std::size_t j = 0; j < u.size(); ++j)
        if (i != j && u[i] != u[j]) d += 1;
    observed += d / static_cast<double>(u.size() - 1);
  }
  observed /= n;
  double expected = 0;
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = 0; j < all.size(); ++j)
      if (i != j && all[i] != all[j]) expected += 1;
  expected /= n * (n - 1);
  if (expected == 0) return 1.0;
  return 1.0 - observed / expected;
}

ReliabilityMatrix two_raters(const std::vector<int>& r1, const std::vector<int>& r2) {
  ReliabilityMatrix m;
  for (std::size_t i = 0; i < r1.size(); ++i) m.push_back({r1[i], r2[i]});
  return m;
}

ReliabilityMatrix random_matrix(testsupport::Rng& rng, std::size_t items, std::size_t raters, int labels,
                                double missing) {
  std::uniform_real_distribution<double> u(0, 1);
  ReliabilityMatrix m(items, std::vector<std::optional<int>>(raters));
  for (auto& row : m)
    for (auto& c : row)
      if (u(rng) >= missing) c = static_cast<int>(rng() % static_cast<unsigned>(labels));
  return m;
}

AnnotationRecord rec(std::string draft, std::string who, bool ok, ErrorCategory cat = ErrorCategory::fluency) {
  AnnotationRecord r;
  r.draft_id = std::move(draft);
  r.annotator_id = std::move(who);
  r.is_correct = ok;
  if (!ok) {
    r.corrected_response = "x";
    r.error_category = cat;
  }
  return r;
}

}  // namespace

TEST_CASE("documented two-rater examples") {
  CHECK(krippendorff_alpha(two_raters({0, 0, 1, 1}, {0, 0, 1, 1})) == 1.0);
  double v = krippendorff_alpha(two_raters({0, 0, 1, 1}, {1, 1, 0, 0}));
  CHECK(v == doctest::Approx(oracle_alpha(two_raters({0, 0, 1, 1}, {1, 1, 0, 0}))).epsilon(1e-12));
  CHECK(v == doctest::Approx(-0.75).epsilon(1e-12));
}

TEST_CASE("perfect agreement and degenerate input") {
  ReliabilityMatrix all_same = {{2, 2, 2}, {2, 2, std::nullopt}, {2, 2, 2}};
  CHECK(krippendorff_alpha(all_same) == 1.0);
  CHECK_THROWS_AS(krippendorff_alpha({}), std::invalid_argument);
  CHECK_THROWS_AS(krippendorff_alpha({{1, std::nullopt}, {std::nullopt, 2}}), std::invalid_argument);
}

TEST_CASE("coincidence matrix equals the pairwise definition on 200 random matrices") {
  testsupport::Rng rng(2024);
  for (int i = 0; i < 200; ++i) {
    auto m = random_matrix(rng, 2 + rng() % 40, 2 + rng() % 4, 2 + static_cast<int>(rng() % 4), i % 2 ? 0.0 : 0.3);
    // Bias toward agreement on half the rounds so alpha spans a wide range.
    if (i % 3 == 0)
      for (auto& row : m)
        for (auto& c : row)
          if (c && rng() % 2) c = row[0].value_or(*c);
    double want;
    try {
      want = oracle_alpha(m);
    } catch (...) {
      continue;
    }
    bool pairable = std::any_of(m.begin(), m.end(), [](const auto& row) {
      return std::count_if(row.begin(), row.end(), [](const auto& c) { return c.has_value(); }) >= 2;
    });
    if (!pairable) {
      CHECK_THROWS_AS(krippendorff_alpha(m), std::invalid_argument);
      continue;
    }
    CHECK(krippendorff_alpha(m) == doctest::Approx(want).epsilon(1e-9));
    CHECK(krippendorff_alpha(m) <= 1.0 + 1e-12);
  }
}

TEST_CASE("random ratings give alpha near zero (Monte Carlo, 10k items)") {
  testsupport::Rng rng(77);
  auto m = random_matrix(rng, 10000, 3, 5, 0.1);
  CHECK(std::abs(krippendorff_alpha(m)) < 0.02);
}

TEST_CASE("alpha is invariant to relabeling and item order") {
  testsupport::Rng rng(31);
  for (int i = 0; i < 100; ++i) {
    auto m = random_matrix(rng, 5 + rng() % 30, 2 + rng() % 3, 4, 0.2);
    for (auto& row : m)
      if (row[0] && row[1]) row[1] = rng() % 3 ? row[0] : row[1];
    double base;
    try {
      base = krippendorff_alpha(m);
    } catch (const std::invalid_argument&) {
      continue;
    }
    std::vector<int> perm = {0, 1, 2, 3};
    std::shuffle(perm.begin(), perm.end(), rng);
    auto relabeled = m;
    for (auto& row : relabeled)
      for (auto& c : row)
        if (c) c = perm[static_cast<std::size_t>(*c)] + 10;
    CHECK(krippendorff_alpha(relabeled) == doctest::Approx(base).epsilon(1e-12));
    auto reordered = m;
    std::shuffle(reordered.begin(), reordered.end(), rng);
    CHECK(krippendorff_alpha(reordered) == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("annotation labels and matrix") {
  CHECK(annotation_label(rec("d", "a", true)) == 0);
  CHECK(annotation_label(rec("d", "a", false, ErrorCategory::fluency)) == 1);
  CHECK(annotation_label(rec("d", "a", false, ErrorCategory::orthography)) == 4);

  std::vector<AnnotationRecord> recs = {
      rec("d2", "b", true),
      rec("d1", "a", true),
      rec("d1", "b", false, ErrorCategory::suffix_misuse),
      rec("d2", "a", true),
      rec("d3", "a", true),                                     // single rater: not an item
      rec("d1", "adjudicator", true),                           // excluded
      rec("d1", "b", false, ErrorCategory::tense_inconsistency),  // replaces the earlier d1/b
      rec("d4", "c", true),
      rec("d4", "a", true),
  };
  auto m = annotation_matrix(recs);
  // columns a, b, c; rows d1, d2, d4
  REQUIRE(m.size() == 3);
  CHECK(m[0] == std::vector<std::optional<int>>{0, 3, std::nullopt});
  CHECK(m[1] == std::vector<std::optional<int>>{0, 0, std::nullopt});
  CHECK(m[2] == std::vector<std::optional<int>>{0, std::nullopt, 0});
  CHECK(annotation_matrix(recs, 2).size() == 2);

  auto report = annotation_agreement(recs);
  CHECK(report.items == 3);
  CHECK(report.annotators == 3);
  REQUIRE(report.alpha);
  CHECK(*report.alpha == doctest::Approx(oracle_alpha(m)).epsilon(1e-12));
  CHECK(report.to_json()["items"] == 3);

  auto empty = annotation_agreement({rec("d1", "a", true)});
  CHECK_FALSE(empty.alpha.has_value());
  CHECK(empty.to_json()["alpha"].is_null());
}
