#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "instructlr/gleu.hpp"
#include "instructlr/text.hpp"
#include "support.hpp"

using namespace instructlr;

namespace {

/// Independent n-gram enumeration: n-grams as joined strings, clipped counts by nested scans.
double oracle_gleu(const std::string& hyp_s, const std::string& ref_s) {
  auto hyp = text::split_whitespace(hyp_s);
  auto ref = text::split_whitespace(ref_s);
  auto grams = [](const std::vector<std::string>& t, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i + n <= t.size(); ++i) {
      std::string g;
      for (std::size_t k = 0; k < n; ++k) g += t[i + k] + '\x1f';
      out.push_back(g);
    }
    return out;
  };
  double product = 1.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    auto h = grams(hyp, n), r = grams(ref, n);
    std::vector<bool> used(r.size(), false);
    double match = 0;
    for (const auto& g : h) {
      for (std::size_t j = 0; j < r.size(); ++j) {
        if (!used[j] && r[j] == g) {
          used[j] = true;
          ++match;
          break;
        }
      }
    }
    double hn = static_cast<double>(h.size()), rn = static_cast<double>(r.size());
    double s = match > 0 ? std::min(match / hn, match / rn) : std::min(1.0 / (hn + 1), 1.0 / (rn + 1));
    product *= s;
  }
  return std::pow(product, 0.25);
}

}  // namespace

TEST_CASE("identity scores 1") {
  CHECK(gleu("Suba, a ga koy Niamey", "Suba, a ga koy Niamey") == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(gleu("a b c d e", "a b c d e") == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("worked example against the hand computation") {
  // orders: 4/5, 3/4, 2/3, 1/2 -> product 0.2
  double v = gleu("a ga koy Niamey", "Suba a ga koy Niamey");
  CHECK(v == doctest::Approx(std::pow(0.2, 0.25)).epsilon(1e-12));
  CHECK(v == doctest::Approx(oracle_gleu("a ga koy Niamey", "Suba a ga koy Niamey")).epsilon(1e-12));
}

TEST_CASE("disjoint sentences score the smoothing floor") {
  // hyp 3 tokens, ref 2 tokens: per order min(1/(h+1), 1/(r+1)) with h = 3,2,1,0 and r = 2,1,0,0.
  double expected = std::pow((1.0 / 4) * (1.0 / 3) * (1.0 / 2) * (1.0 / 1), 0.25);
  CHECK(gleu("x y z", "p q") == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("empty reference is an error") {
  CHECK_THROWS_AS(gleu("a", ""), std::invalid_argument);
  CHECK_THROWS_AS(gleu("a", "   "), std::invalid_argument);
  CHECK(gleu("", "a") > 0.0);
}

TEST_CASE("brute-force oracle agrees on 500 random pairs") {
  testsupport::Rng rng(1234);
  for (int i = 0; i < 500; ++i) {
    auto ref = testsupport::random_sentence(rng, 1, 12, 4);
    std::string hyp;
    if (i % 5 == 0) {
      hyp = ref;
    } else {
      hyp = testsupport::random_sentence(rng, 0, 12, 4);
    }
    INFO(hyp << " | " << ref);
    double v = gleu(hyp, ref);
    CHECK(v == doctest::Approx(oracle_gleu(hyp, ref)).epsilon(1e-12));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(gleu(hyp + "   \t", ref + " ") == v);
  }
}
