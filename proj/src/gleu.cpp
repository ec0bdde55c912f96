#include "instructlr/gleu.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "instructlr/text.hpp"

namespace instructlr {

namespace {

constexpr std::size_t kMaxOrder = 4;

std::map<std::vector<std::string>, long> ngrams(const std::vector<std::string>& toks, std::size_t n) {
  std::map<std::vector<std::string>, long> out;
  for (std::size_t i = 0; i + n <= toks.size(); ++i) ++out[{toks.begin() + i, toks.begin() + i + n}];
  return out;
}

}  // namespace

double gleu(std::string_view hypothesis, std::string_view reference) {
  auto ref = text::split_whitespace(reference);
  if (ref.empty()) throw std::invalid_argument("gleu: empty reference");
  auto hyp = text::split_whitespace(hypothesis);

  double log_sum = 0.0;
  for (std::size_t n = 1; n <= kMaxOrder; ++n) {
    auto h = ngrams(hyp, n);
    auto r = ngrams(ref, n);
    long h_total = hyp.size() >= n ? static_cast<long>(hyp.size() - n + 1) : 0;
    long r_total = ref.size() >= n ? static_cast<long>(ref.size() - n + 1) : 0;
    long match = 0;
    for (const auto& [g, c] : h)
      if (auto it = r.find(g); it != r.end()) match += std::min(c, it->second);
    double score = match == 0 ? std::min(1.0 / static_cast<double>(h_total + 1), 1.0 / static_cast<double>(r_total + 1))
                              : std::min(static_cast<double>(match) / static_cast<double>(h_total),
                                         static_cast<double>(match) / static_cast<double>(r_total));
    log_sum += std::log(score);
  }
  return std::exp(log_sum / static_cast<double>(kMaxOrder));
}

}  // namespace instructlr
