#pragma once

#include <string_view>

namespace instructlr {

/// Sentence-level GLEU over whitespace tokens, n = 1..4. Each order scores
/// min(precision, recall) on clipped n-gram matches; an order with no match scores
/// min(1/(h+1), 1/(r+1)) for h hypothesis and r reference n-grams. The result is the
/// geometric mean of the four orders. Throws std::invalid_argument on an empty reference.
double gleu(std::string_view hypothesis, std::string_view reference);

}  // namespace instructlr
