#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace instructlr::text {

std::string_view trim(std::string_view s);

/// Whitespace-separated tokens (space, tab, CR, LF, FF, VT).
std::vector<std::string> split_whitespace(std::string_view s);

/// Word count used everywhere a length limit or bucket is applied:
/// the number of whitespace-separated tokens after trimming.
std::size_t word_count(std::string_view s);

/// Trimmed, internal whitespace runs collapsed to a single space, case preserved.
std::string normalize_spaces(std::string_view s);

/// Lowercases ASCII and the Latin-1 supplement / Latin Extended-A letters
/// that occur in French and Zarma orthography (À..Þ, Ŋ). Other bytes pass through.
std::string fold_case(std::string_view s);

/// Upper-cases the first code point if it is a foldable letter.
std::string capitalize_first(std::string_view s);
bool starts_upper(std::string_view s);

/// Decodes UTF-8 into code points; invalid bytes decode as themselves.
std::vector<char32_t> decode_utf8(std::string_view s);
std::string encode_utf8(const std::vector<char32_t>& cps);
std::size_t codepoint_count(std::string_view s);

/// Levenshtein distance over code points.
std::size_t levenshtein(std::string_view a, std::string_view b);

std::string join(const std::vector<std::string>& parts, std::string_view sep);
bool contains(std::string_view haystack, std::string_view needle);

}  // namespace instructlr::text
