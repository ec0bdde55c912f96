#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace instructlr::csv {

using Row = std::vector<std::string>;

/// Quotes a field when it holds a comma, quote, CR or LF; quotes are doubled.
std::string escape(std::string_view field);

/// One record terminated by CRLF.
std::string format_row(const Row& row);

/// RFC 4180 reader: quoted fields may span lines; CRLF and LF both end records.
/// A trailing empty line is ignored. Throws ParseError on an unterminated quote or
/// stray characters after a closing quote.
std::vector<Row> parse(std::string_view text);

}  // namespace instructlr::csv
