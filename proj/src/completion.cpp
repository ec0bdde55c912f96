#include "instructlr/completion.hpp"

namespace instructlr {

std::optional<Json> extract_json_object(std::string_view text) {
  for (std::size_t start = text.find('{'); start != std::string_view::npos; start = text.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < text.size(); ++i) {
      char c = text[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}' && --depth == 0) {
        try {
          auto j = Json::parse(text.substr(start, i - start + 1));
          if (j.is_object()) return j;
        } catch (const Json::parse_error&) {
        }
        break;
      }
    }
  }
  return std::nullopt;
}

}  // namespace instructlr
