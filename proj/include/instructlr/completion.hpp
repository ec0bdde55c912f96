#pragma once

#include <optional>
#include <string_view>

#include "instructlr/types.hpp"

namespace instructlr {

/// First balanced `{...}` span in `text` that parses as a JSON object. Tolerates
/// surrounding prose and markdown fences.
std::optional<Json> extract_json_object(std::string_view text);

}  // namespace instructlr
