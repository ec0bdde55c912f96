#pragma once

#include <string>
#include <vector>

#include "instructlr/types.hpp"

namespace instructlr {

/// Human-readable invariant breaches; empty means the draft is valid.
using ValidationReport = std::vector<std::string>;

/// Checks every Draft invariant against the topic catalog. Pure; never throws.
ValidationReport validate_draft(const Draft& draft, const TopicCatalog& topics);

}  // namespace instructlr
