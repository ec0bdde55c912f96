#include "instructlr/jsonl.hpp"

namespace instructlr {

std::string dump_line(const Json& j) { return j.dump(-1, ' ', false, Json::error_handler_t::strict); }

}  // namespace instructlr
