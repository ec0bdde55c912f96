#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "instructlr/error.hpp"
#include "instructlr/types.hpp"

namespace instructlr {

/// Canonical single-line serialization: UTF-8, no ASCII escaping, fixed key order.
std::string dump_line(const Json& j);

/// Parses every non-empty line of `path`. Malformed JSON raises ParseError with the line number;
/// schema mismatches raise SchemaError with the line number and offending field.
template <typename T>
std::vector<T> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<T> out;
  std::string line;
  long n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw ParseError(path.string() + ": malformed JSON: " + e.what(), n);
    }
    try {
      out.push_back(from_json<T>(j));
    } catch (const SchemaError& e) {
      throw SchemaError(e.field(), path.string() + ": " + e.what(), n);
    }
  }
  return out;
}

/// Writes one canonical record per line with LF endings. Writes to a sibling temp file
/// and renames it into place.
template <typename T>
void write_jsonl(const std::vector<T>& records, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    for (const auto& r : records) out << dump_line(to_json(r)) << '\n';
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace instructlr
