#include "instructlr/checkpoint.hpp"

#include "instructlr/error.hpp"
#include "instructlr/jsonl.hpp"

namespace instructlr {

CheckpointJournal::CheckpointJournal(std::filesystem::path path) : path_(std::move(path)) {}

std::vector<Json> CheckpointJournal::load() const {
  std::vector<Json> entries;
  std::ifstream in(path_, std::ios::binary);
  if (!in) return entries;
  std::string line;
  while (std::getline(in, line)) {
    bool complete = !in.eof();  // a final line without '\n' was cut short
    if (line.empty()) continue;
    try {
      entries.push_back(Json::parse(line));
    } catch (const Json::parse_error&) {
      if (complete) throw ParseError("corrupt checkpoint " + path_.string());
    }
  }
  return entries;
}

void CheckpointJournal::append(const Json& entry) {
  std::lock_guard lock(mu_);
  if (!out_.is_open()) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    out_.open(path_, std::ios::binary | std::ios::app);
    if (!out_) throw Error("cannot open checkpoint " + path_.string());
  }
  out_ << dump_line(entry) << '\n';
  out_.flush();
}

void CheckpointJournal::remove() {
  std::lock_guard lock(mu_);
  if (out_.is_open()) out_.close();
  std::error_code ec;
  std::filesystem::remove(path_, ec);
}

}  // namespace instructlr
