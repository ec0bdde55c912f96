#include "instructlr/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "instructlr/error.hpp"
#include "instructlr/text.hpp"

namespace instructlr {

namespace {

bool bare_key_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
}

std::string_view strip_comment(std::string_view line) {
  // '#' outside a string starts a comment.
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quote) {
      if (c == '\\' && quote == '"') {
        ++i;
      } else if (c == quote) {
        quote = 0;
      }
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

void append_utf8(std::string& out, char32_t cp) { out += text::encode_utf8({cp}); }

TomlValue parse_value(std::string_view v, long line) {
  if (v.empty()) throw ParseError("missing value", line);
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"') throw ParseError("unterminated string", line);
    std::string out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
      char c = v[i];
      if (c == '"') throw ParseError("unescaped quote in string", line);
      if (c != '\\') {
        out += c;
        continue;
      }
      if (++i + 1 >= v.size()) throw ParseError("dangling escape", line);
      switch (v[i]) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'u': {
          if (i + 5 > v.size() - 1) throw ParseError("short \\u escape", line);
          unsigned cp = 0;
          auto r = std::from_chars(v.data() + i + 1, v.data() + i + 5, cp, 16);
          if (r.ec != std::errc() || r.ptr != v.data() + i + 5) throw ParseError("bad \\u escape", line);
          append_utf8(out, static_cast<char32_t>(cp));
          i += 4;
          break;
        }
        default: throw ParseError(std::string("unknown escape \\") + v[i], line);
      }
    }
    return out;
  }
  if (v.front() == '\'') {
    if (v.size() < 2 || v.back() != '\'') throw ParseError("unterminated string", line);
    auto inner = v.substr(1, v.size() - 2);
    if (inner.find('\'') != std::string_view::npos) throw ParseError("quote inside literal string", line);
    return std::string(inner);
  }
  if (v == "true") return true;
  if (v == "false") return false;
  std::string digits;
  for (char c : v)
    if (c != '_') digits += c;
  long long i = 0;
  auto ri = std::from_chars(digits.data(), digits.data() + digits.size(), i);
  if (ri.ec == std::errc() && ri.ptr == digits.data() + digits.size()) return i;
  double d = 0;
  auto rd = std::from_chars(digits.data(), digits.data() + digits.size(), d);
  if (rd.ec == std::errc() && rd.ptr == digits.data() + digits.size()) return d;
  throw ParseError("unsupported value \"" + std::string(v) + "\"", line);
}

}  // namespace

TomlTable parse_toml(std::string_view input) {
  TomlTable table;
  std::string section;
  table[section];
  std::set<std::string> seen;
  std::istringstream in{std::string(input)};
  std::string raw;
  long line = 0;
  while (std::getline(in, raw)) {
    ++line;
    auto s = text::trim(strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']' || s.size() < 3) throw ParseError("malformed section header", line);
      section = std::string(text::trim(s.substr(1, s.size() - 2)));
      if (section.empty() || !std::all_of(section.begin(), section.end(), bare_key_char))
        throw ParseError("invalid section name", line);
      if (!seen.insert(section).second) throw ParseError("duplicate section [" + section + "]", line);
      table[section];
      continue;
    }
    auto eq = s.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key = value", line);
    auto key = std::string(text::trim(s.substr(0, eq)));
    if (key.empty() || !std::all_of(key.begin(), key.end(), bare_key_char)) throw ParseError("invalid key", line);
    auto& sec = table[section];
    if (sec.count(key)) throw ParseError("duplicate key \"" + key + "\"", line);
    sec.emplace(key, parse_value(text::trim(s.substr(eq + 1)), line));
  }
  return table;
}

namespace {

class Reader {
 public:
  Reader(const TomlTable& t, std::filesystem::path base) : t_(t), base_(std::move(base)) {}

  const TomlValue* get(const std::string& sec, const std::string& key) {
    used_[sec].insert(key);
    auto s = t_.find(sec);
    if (s == t_.end()) return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  }

  void str(const std::string& sec, const std::string& key, std::string& out) {
    if (auto v = get(sec, key)) {
      if (!std::holds_alternative<std::string>(*v)) fail(sec, key, "a string");
      out = std::get<std::string>(*v);
    }
  }
  void path(const std::string& sec, const std::string& key, std::filesystem::path& out) {
    std::string s;
    if (get(sec, key)) {
      str(sec, key, s);
      out = resolve(s);
    } else {
      out = resolve(out);
    }
  }
  void opt_path(const std::string& sec, const std::string& key, std::optional<std::filesystem::path>& out) {
    if (get(sec, key)) {
      std::string s;
      str(sec, key, s);
      out = resolve(s);
    }
  }
  template <typename T>
  void integer(const std::string& sec, const std::string& key, T& out, long long min) {
    if (auto v = get(sec, key)) {
      if (!std::holds_alternative<long long>(*v)) fail(sec, key, "an integer");
      auto n = std::get<long long>(*v);
      if (n < min) fail(sec, key, "at least " + std::to_string(min));
      out = static_cast<T>(n);
    }
  }
  void number(const std::string& sec, const std::string& key, double& out) {
    if (auto v = get(sec, key)) {
      if (std::holds_alternative<long long>(*v))
        out = static_cast<double>(std::get<long long>(*v));
      else if (std::holds_alternative<double>(*v))
        out = std::get<double>(*v);
      else
        fail(sec, key, "a number");
    }
  }

  void reject_unknown() const {
    for (const auto& [sec, keys] : t_) {
      auto u = used_.find(sec);
      if (u == used_.end()) {
        if (!keys.empty() || !sec.empty()) throw ConfigError("unknown config section [" + sec + "]");
        continue;
      }
      for (const auto& [key, _] : keys)
        if (!u->second.count(key)) throw ConfigError("unknown config key [" + sec + "] " + key);
    }
  }

 private:
  [[noreturn]] static void fail(const std::string& sec, const std::string& key, const std::string& what) {
    throw ConfigError("config [" + sec + "] " + key + " must be " + what);
  }
  std::filesystem::path resolve(const std::string& p) const { return resolve(std::filesystem::path(p)); }
  std::filesystem::path resolve(const std::filesystem::path& p) const {
    return p.is_absolute() ? p : (base_ / p).lexically_normal();
  }

  const TomlTable& t_;
  std::filesystem::path base_;
  std::map<std::string, std::set<std::string>> used_;
};

}  // namespace

PipelineConfig config_from_toml(const TomlTable& table, const std::filesystem::path& base_dir,
                                const LanguageRegistry& languages) {
  PipelineConfig c;
  Reader r(table, base_dir);
  auto anchor = [&](std::filesystem::path& p) { p = (base_dir / p).lexically_normal(); };
  anchor(c.data_dir);
  anchor(c.work_dir);
  anchor(c.replay_dir);

  r.str("pipeline", "lang", c.lang);
  if (c.lang.empty()) throw ConfigError("config [pipeline] lang is required");
  languages.require(c.lang);
  r.integer("pipeline", "total_seeds", c.total_seeds, 1);
  r.integer("pipeline", "workers", c.workers, 1);
  r.integer("pipeline", "max_retries", c.max_retries, 0);
  r.number("pipeline", "duplicate_jaccard", c.duplicate_jaccard);
  r.integer("pipeline", "batch_size", c.batch_size, 1);
  std::string mode = "llm";
  r.str("pipeline", "checker_mode", mode);
  if (mode == "llm")
    c.checker_mode = CheckerMode::llm;
  else if (mode == "rules_only")
    c.checker_mode = CheckerMode::rules_only;
  else
    throw ConfigError("config [pipeline] checker_mode must be llm or rules_only");
  r.integer("pipeline", "retrieved_sentences", c.retrieved_sentences, 1);
  r.integer("pipeline", "n_shot", c.n_shot, 0);

  r.path("paths", "data_dir", c.data_dir);
  r.path("paths", "work_dir", c.work_dir);
  r.opt_path("paths", "topics", c.topics);
  r.opt_path("paths", "kb_dir", c.kb_dir);
  r.opt_path("paths", "lexicon", c.lexicon);
  r.opt_path("paths", "guidelines", c.guidelines);
  r.opt_path("paths", "exemplars", c.exemplars);
  r.opt_path("paths", "verbs", c.verbs);
  r.opt_path("paths", "annotations", c.annotations);

  std::string backend = "replay";
  r.str("gateway", "backend", backend);
  if (backend == "replay")
    c.backend = BackendKind::replay;
  else if (backend == "remote")
    c.backend = BackendKind::remote;
  else if (backend == "record")
    c.backend = BackendKind::record;
  else
    throw ConfigError("config [gateway] backend must be replay, remote or record");
  r.path("gateway", "replay_dir", c.replay_dir);
  r.str("gateway", "url", c.url);
  r.str("gateway", "model", c.model);
  r.number("gateway", "requests_per_minute", c.requests_per_minute);
  r.integer("gateway", "max_attempts", c.max_attempts, 1);
  r.integer("gateway", "timeout_seconds", c.timeout_seconds, 1);
  if (c.backend != BackendKind::replay && c.url.empty())
    throw ConfigError("config [gateway] url is required for the " + backend + " backend");

  c.scenarios = c.data_dir / "scenarios.json";
  r.path("cost", "scenarios", c.scenarios);
  r.str("cost", "reviewed_preset", c.reviewed_preset);

  r.str("serve", "host", c.host);
  r.integer("serve", "port", c.port, 0);
  r.str("serve", "token", c.token);
  r.integer("serve", "lease_minutes", c.lease_minutes, 1);

  r.reject_unknown();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path, const LanguageRegistry& languages) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  TomlTable t;
  try {
    t = parse_toml(ss.str());
  } catch (const ParseError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  return config_from_toml(t, base, languages);
}

std::filesystem::path PipelineConfig::topics_path() const { return topics.value_or(data_dir / "topics.json"); }
std::filesystem::path PipelineConfig::kb_path() const { return kb_dir.value_or(data_dir / "kb"); }
std::filesystem::path PipelineConfig::lexicon_path() const {
  return lexicon.value_or(data_dir / "lexicon" / (lang + ".tsv"));
}
std::filesystem::path PipelineConfig::guidelines_path() const {
  return guidelines.value_or(data_dir / "guidelines" / (lang + ".txt"));
}
std::filesystem::path PipelineConfig::exemplars_path() const {
  return exemplars.value_or(data_dir / "checker" / "exemplars.json");
}
std::filesystem::path PipelineConfig::annotations_path() const {
  return annotations.value_or(work_dir / "annotations.jsonl");
}

}  // namespace instructlr
