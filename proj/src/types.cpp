#include "instructlr/types.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "instructlr/error.hpp"
#include "instructlr/text.hpp"

namespace instructlr {

namespace {

/// Strict view over one JSON object: unknown keys are rejected up front.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::initializer_list<std::string_view> allowed) : j_(j) {
    if (!j.is_object()) throw SchemaError("<record>", "expected a JSON object");
    for (const auto& [key, _] : j.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        throw SchemaError(key, "unknown field");
    }
  }

  const Json& required(std::string_view key) const {
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) throw SchemaError(std::string(key), "missing");
    return *it;
  }

  const Json* optional(std::string_view key) const {
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  std::string str(std::string_view key) const { return as_string(key, required(key)); }

  std::optional<std::string> opt_str(std::string_view key) const {
    if (const Json* v = optional(key)) return as_string(key, *v);
    return std::nullopt;
  }

  bool boolean(std::string_view key) const {
    const Json& v = required(key);
    if (!v.is_boolean()) throw SchemaError(std::string(key), "expected a boolean");
    return v.get<bool>();
  }

  int integer(std::string_view key) const {
    const Json& v = required(key);
    if (!v.is_number_integer()) throw SchemaError(std::string(key), "expected an integer");
    return v.get<int>();
  }

  const Json& array(std::string_view key) const {
    const Json& v = required(key);
    if (!v.is_array()) throw SchemaError(std::string(key), "expected an array");
    return v;
  }

 private:
  static std::string as_string(std::string_view key, const Json& v) {
    if (!v.is_string()) throw SchemaError(std::string(key), "expected a string");
    return v.get<std::string>();
  }

  const Json& j_;
};

}  // namespace

// ---------------------------------------------------------------- languages

LanguageRegistry::LanguageRegistry() {
  add("dje", "Zarma");
  add("bam", "Bambara");
  add("ful", "Fulfulde");
}

void LanguageRegistry::add(std::string code, std::string display_name) {
  if (code.empty()) throw ConfigError("language code must be non-empty");
  names_[std::move(code)] = std::move(display_name);
}

bool LanguageRegistry::contains(std::string_view code) const { return names_.find(code) != names_.end(); }

LanguageCode LanguageRegistry::require(std::string_view code) const {
  if (code.empty()) throw ConfigError("language code is empty");
  if (!contains(code)) throw ConfigError("unregistered language code \"" + std::string(code) + "\"");
  return LanguageCode{std::string(code)};
}

const std::string& LanguageRegistry::display_name(const LanguageCode& lang) const {
  auto it = names_.find(lang.code);
  if (it == names_.end()) throw ConfigError("unregistered language code \"" + lang.code + "\"");
  return it->second;
}

// ---------------------------------------------------------------- topics

TopicCatalog::TopicCatalog(std::vector<Topic> topics) : topics_(std::move(topics)) {
  std::set<int> ids;
  std::set<std::string> names;
  for (const auto& t : topics_) {
    if (!ids.insert(t.id).second) throw ConfigError("duplicate topic id " + std::to_string(t.id));
    if (t.name_fr.empty()) throw ConfigError("topic " + std::to_string(t.id) + " has an empty name");
    if (!names.insert(t.name_fr).second) throw ConfigError("duplicate topic name \"" + t.name_fr + "\"");
  }
}

TopicCatalog TopicCatalog::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open topic catalog " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!j.is_array()) throw SchemaError("<catalog>", "expected an array of topics");
  std::vector<Topic> topics;
  for (const auto& t : j) topics.push_back(from_json<Topic>(t));
  return TopicCatalog(std::move(topics));
}

const Topic* TopicCatalog::find_by_name(std::string_view name_fr) const {
  for (const auto& t : topics_)
    if (t.name_fr == name_fr) return &t;
  return nullptr;
}

const Topic* TopicCatalog::find_by_id(int id) const {
  for (const auto& t : topics_)
    if (t.id == id) return &t;
  return nullptr;
}

// ---------------------------------------------------------------- enums

std::string_view to_token(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::fluency: return "fluency";
    case ErrorCategory::suffix_misuse: return "suffix_misuse";
    case ErrorCategory::tense_inconsistency: return "tense_inconsistency";
    case ErrorCategory::orthography: return "orthography";
  }
  return "fluency";
}

std::string_view to_label(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::fluency: return "Fluency";
    case ErrorCategory::suffix_misuse: return "Suffix Misuse";
    case ErrorCategory::tense_inconsistency: return "Tense Inconsistency";
    case ErrorCategory::orthography: return "Orthography";
  }
  return "Fluency";
}

std::optional<ErrorCategory> parse_error_category(std::string_view s) {
  std::string folded = text::fold_case(text::trim(s));
  for (ErrorCategory c : kAllErrorCategories) {
    if (s == to_token(c) || folded == text::fold_case(to_label(c))) return c;
  }
  return std::nullopt;
}

std::string_view to_token(TriageStatus s) {
  switch (s) {
    case TriageStatus::accepted: return "accepted";
    case TriageStatus::low_priority: return "low_priority";
    case TriageStatus::top_priority: return "top_priority";
  }
  return "accepted";
}

std::optional<TriageStatus> parse_triage_status(std::string_view s) {
  for (auto st : {TriageStatus::accepted, TriageStatus::low_priority, TriageStatus::top_priority})
    if (s == to_token(st)) return st;
  return std::nullopt;
}

std::string_view to_token(RuleKind k) {
  switch (k) {
    case RuleKind::lexicon: return "lexicon";
    case RuleKind::morphology: return "morphology";
    case RuleKind::syntax: return "syntax";
    case RuleKind::negation: return "negation";
  }
  return "lexicon";
}

std::optional<std::string> annotation_invariant_violation(const AnnotationRecord& r) {
  if (r.draft_id.empty()) return "draft_id";
  if (r.annotator_id.empty()) return "annotator_id";
  if (!r.is_correct) {
    if (!r.corrected_response || text::trim(*r.corrected_response).empty()) return "corrected_response";
    if (!r.error_category) return "error_category";
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- to_json

Json to_json(const Topic& t) {
  Json j;
  j["id"] = t.id;
  j["name_fr"] = t.name_fr;
  j["description_fr"] = t.description_fr;
  j["requires_cot"] = t.requires_cot;
  return j;
}

Json to_json(const SeedInstruction& s) {
  Json j;
  j["id"] = s.id;
  j["instruction_fr"] = s.instruction_fr;
  j["context_fr"] = s.context_fr;
  return j;
}

Json to_json(const Draft& d) {
  Json j;
  j["id"] = d.id;
  j["instr_fr"] = d.instr_fr;
  j["instr_lrl"] = d.instr_lrl;
  j["resp_lrl"] = d.resp_lrl;
  j["CoT_lrl"] = d.cot_lrl;
  j["topic_fr"] = d.topic_fr;
  j["lang"] = d.lang.code;
  return j;
}

Json to_json(const Violation& v) {
  Json j;
  j["rule_id"] = v.rule_id;
  j["category"] = to_token(v.category);
  j["span"] = Json::array({v.span.begin, v.span.end});
  j["message"] = v.message;
  return j;
}

Json to_json(const CheckerAnalysis& a) {
  Json j;
  j["is_correct"] = a.is_correct;
  if (a.reason) j["reason"] = *a.reason;
  Json opts = Json::array();
  for (const auto& o : a.options) opts.push_back(Json{{"text", o.text}, {"explanation", o.explanation}});
  j["options"] = std::move(opts);
  return j;
}

Json to_json(const CheckedDraft& c) {
  Json j = to_json(c.draft);
  j["status"] = to_token(c.status);
  if (!c.analysis.empty()) {
    Json a = Json::object();
    for (const auto& fa : c.analysis) a[fa.field] = to_json(fa.analysis);
    j["analysis"] = std::move(a);
  }
  if (!c.applied_correction.empty()) {
    Json a = Json::object();
    for (const auto& ac : c.applied_correction) a[ac.field] = ac.text;
    j["applied_correction"] = std::move(a);
  }
  return j;
}

Json to_json(const AnnotationRecord& r) {
  Json j;
  j["draft_id"] = r.draft_id;
  j["annotator_id"] = r.annotator_id;
  j["is_correct"] = r.is_correct ? "Yes" : "No";
  if (r.corrected_instruction) j["corrected_instruction"] = *r.corrected_instruction;
  if (r.corrected_response) j["corrected_response"] = *r.corrected_response;
  if (r.error_category) j["error_category"] = to_token(*r.error_category);
  if (r.comments) j["comments"] = *r.comments;
  return j;
}

Json to_json(const GrammarRule& r) {
  Json j;
  j["id"] = r.id;
  j["title"] = r.title;
  j["kind"] = to_token(r.kind);
  j["patterns"] = r.patterns;
  Json ex = Json::array();
  for (const auto& e : r.examples) {
    Json x;
    if (e.wrong) x["wrong"] = *e.wrong;
    x["right"] = e.right;
    ex.push_back(std::move(x));
  }
  j["examples"] = std::move(ex);
  return j;
}

// ---------------------------------------------------------------- from_json

template <>
Topic from_json<Topic>(const Json& j) {
  ObjectReader r(j, {"id", "name_fr", "description_fr", "requires_cot"});
  return Topic{r.integer("id"), r.str("name_fr"), r.str("description_fr"), r.boolean("requires_cot")};
}

template <>
SeedInstruction from_json<SeedInstruction>(const Json& j) {
  ObjectReader r(j, {"id", "instruction_fr", "context_fr"});
  return SeedInstruction{r.str("id"), r.str("instruction_fr"), r.str("context_fr")};
}

namespace {

Draft read_draft(const ObjectReader& r) {
  Draft d;
  d.id = r.str("id");
  d.instr_fr = r.str("instr_fr");
  d.instr_lrl = r.str("instr_lrl");
  d.resp_lrl = r.str("resp_lrl");
  d.cot_lrl = r.str("CoT_lrl");
  d.topic_fr = r.str("topic_fr");
  d.lang = LanguageCode{r.str("lang")};
  if (d.lang.code.empty()) throw SchemaError("lang", "empty language code");
  return d;
}

}  // namespace

template <>
Draft from_json<Draft>(const Json& j) {
  ObjectReader r(j, {"id", "instr_fr", "instr_lrl", "resp_lrl", "CoT_lrl", "topic_fr", "lang"});
  return read_draft(r);
}

template <>
CheckerAnalysis from_json<CheckerAnalysis>(const Json& j) {
  ObjectReader r(j, {"is_correct", "reason", "options"});
  CheckerAnalysis a;
  a.is_correct = r.boolean("is_correct");
  a.reason = r.opt_str("reason");
  for (const auto& o : r.array("options")) {
    ObjectReader orr(o, {"text", "explanation"});
    CorrectionOption opt{orr.str("text"), orr.str("explanation")};
    if (opt.text.empty()) throw SchemaError("options.text", "empty correction text");
    a.options.push_back(std::move(opt));
  }
  if (a.options.size() > kMaxOptions) throw SchemaError("options", "more than 3 options");
  if (a.is_correct && !a.options.empty()) throw SchemaError("options", "correct sentence carries options");
  if (!a.is_correct && !a.reason) throw SchemaError("reason", "missing for an incorrect verdict");
  return a;
}

template <>
CheckedDraft from_json<CheckedDraft>(const Json& j) {
  ObjectReader r(j, {"id", "instr_fr", "instr_lrl", "resp_lrl", "CoT_lrl", "topic_fr", "lang", "status", "analysis",
                     "applied_correction"});
  CheckedDraft c;
  c.draft = read_draft(r);
  auto st = parse_triage_status(r.str("status"));
  if (!st) throw SchemaError("status", "unknown triage status");
  c.status = *st;
  if (const Json* a = r.optional("analysis")) {
    if (!a->is_object()) throw SchemaError("analysis", "expected an object");
    for (const auto& [field, value] : a->items()) c.analysis.push_back({field, from_json<CheckerAnalysis>(value)});
  }
  if (const Json* a = r.optional("applied_correction")) {
    if (!a->is_object()) throw SchemaError("applied_correction", "expected an object");
    for (const auto& [field, value] : a->items()) {
      if (!value.is_string()) throw SchemaError("applied_correction", "expected string values");
      c.applied_correction.push_back({field, value.get<std::string>()});
    }
  }
  if ((c.status == TriageStatus::low_priority) != !c.applied_correction.empty())
    throw SchemaError("applied_correction", "must be present exactly for low_priority drafts");
  return c;
}

template <>
AnnotationRecord from_json<AnnotationRecord>(const Json& j) {
  ObjectReader r(j, {"draft_id", "annotator_id", "is_correct", "corrected_instruction", "corrected_response",
                     "error_category", "comments"});
  AnnotationRecord rec;
  rec.draft_id = r.str("draft_id");
  rec.annotator_id = r.str("annotator_id");
  std::string verdict = r.str("is_correct");
  if (verdict == "Yes") {
    rec.is_correct = true;
  } else if (verdict == "No") {
    rec.is_correct = false;
  } else {
    throw SchemaError("is_correct", "expected \"Yes\" or \"No\"");
  }
  rec.corrected_instruction = r.opt_str("corrected_instruction");
  rec.corrected_response = r.opt_str("corrected_response");
  if (auto cat = r.opt_str("error_category")) {
    rec.error_category = parse_error_category(*cat);
    if (!rec.error_category) throw SchemaError("error_category", "unknown category \"" + *cat + "\"");
  }
  rec.comments = r.opt_str("comments");
  if (auto bad = annotation_invariant_violation(rec)) throw SchemaError(*bad, "required when is_correct is No");
  return rec;
}

template <>
GrammarRule from_json<GrammarRule>(const Json& j) {
  ObjectReader r(j, {"id", "title", "kind", "patterns", "examples"});
  GrammarRule rule;
  rule.id = r.integer("id");
  rule.title = r.str("title");
  std::string kind = r.str("kind");
  bool found = false;
  for (auto k : {RuleKind::lexicon, RuleKind::morphology, RuleKind::syntax, RuleKind::negation}) {
    if (kind == to_token(k)) {
      rule.kind = k;
      found = true;
    }
  }
  if (!found) throw SchemaError("kind", "unknown rule kind \"" + kind + "\"");
  for (const auto& p : r.array("patterns")) {
    if (!p.is_string()) throw SchemaError("patterns", "expected strings");
    rule.patterns.push_back(p.get<std::string>());
  }
  for (const auto& e : r.array("examples")) {
    ObjectReader er(e, {"wrong", "right"});
    rule.examples.push_back(RuleExample{er.opt_str("wrong"), er.str("right")});
  }
  return rule;
}

// ---------------------------------------------------------------- loaders

std::vector<GrammarRule> load_rules(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open rule file " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!j.is_array()) throw SchemaError("<rules>", "expected an array");
  std::vector<GrammarRule> rules;
  for (const auto& r : j) rules.push_back(from_json<GrammarRule>(r));
  std::set<int> ids;
  for (const auto& r : rules) ids.insert(r.id);
  if (ids.size() != rules.size() || ids.size() != 20 || *ids.begin() != 1 || *ids.rbegin() != 20)
    throw SchemaError("id", "rule ids must cover exactly 1..20");
  std::sort(rules.begin(), rules.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return rules;
}

std::vector<GlossaryEntry> load_glossary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open glossary " + path);
  std::vector<GlossaryEntry> out;
  std::set<std::pair<std::string, std::string>> seen;
  std::string line;
  long n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty() || line.front() == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(path + ": expected term_fr<TAB>term_lrl", n);
    GlossaryEntry e{std::string(text::trim(line.substr(0, tab))), std::string(text::trim(line.substr(tab + 1)))};
    if (e.term_fr.empty() || e.term_lrl.empty()) throw ParseError(path + ": empty glossary term", n);
    if (!seen.insert({e.term_fr, e.term_lrl}).second)
      throw ParseError(path + ": duplicate glossary pair " + e.term_fr + "/" + e.term_lrl, n);
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace instructlr
