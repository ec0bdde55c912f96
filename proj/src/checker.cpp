#include "instructlr/checker.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <array>
#include <regex>
#include <stdexcept>

#include "instructlr/checkpoint.hpp"
#include "instructlr/error.hpp"
#include "instructlr/gleu.hpp"
#include "instructlr/parallel.hpp"
#include "instructlr/text.hpp"

namespace instructlr {

namespace {

constexpr std::string_view kCheckerTemplate = R"(You are a Zarma language expert. Analyze this potentially corrupted Zarma sentence: "{sentence}"
Rely primarily on your expertise in Zarma grammar and meaning.
Recognize proper nouns unless contradicted by the glossary.
Use the grammar check and glossary below as supplementary aids.

INPUT DATA:
Grammar check results: {grammar_check}
Glossary information: {glossary_info}

OUTPUT FORMAT:
Provide the analysis in this format:
Is the sentence correct? [Yes/No]
Reason for Incorrectness (if applicable): [Brief reason]
Corrections (if incorrect):
  Option 1: [Corrected sentence with explanation]
  Option 2: [Corrected sentence with explanation]
  Option 3: [Corrected sentence with explanation])";

constexpr std::string_view kNoViolations = "no rule violations detected";
constexpr std::string_view kNoGlossary = "no glossary matches";

/// Single pass over the template; substituted values are never rescanned.
std::string substitute(std::string_view tmpl, const std::map<std::string_view, std::string_view>& values) {
  std::string out;
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    auto open = tmpl.find('{', pos);
    if (open == std::string_view::npos) break;
    auto close = tmpl.find('}', open);
    if (close == std::string_view::npos) break;
    auto it = values.find(tmpl.substr(open + 1, close - open - 1));
    if (it == values.end()) {
      out.append(tmpl.substr(pos, open + 1 - pos));
      pos = open + 1;
      continue;
    }
    out.append(tmpl.substr(pos, open - pos));
    out.append(it->second);
    pos = close + 1;
  }
  out.append(tmpl.substr(pos));
  return out;
}

std::string strip_markup(std::string_view line) {
  std::string out;
  for (char c : line)
    if (c != '*' && c != '_' && c != '`' && c != '#' && c != '>') out += c;
  return out;
}

std::vector<std::string> split_lines(std::string_view s) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto nl = s.find('\n', start);
    auto line = s.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return lines;
}

CorrectionOption split_option(std::string_view body) {
  constexpr std::array<std::string_view, 5> delims = {" — ", " – ", " - ", " (", " | "};
  std::size_t best = std::string_view::npos;
  std::string_view which;
  for (auto d : delims) {
    auto p = body.find(d);
    if (p != std::string_view::npos && p < best) {
      best = p;
      which = d;
    }
  }
  if (best == std::string_view::npos) return {std::string(text::trim(body)), ""};
  auto head = text::trim(body.substr(0, best));
  auto tail = text::trim(body.substr(best + which.size()));
  if (which == " (" && !tail.empty() && tail.back() == ')') tail = text::trim(tail.substr(0, tail.size() - 1));
  return {std::string(head), std::string(tail)};
}

std::string lower_ascii(std::string s) {
  for (char& c : s)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return s;
}

}  // namespace

std::string render_checker_prompt(std::string_view sentence, std::string_view grammar_check,
                                  std::string_view glossary_info) {
  return substitute(kCheckerTemplate,
                    {{"sentence", sentence}, {"grammar_check", grammar_check}, {"glossary_info", glossary_info}});
}

std::string render_grammar_check(const std::vector<Violation>& violations, std::string_view sentence,
                                 const std::vector<GrammarRule>& rules) {
  if (violations.empty()) return std::string(kNoViolations);
  auto toks = tokenize(sentence);
  std::vector<std::string> lines;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    const auto& v = violations[i];
    std::string cite = "Glossary check";
    if (v.rule_id > 0) {
      cite = "Rule " + std::to_string(v.rule_id);
      for (const auto& r : rules)
        if (r.id == v.rule_id) cite += " (" + r.title + ")";
    }
    std::string where;
    if (v.span.begin < toks.size()) where = " at \"" + toks[v.span.begin].text + "\"";
    lines.push_back(fmt::format("{}. {} [{}]{}: {}", i + 1, cite, to_label(v.category), where, v.message));
  }
  return text::join(lines, "\n");
}

std::string render_glossary_info(std::string_view sentence, const KnowledgeBase& kb, std::string_view language_name) {
  std::vector<std::string> words;
  for (const auto& t : tokenize(sentence))
    if (!t.punct) words.push_back(t.text);
  auto matches = kb.glossary_info(words);
  std::vector<std::string> lines;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (!matches[i]) continue;
    auto line = fmt::format("{}: French \"{}\", {} \"{}\"", words[i], matches[i]->term_fr, language_name,
                            matches[i]->term_lrl);
    if (std::find(lines.begin(), lines.end(), line) == lines.end()) lines.push_back(std::move(line));
  }
  if (lines.empty()) return std::string(kNoGlossary);
  return text::join(lines, "\n");
}

CheckerAnalysis parse_checker_output(std::string_view completion) {
  static const std::regex verdict_re(R"(is the sentence correct\s*\?\s*\[?\s*(yes|no)\b)", std::regex::icase);
  static const std::regex option_re(R"(^[\s*_>#-]*(?:•\s*)?option\s*([0-9]+)[\s*_]*[:.)][\s*_]*(.*)$)", std::regex::icase);
  static const std::regex reason_re(R"(^\s*(?:[-•]\s*)?reason[^:]*:\s*(.*)$)", std::regex::icase);

  std::optional<bool> verdict;
  std::optional<std::string> reason;
  std::vector<CorrectionOption> options;
  for (const auto& raw : split_lines(completion)) {
    auto clean = strip_markup(raw);
    std::smatch m;
    if (!verdict && std::regex_search(clean, m, verdict_re)) {
      verdict = lower_ascii(m[1].str()) == "yes";
      continue;
    }
    if (!reason && std::regex_match(clean, m, reason_re)) {
      reason = std::string(text::trim(m[1].str()));
      continue;
    }
    // Option bodies are taken from the raw line so markup-like characters in the text survive.
    if (std::regex_match(raw, m, option_re)) {
      std::string body(text::trim(m[2].str()));
      while (!body.empty() && (body.back() == '*' || body.back() == '_')) body.pop_back();
      auto opt = split_option(body);
      if (!opt.text.empty() && options.size() < kMaxOptions) options.push_back(std::move(opt));
    }
  }
  if (!verdict) throw ParseError("checker output has no \"Is the sentence correct?\" verdict");

  CheckerAnalysis a;
  a.is_correct = *verdict;
  if (!a.is_correct) {
    a.reason = reason.value_or("");
    a.options = std::move(options);
  }
  return a;
}

std::string render_checker_output(const CheckerAnalysis& a) {
  std::string out = std::string("Is the sentence correct? ") + (a.is_correct ? "Yes" : "No") + "\n";
  if (a.is_correct) return out;
  out += "Reason for Incorrectness (if applicable): " + a.reason.value_or("") + "\n";
  out += "Corrections (if incorrect):\n";
  for (std::size_t i = 0; i < a.options.size(); ++i) {
    out += fmt::format("  Option {}: {}", i + 1, a.options[i].text);
    if (!a.options[i].explanation.empty()) out += " — " + a.options[i].explanation;
    out += "\n";
  }
  return out;
}

TriageStatus field_status(const CheckerAnalysis& a) {
  if (a.is_correct) return TriageStatus::accepted;
  return a.options.empty() ? TriageStatus::top_priority : TriageStatus::low_priority;
}

CheckedDraft triage(const Draft& draft, std::vector<FieldAnalysis> analysis) {
  CheckedDraft c;
  c.draft = draft;
  for (const auto& fa : analysis) c.status = std::max(c.status, field_status(fa.analysis));
  if (c.status == TriageStatus::low_priority) {
    for (const auto& fa : analysis)
      if (field_status(fa.analysis) == TriageStatus::low_priority)
        c.applied_correction.push_back({fa.field, fa.analysis.options.front().text});
  }
  c.analysis = std::move(analysis);
  return c;
}

Draft corrected_draft(const CheckedDraft& checked) {
  Draft d = checked.draft;
  for (const auto& ac : checked.applied_correction) {
    if (ac.field == kFieldInstr) d.instr_lrl = ac.text;
    else if (ac.field == kFieldResp) d.resp_lrl = ac.text;
    else if (ac.field == kFieldCot) d.cot_lrl = ac.text;
  }
  return d;
}

std::vector<CheckerExemplar> load_exemplars(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checker exemplars " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (!j.is_array()) throw SchemaError("<exemplars>", "expected an array");
  std::vector<CheckerExemplar> out;
  for (const auto& e : j) {
    for (const char* key : {"sentence", "grammar_check", "glossary_info", "output"})
      if (!e.contains(key) || !e[key].is_string()) throw SchemaError(key, "missing or not a string");
    out.push_back({e["sentence"], e["grammar_check"], e["glossary_info"], e["output"]});
  }
  return out;
}

// ---------------------------------------------------------------- checker

Checker::Checker(const KnowledgeBase& kb, const ZarmaLexicon& lexicon, const Gateway* gateway,
                 std::vector<CheckerExemplar> exemplars, CheckerOptions options)
    : kb_(kb), lex_(lexicon), gateway_(gateway), exemplars_(std::move(exemplars)), opt_(std::move(options)) {
  if (opt_.mode == CheckerMode::llm && gateway_ == nullptr) throw ConfigError("llm checker mode needs a gateway");
}

GenerationRequest Checker::build_request(std::string_view sentence, std::string request_tag) const {
  std::string preamble = "Clean " + opt_.language_name + " reference sentences:\n";
  for (const auto& hit : kb_.retrieve(sentence, opt_.retrieved_sentences))
    preamble += "- " + kb_.sentences()[hit.index].text + "\n";
  std::size_t shots = std::min(opt_.n_shot, exemplars_.size());
  for (std::size_t i = 0; i < shots; ++i) {
    const auto& ex = exemplars_[i];
    preamble += fmt::format("\nWorked example {}:\n", i + 1);
    preamble += render_checker_prompt(ex.sentence, ex.grammar_check, ex.glossary_info);
    preamble += "\n\nAnswer:\n" + ex.output;
    if (preamble.back() != '\n') preamble += '\n';
  }

  auto violations = check(sentence, lex_, kb_.glossary());
  GenerationRequest req;
  req.system_preamble = std::move(preamble);
  req.user_content = render_checker_prompt(sentence, render_grammar_check(violations, sentence, kb_.rules()),
                                           render_glossary_info(sentence, kb_, opt_.language_name));
  req.max_output_tokens = 768;
  req.temperature = 0.0;
  req.request_tag = std::move(request_tag);
  return req;
}

CheckerAnalysis Checker::analyze(std::string_view sentence, const std::string& request_tag) const {
  if (opt_.mode == CheckerMode::rules_only) {
    auto violations = check(sentence, lex_, kb_.glossary());
    CheckerAnalysis a;
    if (violations.empty()) return a;
    a.is_correct = false;
    std::vector<std::string> msgs;
    for (const auto& v : violations) msgs.push_back(v.message);
    a.reason = text::join(msgs, "; ");
    a.options = suggest(sentence, violations, lex_, kb_.glossary());
    return a;
  }

  std::string last_error;
  for (int attempt = 0; attempt <= opt_.max_retries; ++attempt) {
    auto tag = attempt == 0 ? request_tag : fmt::format("{}:retry{}", request_tag, attempt);
    auto completion = gateway_->generate(build_request(sentence, tag)).text;
    try {
      return parse_checker_output(completion);
    } catch (const ParseError& e) {
      last_error = e.what();
    }
  }
  CheckerAnalysis a;
  a.is_correct = false;
  a.reason = "unparseable checker output: " + last_error;
  return a;
}

CheckedDraft Checker::check_draft(const Draft& draft) const {
  std::vector<FieldAnalysis> fields;
  auto tag = [&](std::string_view field) { return fmt::format("check:{}:{}", draft.id, field); };
  fields.push_back({std::string(kFieldInstr), analyze(draft.instr_lrl, tag(kFieldInstr))});
  fields.push_back({std::string(kFieldResp), analyze(draft.resp_lrl, tag(kFieldResp))});
  bool accepted = std::all_of(fields.begin(), fields.end(),
                              [](const FieldAnalysis& f) { return field_status(f.analysis) == TriageStatus::accepted; });
  if (accepted && draft.has_cot()) fields.push_back({std::string(kFieldCot), analyze(draft.cot_lrl, tag(kFieldCot))});
  return triage(draft, std::move(fields));
}

// ---------------------------------------------------------------- batch

double percent(std::size_t part, std::size_t whole) {
  if (whole == 0) return 0.0;
  return std::round(10000.0 * static_cast<double>(part) / static_cast<double>(whole)) / 100.0;
}

TriageSummary summarize(const std::vector<CheckedDraft>& checked) {
  TriageSummary s;
  s.total = checked.size();
  for (const auto& c : checked) {
    switch (c.status) {
      case TriageStatus::accepted: ++s.accepted; break;
      case TriageStatus::low_priority: ++s.low_priority; break;
      case TriageStatus::top_priority: ++s.top_priority; break;
    }
  }
  s.accepted_pct = percent(s.accepted, s.total);
  s.low_pct = percent(s.low_priority, s.total);
  s.top_pct = percent(s.top_priority, s.total);
  return s;
}

Json TriageSummary::to_json() const {
  Json j;
  j["total"] = total;
  j["accepted"] = accepted;
  j["low_priority"] = low_priority;
  j["top_priority"] = top_priority;
  j["accepted_pct"] = accepted_pct;
  j["low_priority_pct"] = low_pct;
  j["top_priority_pct"] = top_pct;
  return j;
}

BatchResult run_batch(const std::vector<Draft>& drafts, const Checker& checker, const BatchOptions& options) {
  std::optional<CheckpointJournal> journal;
  std::map<std::string, CheckedDraft> done;
  if (options.checkpoint) {
    journal.emplace(*options.checkpoint);
    for (const auto& e : journal->load()) done.emplace(e.at("id").get<std::string>(), from_json<CheckedDraft>(e));
  }

  std::vector<std::optional<CheckedDraft>> slots(drafts.size());
  for (std::size_t i = 0; i < drafts.size(); ++i)
    if (auto it = done.find(drafts[i].id); it != done.end() && it->second.draft == drafts[i]) slots[i] = it->second;

  parallel_for(drafts.size(), options.workers, [&](std::size_t i) {
    if (slots[i]) return;
    auto c = checker.check_draft(drafts[i]);
    if (journal) journal->append(to_json(c));
    slots[i] = std::move(c);
  });

  BatchResult result;
  result.checked.reserve(drafts.size());
  for (auto& s : slots) result.checked.push_back(std::move(*s));
  result.summary = summarize(result.checked);
  return result;
}

// ---------------------------------------------------------------- evaluation

Json CheckerEvaluation::to_json() const {
  Json j;
  j["mean_gleu"] = mean_gleu;
  j["exact_match_rate"] = exact_match_rate;
  j["false_positive_rate"] = false_positive_rate;
  j["fluency"] = fluency ? Json(*fluency) : Json(nullptr);
  j["error_items"] = error_items;
  j["clean_items"] = clean_items;
  return j;
}

CheckerEvaluation evaluate_checker(const std::vector<EvalItem>& items, const CheckerFn& checker) {
  CheckerEvaluation ev;
  double gleu_sum = 0.0;
  std::size_t matches = 0, false_pos = 0;
  for (const auto& item : items) {
    auto a = checker(item.sentence);
    if (!item.gold) {
      ++ev.clean_items;
      if (!a.is_correct) ++false_pos;
      continue;
    }
    ++ev.error_items;
    std::string best = item.sentence;
    double best_score = -1.0;
    bool exact = false;
    for (const auto& o : a.options) {
      double g = gleu(o.text, *item.gold);
      if (g > best_score) {
        best_score = g;
        best = o.text;
      }
      if (o.text == *item.gold) exact = true;
    }
    gleu_sum += a.options.empty() ? gleu(best, *item.gold) : best_score;
    if (exact) ++matches;
  }
  if (ev.error_items == 0) throw std::invalid_argument("evaluate_checker: no error sentences");
  if (ev.clean_items == 0) throw std::invalid_argument("evaluate_checker: no clean sentences");
  ev.mean_gleu = gleu_sum / static_cast<double>(ev.error_items);
  ev.exact_match_rate = static_cast<double>(matches) / static_cast<double>(ev.error_items);
  ev.false_positive_rate = static_cast<double>(false_pos) / static_cast<double>(ev.clean_items);
  return ev;
}

}  // namespace instructlr
