// Python bindings. Structured values cross the boundary as JSON text; the package wrapper
// turns them into plain dicts and lists.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "instructlr/agreement.hpp"
#include "instructlr/analytics.hpp"
#include "instructlr/annotation.hpp"
#include "instructlr/checker.hpp"
#include "instructlr/config.hpp"
#include "instructlr/cost.hpp"
#include "instructlr/error.hpp"
#include "instructlr/gleu.hpp"
#include "instructlr/grammar.hpp"
#include "instructlr/jsonl.hpp"
#include "instructlr/lexicon.hpp"
#include "instructlr/pipeline.hpp"
#include "instructlr/retrieval.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace instructlr;

namespace {

class RuleEngine {
 public:
  RuleEngine(const fs::path& data_dir, const std::string& lang)
      : lex_(ZarmaLexicon::load(data_dir / "lexicon" / (lang + ".tsv"))),
        glossary_(load_glossary((data_dir / "kb" / "glossary.tsv").string())) {}

  std::string check_json(const std::string& sentence) const {
    Json out = Json::array();
    for (const auto& v : instructlr::check(sentence, lex_, glossary_)) out.push_back(to_json(v));
    return out.dump();
  }

  std::string suggest_json(const std::string& sentence) const {
    Json out = Json::array();
    for (const auto& o : suggest(sentence, instructlr::check(sentence, lex_, glossary_), lex_, glossary_))
      out.push_back({{"text", o.text}, {"explanation", o.explanation}});
    return out.dump();
  }

 private:
  ZarmaLexicon lex_;
  Glossary glossary_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "instructlr core bindings";

  py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<SchemaError>(m, "SchemaError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  m.def("gleu", &gleu, py::arg("hypothesis"), py::arg("reference"));
  m.def("krippendorff_alpha", &krippendorff_alpha, py::arg("matrix"));
  m.def("percent", &percent, py::arg("part"), py::arg("whole"));

  py::class_<RuleEngine>(m, "RuleEngine")
      .def(py::init<const fs::path&, const std::string&>(), py::arg("data_dir"), py::arg("lang") = "dje")
      .def("_check", &RuleEngine::check_json)
      .def("_suggest", &RuleEngine::suggest_json);

  m.def("_parse_checker_output", [](const std::string& text) {
    auto a = parse_checker_output(text);
    Json j = to_json(a);
    j["status"] = to_token(field_status(a));
    return j.dump();
  });

  m.def("_scenario_cost", [](const std::string& scenario_json) {
    auto j = Json::parse(scenario_json);
    CostScenario s;
    s.model_name = j.value("model_name", "");
    s.price_per_million_tokens = j.value("price_per_million_tokens", 0.0);
    s.tokens_per_pair = j.value("tokens_per_pair", s.tokens_per_pair);
    s.total_pairs = j.value("total_pairs", s.total_pairs);
    s.error_rate = j.value("error_rate", 0.0);
    s.human_rate_per_pair = j.value("human_rate_per_pair", s.human_rate_per_pair);
    s.reviewed_pairs = j.value("reviewed_pairs", 0.0);
    auto mode = parse_qc_mode(j.value("qc_mode", "instructlr"));
    if (!mode) throw ConfigError("unknown qc_mode");
    s.qc_mode = *mode;
    return scenario_cost(s).to_json().dump();
  });
  m.def("_cost_table", [](const fs::path& scenarios, const std::string& preset) {
    auto set = CostModelSet::load(scenarios);
    if (!preset.empty()) set.use_preset(preset);
    Json out = Json::array();
    for (const auto& b : scenario_table(set)) out.push_back(b.to_json());
    return out.dump();
  });

  m.def("_import_annotations", [](const std::string& csv_text, const std::string& annotator,
                                  const std::set<std::string>& known) {
    auto r = import_annotations(csv_text, annotator, known);
    Json records = Json::array(), errors = Json::array();
    for (const auto& rec : r.records) records.push_back(to_json(rec));
    for (const auto& e : r.errors)
      errors.push_back({{"line", e.line}, {"draft_id", e.draft_id}, {"field", e.field}, {"message", e.message}});
    return Json{{"records", records}, {"errors", errors}}.dump();
  });
  m.def("_merge_annotations", [](const std::string& records_json) {
    std::vector<AnnotationRecord> records;
    for (const auto& j : Json::parse(records_json)) records.push_back(from_json<AnnotationRecord>(j));
    Json out = Json::array();
    for (const auto& d : merge_annotations(records)) out.push_back(d.to_json());
    return out.dump();
  });
  m.def("_annotation_agreement", [](const std::string& records_json, std::size_t items) {
    std::vector<AnnotationRecord> records;
    for (const auto& j : Json::parse(records_json)) records.push_back(from_json<AnnotationRecord>(j));
    return annotation_agreement(records, items).to_json().dump();
  });

  m.def("_dataset_stats", [](const fs::path& jsonl) { return dataset_stats(read_jsonl<Draft>(jsonl)).to_json().dump(); });

  m.def(
      "_run_pipeline",
      [](const fs::path& config_path, const std::set<std::string>& only, bool force) {
        auto config = load_config(config_path);
        RunOptions opt;
        opt.only = only;
        opt.force = force;
        py::gil_scoped_release release;
        return run_pipeline(config, opt).to_json().dump();
      },
      py::arg("config"), py::arg("only") = std::set<std::string>{}, py::arg("force") = false);
}
