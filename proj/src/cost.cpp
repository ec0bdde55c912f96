#include "instructlr/cost.hpp"

#include <fmt/format.h>

#include <fstream>
#include <stdexcept>

#include "instructlr/csv.hpp"
#include "instructlr/error.hpp"

namespace instructlr {

std::string_view to_token(QcMode m) {
  switch (m) {
    case QcMode::none: return "none";
    case QcMode::full_human: return "full_human";
    case QcMode::instructlr: return "instructlr";
  }
  return "none";
}

std::optional<QcMode> parse_qc_mode(std::string_view s) {
  for (auto m : kAllQcModes)
    if (to_token(m) == s) return m;
  return std::nullopt;
}

Json CostBreakdown::to_json() const {
  Json j;
  j["model"] = model_name;
  j["qc_mode"] = std::string(to_token(qc_mode));
  j["llm_cost"] = llm_cost;
  j["human_cost"] = human_cost;
  j["total_cost"] = total_cost;
  j["saving_vs_full_human"] = saving_vs_full_human;
  return j;
}

CostBreakdown scenario_cost(const CostScenario& s) {
  for (auto [name, v] : {std::pair{"price_per_million_tokens", s.price_per_million_tokens},
                         {"tokens_per_pair", s.tokens_per_pair},
                         {"total_pairs", s.total_pairs},
                         {"error_rate", s.error_rate},
                         {"human_rate_per_pair", s.human_rate_per_pair},
                         {"reviewed_pairs", s.reviewed_pairs}}) {
    if (!(v >= 0.0)) throw std::invalid_argument(fmt::format("{} must be non-negative", name));
  }
  if (s.error_rate > 1.0) throw std::invalid_argument("error_rate must be at most 1");
  double reviewed = s.reviewed_pairs;
  if (s.qc_mode == QcMode::none) reviewed = 0.0;
  if (s.qc_mode == QcMode::full_human) reviewed = s.total_pairs;
  if (reviewed > s.total_pairs) throw std::invalid_argument("reviewed_pairs exceeds total_pairs");

  CostBreakdown b;
  b.model_name = s.model_name;
  b.qc_mode = s.qc_mode;
  b.llm_cost = s.total_pairs * s.tokens_per_pair / 1'000'000.0 * s.price_per_million_tokens;
  b.human_cost = reviewed * s.human_rate_per_pair;
  b.total_cost = b.llm_cost + b.human_cost;
  const double full = b.llm_cost + s.total_pairs * s.human_rate_per_pair;
  b.saving_vs_full_human = full > 0.0 ? 1.0 - b.total_cost / full : 0.0;
  return b;
}

CostModelSet CostModelSet::from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("cost scenarios must be a JSON object");
  CostModelSet set;
  auto number = [](const Json& v, const std::string& key) {
    if (!v.is_number()) throw ConfigError("cost scenarios: \"" + key + "\" must be a number");
    return v.get<double>();
  };
  for (const auto& [key, v] : j.items()) {
    if (key == "tokens_per_pair") {
      set.tokens_per_pair = number(v, key);
    } else if (key == "total_pairs") {
      set.total_pairs = number(v, key);
    } else if (key == "human_rate_per_pair") {
      set.human_rate_per_pair = number(v, key);
    } else if (key == "reviewed_pairs") {
      set.reviewed_pairs = number(v, key);
    } else if (key == "reviewed_presets") {
      for (const auto& [name, n] : v.items()) set.reviewed_presets[name] = number(n, key + "." + name);
    } else if (key == "models") {
      for (const auto& m : v) {
        CostModel cm;
        for (const auto& [mk, mv] : m.items()) {
          if (mk == "name")
            cm.name = mv.get<std::string>();
          else if (mk == "price_per_million_tokens")
            cm.price_per_million_tokens = number(mv, mk);
          else if (mk == "error_rate")
            cm.error_rate = number(mv, mk);
          else
            throw ConfigError("cost scenarios: unknown model key \"" + mk + "\"");
        }
        if (cm.name.empty()) throw ConfigError("cost scenarios: model without a name");
        set.models.push_back(std::move(cm));
      }
    } else if (key == "modes") {
      set.modes.clear();
      for (const auto& m : v) {
        auto mode = parse_qc_mode(m.get<std::string>());
        if (!mode) throw ConfigError("cost scenarios: unknown qc mode " + m.dump());
        set.modes.push_back(*mode);
      }
    } else {
      throw ConfigError("cost scenarios: unknown key \"" + key + "\"");
    }
  }
  return set;
}

CostModelSet CostModelSet::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return from_json(Json::parse(in));
  } catch (const Json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void CostModelSet::use_preset(const std::string& name) {
  auto it = reviewed_presets.find(name);
  if (it == reviewed_presets.end()) throw ConfigError("unknown reviewed-pairs preset \"" + name + "\"");
  reviewed_pairs = it->second;
}

std::vector<CostBreakdown> scenario_table(const CostModelSet& set) {
  std::vector<CostBreakdown> rows;
  for (const auto& m : set.models) {
    for (auto mode : set.modes) {
      CostScenario s;
      s.model_name = m.name;
      s.price_per_million_tokens = m.price_per_million_tokens;
      s.error_rate = m.error_rate;
      s.tokens_per_pair = set.tokens_per_pair;
      s.total_pairs = set.total_pairs;
      s.human_rate_per_pair = set.human_rate_per_pair;
      s.reviewed_pairs = set.reviewed_pairs;
      s.qc_mode = mode;
      rows.push_back(scenario_cost(s));
    }
  }
  return rows;
}

std::string render_cost_csv(const std::vector<CostBreakdown>& rows) {
  std::string out = csv::format_row({"model", "qc_mode", "llm_cost", "human_cost", "total_cost", "saving_vs_full_human"});
  for (const auto& r : rows)
    out += csv::format_row({r.model_name, std::string(to_token(r.qc_mode)), fmt::format("{:.2f}", r.llm_cost),
                            fmt::format("{:.2f}", r.human_cost), fmt::format("{:.2f}", r.total_cost),
                            fmt::format("{:.4f}", r.saving_vs_full_human)});
  return out;
}

std::string render_cost_text(const std::vector<CostBreakdown>& rows) {
  std::size_t w = 5;
  for (const auto& r : rows) w = std::max(w, r.model_name.size());
  std::string out = fmt::format("{:<{}}  {:<10}  {:>10}  {:>10}  {:>10}  {:>7}\n", "model", w, "qc_mode", "llm",
                                "human", "total", "saving");
  for (const auto& r : rows)
    out += fmt::format("{:<{}}  {:<10}  {:>10.2f}  {:>10.2f}  {:>10.2f}  {:>6.1f}%\n", r.model_name, w,
                       to_token(r.qc_mode), r.llm_cost, r.human_cost, r.total_cost, 100.0 * r.saving_vs_full_human);
  return out;
}

}  // namespace instructlr
