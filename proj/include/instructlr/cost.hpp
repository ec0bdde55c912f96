#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "instructlr/types.hpp"

namespace instructlr {

enum class QcMode { none, full_human, instructlr };
inline constexpr QcMode kAllQcModes[] = {QcMode::none, QcMode::full_human, QcMode::instructlr};
std::string_view to_token(QcMode m);
std::optional<QcMode> parse_qc_mode(std::string_view s);

struct CostScenario {
  std::string model_name;
  double price_per_million_tokens = 0.0;
  double tokens_per_pair = 75.0;
  double total_pairs = 50000.0;
  double error_rate = 0.0;  // reported only; review volume comes from reviewed_pairs
  QcMode qc_mode = QcMode::instructlr;
  double human_rate_per_pair = 0.40;
  double reviewed_pairs = 0.0;
};

struct CostBreakdown {
  std::string model_name;
  QcMode qc_mode = QcMode::none;
  double llm_cost = 0.0;
  double human_cost = 0.0;
  double total_cost = 0.0;
  double saving_vs_full_human = 0.0;
  Json to_json() const;
};

/// Throws std::invalid_argument on negative inputs, reviewed_pairs > total_pairs or an
/// error rate outside [0, 1]. reviewed_pairs is forced by the mode for none and full_human.
CostBreakdown scenario_cost(const CostScenario& scenario);

struct CostModel {
  std::string name;
  double price_per_million_tokens = 0.0;
  double error_rate = 0.0;
};

struct CostModelSet {
  double tokens_per_pair = 75.0;
  double total_pairs = 50000.0;
  double human_rate_per_pair = 0.40;
  double reviewed_pairs = 6000.0;
  std::map<std::string, double> reviewed_presets;
  std::vector<CostModel> models;
  std::vector<QcMode> modes{kAllQcModes[0], kAllQcModes[1], kAllQcModes[2]};

  /// Throws ConfigError on unknown keys, modes or presets.
  static CostModelSet from_json(const Json& j);
  static CostModelSet load(const std::filesystem::path& path);
  /// Switches reviewed_pairs to a named preset. Throws ConfigError when unknown.
  void use_preset(const std::string& name);
};

/// One row per (model, mode), models in input order.
std::vector<CostBreakdown> scenario_table(const CostModelSet& set);

std::string render_cost_csv(const std::vector<CostBreakdown>& rows);
std::string render_cost_text(const std::vector<CostBreakdown>& rows);

}  // namespace instructlr
