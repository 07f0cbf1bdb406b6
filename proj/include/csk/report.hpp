#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "csk/config.hpp"
#include "csk/kernel_search.hpp"

namespace csk {

inline constexpr const char* kVersion = "0.1.0";

/// 100 * rate with one decimal ("95.0"), or "NA" when the rate is undefined.
std::string format_percent(std::optional<double> rate);

/// {accuracy, sensitivity, specificity, confusion:{tp,fn,tn,fp}, invalid_folds, per_fold:[...]}.
/// Undefined rates are null.
nlohmann::json metrics_json(const LosoResult& loso);
Metrics metrics_from_json(const nlohmann::json& metrics);

std::string metrics_csv_header();
/// variant, percentages and counts on one line.
std::string metrics_csv_line(const std::string& variant, const Metrics& m);

nlohmann::json trial_json(const TrialResult& t);
std::string trials_csv_header();
/// kernel_count,featuremap_index,seed,q,a1_accuracy rows from report["trials"].
std::string trials_csv(const nlohmann::json& trials);

/// Full report document. The only run-dependent block is "timing".
nlohmann::json report_json(const Report& report, const KeyValues& config_echo);

/// Copy without the "timing" block.
nlohmann::json without_timing(const nlohmann::json& report);

/// Human-readable summary of a report document.
std::string render_table(const nlohmann::json& report);

/// Config echo of a report as key/value pairs.
KeyValues config_from_report(const nlohmann::json& report);

}  // namespace csk
