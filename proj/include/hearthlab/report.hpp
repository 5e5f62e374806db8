#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hearthlab/network.hpp"
#include "hearthlab/train.hpp"
#include "hearthlab/transfer.hpp"

namespace hearth {

// Locale-independent number formatting ("." separator, no grouping).
std::string format_fixed(double value, int digits);
std::string format_shortest(double value);

// `episode,total_reward,steps,success`, one row per episode, "\n" newlines.
std::string curve_csv(const LearningCurve& curve);
// Strict inverse of curve_csv; throws LoadError on any deviation.
LearningCurve parse_curve_csv(std::string_view text);

// First row `source\target,<c1>,...`; NaN cells are left empty.
std::string matrix_csv(const std::vector<std::string>& rows,
                       const std::vector<std::string>& cols,
                       const std::vector<double>& values, int digits);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
// Strict comma-separated parser: "\n" line ends, equal field counts.
CsvTable parse_csv(std::string_view text);

// Square-cell heatmap, diverging around `anchor` (warm above, cool below),
// values printed with 2 decimals.
std::string heatmap_svg(const std::string& title,
                        const std::vector<std::string>& rows,
                        const std::vector<std::string>& cols,
                        const std::vector<double>& values, double anchor);

std::string correlations_csv(const TransferReport& report);
// Per-target mean ratio and positive-transfer count at each checkpoint.
std::string forgetting_csv(const TransferReport& report);

// Writes curves/, matrices, correlations, forgetting table and heatmaps.
void write_report(const TransferReport& report, const std::string& dir);

std::string params_to_json(const PolicyParams& params);
PolicyParams params_from_json(std::string_view text);

void write_text_file(const std::string& path, std::string_view content);
std::string read_text_file(const std::string& path);

}  // namespace hearth
