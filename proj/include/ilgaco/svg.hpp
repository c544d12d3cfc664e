#pragma once

#include <optional>
#include <string>
#include <vector>

namespace ilgaco {

// Minimal SVG 1.1 emitters for the two report figures. Values are Rank-1
// percentages, so the y axis is fixed to [0, 100].

// One polyline per series over the given steps; optional dashed horizontal
// upper-bound line. series_values[series][step].
std::string line_chart_svg(const std::string& title,
                           const std::vector<std::string>& step_names,
                           const std::vector<std::string>& series_names,
                           const std::vector<std::vector<double>>& series_values,
                           std::optional<double> upper_bound);

// One bar group per group name, one bar per series, labeled with its value.
// values[group][series].
std::string grouped_bar_svg(const std::string& title,
                            const std::vector<std::string>& group_names,
                            const std::vector<std::string>& series_names,
                            const std::vector<std::vector<double>>& values);

}  // namespace ilgaco
