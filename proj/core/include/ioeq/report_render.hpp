#pragma once

#include <string>

#include "ioeq/evaluation.hpp"

namespace ioeq {

// Writes the comparison report into `dir`: delimited tables
// (comparison.csv, improvements.csv, importance.csv, correlation.csv),
// a plain-text summary (report.txt), and the figures (cqi_box.svg,
// score_bars.svg, rate_bars.svg, importance_bars.svg, correlation_heat.svg).
void render_report_files(const std::string& dir, const ComparisonReport& report);

}  // namespace ioeq
