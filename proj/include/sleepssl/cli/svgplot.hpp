#pragma once

#include <string>

namespace sleepssl {

// Renders a CSV (header row, first column = x axis) as one polyline per
// remaining numeric column into a standalone SVG file. Non-numeric columns
// are skipped. Throws on empty or malformed input.
void plot_csv(const std::string& csv_path, const std::string& svg_path,
              const std::string& title = "");

}  // namespace sleepssl
