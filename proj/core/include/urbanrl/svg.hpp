#pragma once

#include <string>
#include <vector>

namespace urbanrl::analysis {

// Minimal static SVG line chart for report output.
struct LineSeries {
    std::string name;
    std::vector<double> x, y;
};

void write_line_chart_svg(const std::string& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<LineSeries>& series);

} // namespace urbanrl::analysis
