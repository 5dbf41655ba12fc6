#pragma once

#include <string>
#include <utility>
#include <vector>

namespace starlab {

struct Series {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

// Minimal line chart: one polyline per series, framed axes with start/end
// tick labels and a legend. Derived artifact only; CSVs stay canonical.
std::string line_chart_svg(const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series);

} // namespace starlab
