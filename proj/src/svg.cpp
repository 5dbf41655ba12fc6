#include "starlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace starlab {

namespace {

constexpr int k_width = 640;
constexpr int k_height = 420;
constexpr int k_margin_left = 70;
constexpr int k_margin_right = 20;
constexpr int k_margin_top = 20;
constexpr int k_margin_bottom = 50;

const char* k_palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

} // namespace

std::string line_chart_svg(const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series) {
    double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
    double y_min = x_min, y_max = -x_min;
    for (const Series& s : series)
        for (const auto& [x, y] : s.points) {
            x_min = std::min(x_min, x);
            x_max = std::max(x_max, x);
            y_min = std::min(y_min, y);
            y_max = std::max(y_max, y);
        }
    if (!(x_min <= x_max)) { // no points at all
        x_min = 0;
        x_max = 1;
        y_min = 0;
        y_max = 1;
    }
    if (x_max == x_min)
        x_max = x_min + 1;
    if (y_max == y_min) {
        y_min -= 0.5;
        y_max += 0.5;
    }

    const double plot_w = k_width - k_margin_left - k_margin_right;
    const double plot_h = k_height - k_margin_top - k_margin_bottom;
    const auto px = [&](double x) {
        return k_margin_left + (x - x_min) / (x_max - x_min) * plot_w;
    };
    const auto py = [&](double y) {
        return k_margin_top + (1.0 - (y - y_min) / (y_max - y_min)) * plot_h;
    };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(k_width) +
           "\" height=\"" + std::to_string(k_height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // Axes frame.
    svg += "<rect x=\"" + num(k_margin_left) + "\" y=\"" + num(k_margin_top) + "\" width=\"" +
           num(plot_w) + "\" height=\"" + num(plot_h) +
           "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";

    // Tick labels at the extremes.
    svg += "<text x=\"" + num(px(x_min)) + "\" y=\"" + num(k_height - k_margin_bottom + 16) +
           "\" font-size=\"11\" text-anchor=\"middle\">" + num(x_min) + "</text>\n";
    svg += "<text x=\"" + num(px(x_max)) + "\" y=\"" + num(k_height - k_margin_bottom + 16) +
           "\" font-size=\"11\" text-anchor=\"middle\">" + num(x_max) + "</text>\n";
    svg += "<text x=\"" + num(k_margin_left - 6) + "\" y=\"" + num(py(y_min) + 4) +
           "\" font-size=\"11\" text-anchor=\"end\">" + num(y_min) + "</text>\n";
    svg += "<text x=\"" + num(k_margin_left - 6) + "\" y=\"" + num(py(y_max) + 4) +
           "\" font-size=\"11\" text-anchor=\"end\">" + num(y_max) + "</text>\n";

    // Axis labels.
    svg += "<text x=\"" + num(k_margin_left + plot_w / 2) + "\" y=\"" +
           num(k_height - 12) + "\" font-size=\"13\" text-anchor=\"middle\">" + x_label +
           "</text>\n";
    svg += "<text x=\"16\" y=\"" + num(k_margin_top + plot_h / 2) +
           "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
           num(k_margin_top + plot_h / 2) + ")\">" + y_label + "</text>\n";

    for (std::size_t i = 0; i < series.size(); ++i) {
        const char* color = k_palette[i % (sizeof k_palette / sizeof k_palette[0])];
        std::string pts;
        for (const auto& [x, y] : series[i].points)
            pts += num(px(x)) + "," + num(py(y)) + " ";
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
        const double ly = k_margin_top + 16 + 16 * static_cast<double>(i);
        svg += "<line x1=\"" + num(k_margin_left + 8) + "\" y1=\"" + num(ly - 4) + "\" x2=\"" +
               num(k_margin_left + 28) + "\" y2=\"" + num(ly - 4) + "\" stroke=\"" + color +
               "\" stroke-width=\"1.5\"/>\n";
        svg += "<text x=\"" + num(k_margin_left + 34) + "\" y=\"" + num(ly) +
               "\" font-size=\"12\">" + series[i].label + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

} // namespace starlab
