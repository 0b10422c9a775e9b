#pragma once

#include <string>
#include <vector>

namespace hpiconv {

struct SvgSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f4e79";
    bool dashed = false;
    bool stems = false;  // vertical bars from zero instead of a polyline
};

struct SvgChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<SvgSeries> series;
    std::vector<double> reference_lines;  // horizontal dashed lines, e.g. white-noise bands
};

/// Axes, series, legend and title; coordinates are printed with fixed precision so
/// output bytes depend only on the inputs.
[[nodiscard]] std::string render_svg(const SvgChart& chart, int width = 720, int height = 360);
/// Charts stacked vertically in one document, one panel per chart.
[[nodiscard]] std::string render_svg_stack(const std::vector<SvgChart>& charts, int width = 720,
                                           int panel_height = 260);

}  // namespace hpiconv
