#include "hpiconv/svg.hpp"

#include "hpiconv/format.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hpiconv {

namespace {

std::string esc(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string f2(double v) { return format_fixed(v, 2); }

double nice_step(double span, int target)
{
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
        if (m * mag >= raw) return m * mag;
    }
    return 10.0 * mag;
}

std::string tick_label(double v, double step)
{
    const int digits = step >= 1.0 ? 0 : static_cast<int>(std::ceil(-std::log10(step)));
    return format_fixed(std::abs(v) < step * 1e-9 ? 0.0 : v, std::min(digits + 1, 6));
}

std::string render_chart(const SvgChart& chart, int width, int height, const std::string& position)
{
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : chart.series) {
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.y[i])) continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
        if (s.stems) {
            ymin = std::min(ymin, 0.0);
            ymax = std::max(ymax, 0.0);
        }
    }
    for (double r : chart.reference_lines) {
        ymin = std::min(ymin, r);
        ymax = std::max(ymax, r);
    }
    if (!std::isfinite(xmin)) xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) ymax = ymin + 1.0;
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    const double left = 70, right = 20, top = 36, bottom = 48;
    const double pw = width - left - right, ph = height - top - bottom;
    auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

    std::ostringstream o;
    o << "<svg " << position << "width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << f2(width / 2.0) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << esc(chart.title) << "</text>\n";

    // axes and ticks
    o << "<g stroke=\"#444\" fill=\"none\">\n";
    o << "<line x1=\"" << f2(left) << "\" y1=\"" << f2(top + ph) << "\" x2=\"" << f2(left + pw)
      << "\" y2=\"" << f2(top + ph) << "\"/>\n";
    o << "<line x1=\"" << f2(left) << "\" y1=\"" << f2(top) << "\" x2=\"" << f2(left) << "\" y2=\""
      << f2(top + ph) << "\"/>\n</g>\n";
    o << "<g fill=\"#222\">\n";
    const double xs = nice_step(xmax - xmin, 8);
    for (double t = std::ceil(xmin / xs) * xs; t <= xmax + 1e-9 * xs; t += xs) {
        o << "<text x=\"" << f2(px(t)) << "\" y=\"" << f2(top + ph + 16) << "\" text-anchor=\"middle\">"
          << tick_label(t, xs) << "</text>\n";
    }
    const double ys = nice_step(ymax - ymin, 6);
    for (double t = std::ceil(ymin / ys) * ys; t <= ymax + 1e-9 * ys; t += ys) {
        o << "<text x=\"" << f2(left - 6) << "\" y=\"" << f2(py(t) + 4) << "\" text-anchor=\"end\">"
          << tick_label(t, ys) << "</text>\n";
    }
    o << "<text x=\"" << f2(left + pw / 2) << "\" y=\"" << f2(height - 8.0)
      << "\" text-anchor=\"middle\">" << esc(chart.x_label) << "</text>\n";
    o << "<text x=\"14\" y=\"" << f2(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
      << f2(top + ph / 2) << ")\">" << esc(chart.y_label) << "</text>\n</g>\n";

    for (double r : chart.reference_lines) {
        o << "<line x1=\"" << f2(left) << "\" y1=\"" << f2(py(r)) << "\" x2=\"" << f2(left + pw)
          << "\" y2=\"" << f2(py(r)) << "\" stroke=\"#c00\" stroke-dasharray=\"4 3\"/>\n";
    }
    if (ymin < 0.0 && ymax > 0.0) {
        o << "<line x1=\"" << f2(left) << "\" y1=\"" << f2(py(0)) << "\" x2=\"" << f2(left + pw)
          << "\" y2=\"" << f2(py(0)) << "\" stroke=\"#999\"/>\n";
    }

    for (std::size_t k = 0; k < chart.series.size(); ++k) {
        const auto& s = chart.series[k];
        const std::string dash = s.dashed ? " stroke-dasharray=\"6 4\"" : "";
        if (s.stems) {
            o << "<g stroke=\"" << s.color << "\" stroke-width=\"2\">\n";
            for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
                if (!std::isfinite(s.y[i])) continue;
                o << "<line x1=\"" << f2(px(s.x[i])) << "\" y1=\"" << f2(py(0)) << "\" x2=\""
                  << f2(px(s.x[i])) << "\" y2=\"" << f2(py(s.y[i])) << "\"/>\n";
            }
            o << "</g>\n";
        } else {
            o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"" << dash
              << " points=\"";
            bool first = true;
            for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
                if (!std::isfinite(s.y[i])) continue;
                o << (first ? "" : " ") << f2(px(s.x[i])) << ',' << f2(py(s.y[i]));
                first = false;
            }
            o << "\"/>\n";
        }
        const double ly = top + 14.0 * static_cast<double>(k) + 4.0;
        o << "<line x1=\"" << f2(left + pw - 150) << "\" y1=\"" << f2(ly) << "\" x2=\"" << f2(left + pw - 130)
          << "\" y2=\"" << f2(ly) << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"" << dash << "/>\n";
        o << "<text x=\"" << f2(left + pw - 125) << "\" y=\"" << f2(ly + 4) << "\">" << esc(s.label)
          << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

constexpr const char* kNamespace = "xmlns=\"http://www.w3.org/2000/svg\" ";

}  // namespace

std::string render_svg(const SvgChart& chart, int width, int height)
{
    return render_chart(chart, width, height, kNamespace);
}

std::string render_svg_stack(const std::vector<SvgChart>& charts, int width, int panel_height)
{
    const int total = panel_height * static_cast<int>(charts.size());
    std::string out = std::string("<svg ") + kNamespace + "width=\"" + std::to_string(width) +
                      "\" height=\"" + std::to_string(total) + "\" viewBox=\"0 0 " +
                      std::to_string(width) + ' ' + std::to_string(total) + "\">\n";
    for (std::size_t i = 0; i < charts.size(); ++i) {
        out += render_chart(charts[i], width, panel_height,
                            "x=\"0\" y=\"" + std::to_string(static_cast<int>(i) * panel_height) + "\" ");
    }
    return out + "</svg>\n";
}

}  // namespace hpiconv
