#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "fallrisk/evaluate.hpp"

namespace fallrisk {

// Minimal self-contained SVG rendering for the report curves. No styling
// dependencies; every plot is one standalone file.

struct SvgSeries {
    std::string label;
    std::vector<CurvePoint> points;
    std::string color = "#1f6fb2";
};

namespace detail {

inline std::string fmt1(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

struct Frame {
    double width = 640, height = 480;
    double left = 70, right = 20, top = 50, bottom = 60;
    double x_min = 0, x_max = 1, y_min = 0, y_max = 1;

    double px(double x) const {
        return left + (x - x_min) / (x_max - x_min) * (width - left - right);
    }
    double py(double y) const {
        return height - bottom - (y - y_min) / (y_max - y_min) * (height - top - bottom);
    }
};

inline void axes(std::string& svg, const Frame& f, const std::string& title,
                 const std::string& xlabel, const std::string& ylabel) {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "<rect x='%.1f' y='%.1f' width='%.1f' height='%.1f' fill='none' "
                  "stroke='#444'/>\n",
                  f.left, f.top, f.width - f.left - f.right, f.height - f.top - f.bottom);
    svg += buf;
    for (int i = 0; i <= 4; ++i) {
        double tx = f.x_min + (f.x_max - f.x_min) * i / 4.0;
        double ty = f.y_min + (f.y_max - f.y_min) * i / 4.0;
        std::snprintf(buf, sizeof(buf),
                      "<line x1='%.1f' y1='%.1f' x2='%.1f' y2='%.1f' stroke='#444'/>\n"
                      "<text x='%.1f' y='%.1f' font-size='12' text-anchor='middle'>%s</text>\n",
                      f.px(tx), f.height - f.bottom, f.px(tx), f.height - f.bottom + 5,
                      f.px(tx), f.height - f.bottom + 20, fmt1(tx).c_str());
        svg += buf;
        std::snprintf(buf, sizeof(buf),
                      "<line x1='%.1f' y1='%.1f' x2='%.1f' y2='%.1f' stroke='#444'/>\n"
                      "<text x='%.1f' y='%.1f' font-size='12' text-anchor='end'>%s</text>\n",
                      f.left - 5, f.py(ty), f.left, f.py(ty), f.left - 8, f.py(ty) + 4,
                      fmt1(ty).c_str());
        svg += buf;
    }
    std::snprintf(buf, sizeof(buf),
                  "<text x='%.1f' y='25' font-size='15' text-anchor='middle'>%s</text>\n"
                  "<text x='%.1f' y='%.1f' font-size='13' text-anchor='middle'>%s</text>\n"
                  "<text x='18' y='%.1f' font-size='13' text-anchor='middle' "
                  "transform='rotate(-90 18 %.1f)'>%s</text>\n",
                  f.width / 2, title.c_str(), f.width / 2, f.height - 15, xlabel.c_str(),
                  f.height / 2, f.height / 2, ylabel.c_str());
    svg += buf;
}

}  // namespace detail

inline std::string line_chart_svg(const std::string& title, const std::string& xlabel,
                                  const std::string& ylabel,
                                  const std::vector<SvgSeries>& series,
                                  bool unit_diagonal = false) {
    detail::Frame f;
    std::string svg =
        "<svg xmlns='http://www.w3.org/2000/svg' width='640' height='480' "
        "viewBox='0 0 640 480'>\n<rect width='640' height='480' fill='white'/>\n";
    detail::axes(svg, f, title, xlabel, ylabel);
    char buf[256];
    if (unit_diagonal) {
        std::snprintf(buf, sizeof(buf),
                      "<line x1='%.1f' y1='%.1f' x2='%.1f' y2='%.1f' stroke='#999' "
                      "stroke-dasharray='5,4'/>\n",
                      f.px(0), f.py(0), f.px(1), f.py(1));
        svg += buf;
    }
    double legend_y = f.top + 16;
    for (const auto& s : series) {
        svg += "<polyline fill='none' stroke='" + s.color + "' stroke-width='1.8' points='";
        for (const auto& p : s.points) {
            std::snprintf(buf, sizeof(buf), "%.1f,%.1f ", f.px(p.x), f.py(p.y));
            svg += buf;
        }
        svg += "'/>\n";
        std::snprintf(buf, sizeof(buf),
                      "<line x1='%.1f' y1='%.1f' x2='%.1f' y2='%.1f' stroke='%s' "
                      "stroke-width='2'/>\n<text x='%.1f' y='%.1f' font-size='12'>%s</text>\n",
                      f.width - 200, legend_y, f.width - 170, legend_y, s.color.c_str(),
                      f.width - 162, legend_y + 4, s.label.c_str());
        svg += buf;
        legend_y += 18;
    }
    svg += "</svg>\n";
    return svg;
}

inline std::string histogram_svg(const std::string& title, const std::string& xlabel,
                                 const std::vector<double>& values, int bins = 40) {
    detail::Frame f;
    std::string svg =
        "<svg xmlns='http://www.w3.org/2000/svg' width='640' height='480' "
        "viewBox='0 0 640 480'>\n<rect width='640' height='480' fill='white'/>\n";
    if (values.empty() || bins < 1) return svg + "</svg>\n";

    double lo = *std::min_element(values.begin(), values.end());
    double hi = *std::max_element(values.begin(), values.end());
    if (lo == hi) {
        lo -= 1.0;
        hi += 1.0;
    }
    std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
    for (double v : values) {
        int b = static_cast<int>((v - lo) / (hi - lo) * bins);
        b = std::clamp(b, 0, bins - 1);
        ++counts[static_cast<std::size_t>(b)];
    }
    std::size_t peak = *std::max_element(counts.begin(), counts.end());
    f.x_min = lo;
    f.x_max = hi;
    f.y_min = 0;
    f.y_max = static_cast<double>(peak);
    detail::axes(svg, f, title, xlabel, "count");
    char buf[256];
    for (int b = 0; b < bins; ++b) {
        double x0 = lo + (hi - lo) * b / bins;
        double x1 = lo + (hi - lo) * (b + 1) / bins;
        double c = static_cast<double>(counts[static_cast<std::size_t>(b)]);
        if (c == 0) continue;
        std::snprintf(buf, sizeof(buf),
                      "<rect x='%.1f' y='%.1f' width='%.1f' height='%.1f' fill='#1f6fb2' "
                      "fill-opacity='0.8'/>\n",
                      f.px(x0), f.py(c), f.px(x1) - f.px(x0), f.py(0) - f.py(c));
        svg += buf;
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace fallrisk
