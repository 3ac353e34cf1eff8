#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "flutrack/common.hpp"
#include "flutrack/dates.hpp"

namespace flutrack::eval {

// Minimal deterministic SVG line chart, enough for forecast-vs-actual
// comparison plots. No external plotting dependency; output bytes depend only
// on the inputs.
struct ChartSeries {
    std::string name;
    std::vector<std::int64_t> x; // days
    std::vector<double> y;
};

inline std::string render_line_chart(const std::string& title, const std::vector<ChartSeries>& series,
                                     int width = 900, int height = 420) {
    static const char* kColors[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool any = false;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (is_missing(s.y[i])) continue;
            const double xv = static_cast<double>(s.x[i]);
            if (!any) {
                xmin = xmax = xv;
                ymin = ymax = s.y[i];
                any = true;
            } else {
                xmin = std::min(xmin, xv);
                xmax = std::max(xmax, xv);
                ymin = std::min(ymin, s.y[i]);
                ymax = std::max(ymax, s.y[i]);
            }
        }
    }
    if (!any) {
        xmin = ymin = 0;
        xmax = ymax = 1;
    }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    const double pad_y = 0.05 * (ymax - ymin);
    ymin -= pad_y;
    ymax += pad_y;

    const double left = 70, right = 20, top = 40, bottom = 50;
    const double plot_w = width - left - right, plot_h = height - top - bottom;
    auto sx = [&](double v) { return left + (v - xmin) / (xmax - xmin) * plot_w; };
    auto sy = [&](double v) { return top + (ymax - v) / (ymax - ymin) * plot_h; };
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", v);
        return std::string(buf);
    };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + num(left) + "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">" +
           title + "</text>\n";
    svg += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(plot_w) +
           "\" height=\"" + num(plot_h) + "\" fill=\"none\" stroke=\"#333\"/>\n";

    for (int tick = 0; tick <= 4; ++tick) {
        const double yv = ymin + (ymax - ymin) * tick / 4.0;
        const double py = sy(yv);
        svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(py) + "\" x2=\"" + num(left + plot_w) +
               "\" y2=\"" + num(py) + "\" stroke=\"#ddd\"/>\n";
        svg += "<text x=\"" + num(left - 8) + "\" y=\"" + num(py + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + num(yv) +
               "</text>\n";
    }
    for (int tick = 0; tick <= 4; ++tick) {
        const double xv = xmin + (xmax - xmin) * tick / 4.0;
        const double px = sx(xv);
        svg += "<text x=\"" + num(px) + "\" y=\"" + num(top + plot_h + 18) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
               format_date(static_cast<std::int64_t>(std::llround(xv))) + "</text>\n";
    }

    for (std::size_t si = 0; si < series.size(); ++si) {
        const char* color = kColors[si % (sizeof(kColors) / sizeof(kColors[0]))];
        std::string points;
        bool open = false;
        for (std::size_t i = 0; i < series[si].x.size(); ++i) {
            if (is_missing(series[si].y[i])) {
                if (open) {
                    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
                           "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
                    points.clear();
                    open = false;
                }
                continue;
            }
            points += num(sx(static_cast<double>(series[si].x[i]))) + "," + num(sy(series[si].y[i])) + " ";
            open = true;
        }
        if (open)
            svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
                   "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
        const double ly = top + 16 + 16 * static_cast<double>(si);
        svg += "<line x1=\"" + num(left + plot_w - 150) + "\" y1=\"" + num(ly - 4) + "\" x2=\"" +
               num(left + plot_w - 120) + "\" y2=\"" + num(ly - 4) + "\" stroke=\"" + color +
               "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + num(left + plot_w - 114) + "\" y=\"" + num(ly) +
               "\" font-family=\"sans-serif\" font-size=\"11\">" + series[si].name + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

} // namespace flutrack::eval
