#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "relaxcouple/errors.hpp"

namespace relaxcouple {
namespace svg {

struct Series {
    std::string label;
    std::vector<double> x, y;
    std::string color = "#1f77b4";
    std::string dash;  // e.g. "6,4" for dashed
};

/// Minimal two-axis line chart: polylines, tick labels at the extremes, a
/// small legend. Best-effort output; the CSV files are the exact contract.
inline void write_line_chart(const std::string& path, const std::string& title,
                             const std::string& xlabel, const std::string& ylabel,
                             const std::vector<Series>& series) {
    const double W = 720, H = 480;
    const double ml = 70, mr = 20, mt = 40, mb = 50;

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    if (xmin > xmax) { xmin = 0; xmax = 1; }
    if (ymin > ymax) { ymin = 0; ymax = 1; }
    if (xmax == xmin) { xmax = xmin + 1; }
    if (ymax == ymin) { ymax = ymin + 0.5; ymin -= 0.5; }
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto py = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };

    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
        << title << "</text>\n";

    // Axes.
    out << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\""
        << H - mb << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
        << H - mb << "\" stroke=\"black\"/>\n";
    auto tick = [&](double v, bool is_x) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4g", v);
        if (is_x)
            out << "<text x=\"" << px(v) << "\" y=\"" << H - mb + 18
                << "\" text-anchor=\"middle\" font-size=\"12\">" << buf << "</text>\n";
        else
            out << "<text x=\"" << ml - 6 << "\" y=\"" << py(v) + 4
                << "\" text-anchor=\"end\" font-size=\"12\">" << buf << "</text>\n";
    };
    for (int i = 0; i <= 4; ++i) tick(xmin + i * (xmax - xmin) / 4, true);
    for (int i = 0; i <= 4; ++i) tick(ymin + i * (ymax - ymin) / 4, false);
    out << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12
        << "\" text-anchor=\"middle\" font-size=\"13\">" << xlabel << "</text>\n";
    out << "<text x=\"16\" y=\"" << (mt + H - mb) / 2
        << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
        << (mt + H - mb) / 2 << ")\">" << ylabel << "</text>\n";

    for (const auto& s : series) {
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"";
        if (!s.dash.empty()) out << " stroke-dasharray=\"" << s.dash << "\"";
        out << " points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            out << px(s.x[i]) << "," << py(s.y[i]) << " ";
        }
        out << "\"/>\n";
    }

    double ly = mt + 8;
    for (const auto& s : series) {
        out << "<line x1=\"" << W - mr - 150 << "\" y1=\"" << ly << "\" x2=\""
            << W - mr - 120 << "\" y2=\"" << ly << "\" stroke=\"" << s.color
            << "\" stroke-width=\"2\"";
        if (!s.dash.empty()) out << " stroke-dasharray=\"" << s.dash << "\"";
        out << "/>\n";
        out << "<text x=\"" << W - mr - 114 << "\" y=\"" << ly + 4
            << "\" font-size=\"12\">" << s.label << "</text>\n";
        ly += 18;
    }
    out << "</svg>\n";
}

}  // namespace svg
}  // namespace relaxcouple
