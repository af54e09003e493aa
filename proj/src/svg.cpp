#include "sscl/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace sscl {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label, const std::vector<Series>& series,
                              int width, int height) {
    const double ml = 60, mr = 120, mt = 40, mb = 50;
    const double pw = width - ml - mr, ph = height - mt - mb;

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const Series& s : series) {
        for (double x : s.xs) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
        }
        for (double y : s.ys) {
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;

    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return mt + ph - (y - ymin) / (ymax - ymin) * ph; };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\" font-family=\"sans-serif\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + num(ml + pw / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
           title + "</text>\n";

    // axes
    svg += "<line x1=\"" + num(ml) + "\" y1=\"" + num(mt) + "\" x2=\"" + num(ml) + "\" y2=\"" +
           num(mt + ph) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + num(ml) + "\" y1=\"" + num(mt + ph) + "\" x2=\"" + num(ml + pw) +
           "\" y2=\"" + num(mt + ph) + "\" stroke=\"black\"/>\n";

    const int nticks = 5;
    for (int i = 0; i <= nticks; ++i) {
        const double fx = xmin + (xmax - xmin) * i / nticks;
        const double fy = ymin + (ymax - ymin) * i / nticks;
        svg += "<line x1=\"" + num(px(fx)) + "\" y1=\"" + num(mt + ph) + "\" x2=\"" + num(px(fx)) +
               "\" y2=\"" + num(mt + ph + 5) + "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + num(px(fx)) + "\" y=\"" + num(mt + ph + 18) +
               "\" text-anchor=\"middle\" font-size=\"11\">" + num(fx) + "</text>\n";
        svg += "<line x1=\"" + num(ml - 5) + "\" y1=\"" + num(py(fy)) + "\" x2=\"" + num(ml) +
               "\" y2=\"" + num(py(fy)) + "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + num(ml - 8) + "\" y=\"" + num(py(fy) + 4) +
               "\" text-anchor=\"end\" font-size=\"11\">" + num(fy) + "</text>\n";
    }
    svg += "<text x=\"" + num(ml + pw / 2) + "\" y=\"" + num(height - 10.0) +
           "\" text-anchor=\"middle\" font-size=\"12\">" + x_label + "</text>\n";
    svg += "<text x=\"16\" y=\"" + num(mt + ph / 2) + "\" text-anchor=\"middle\" font-size=\"12\"" +
           " transform=\"rotate(-90 16 " + num(mt + ph / 2) + ")\">" + y_label + "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const Series& s = series[si];
        const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
        std::string pts;
        for (std::size_t i = 0; i < s.xs.size() && i < s.ys.size(); ++i)
            pts += num(px(s.xs[i])) + "," + num(py(s.ys[i])) + " ";
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
        const double ly = mt + 16.0 * static_cast<double>(si);
        svg += "<line x1=\"" + num(ml + pw + 8) + "\" y1=\"" + num(ly) + "\" x2=\"" +
               num(ml + pw + 28) + "\" y2=\"" + num(ly) + "\" stroke=\"" + color +
               "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + num(ml + pw + 32) + "\" y=\"" + num(ly + 4) +
               "\" font-size=\"11\">" + s.name + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_line_chart: cannot open " + path);
    f << render_line_chart(title, x_label, y_label, series);
}

}  // namespace sscl
