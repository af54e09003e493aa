#pragma once

#include <string>
#include <vector>

namespace sscl {

struct Series {
    std::string name;
    std::vector<double> xs;
    std::vector<double> ys;
};

/// Minimal hand-rolled SVG line chart: axes, ticks, legend, one polyline per
/// series. Returns the document text; write_line_chart saves it.
std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label, const std::vector<Series>& series,
                              int width = 720, int height = 440);

void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series);

}  // namespace sscl
