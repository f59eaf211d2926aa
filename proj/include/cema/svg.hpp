#pragma once

#include <string>
#include <vector>

namespace cema {

struct ScatterPoint {
    double x = 0.0;
    double y = 0.0;
    std::string label;
    int group = 0; // colour index
};

struct LineSeries {
    std::string name;
    std::vector<double> values;
};

/// Standalone SVG documents; no external fonts or scripts.
std::string svg_scatter(const std::vector<ScatterPoint>& points, const std::string& title,
                        const std::string& x_label, const std::string& y_label);
std::string svg_lines(const std::vector<std::string>& x_labels, const std::vector<LineSeries>& series,
                      const std::string& title);

} // namespace cema
