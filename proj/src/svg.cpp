#include <cema/svg.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>

namespace cema {

namespace {

constexpr double width = 800;
constexpr double height = 600;
constexpr double margin = 60;

constexpr std::array<const char*, 8> palette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                             "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&':
            out += "&amp;";
            break;
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        case '"':
            out += "&quot;";
            break;
        default:
            out += c;
        }
    }
    return out;
}

struct Scale {
    double lo;
    double hi;
    double from;
    double to;

    double operator()(double v) const { return hi == lo ? (from + to) / 2 : from + (v - lo) / (hi - lo) * (to - from); }
};

std::string header(const std::string& title)
{
    return fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
                       "viewBox=\"0 0 {} {}\" font-family=\"sans-serif\" font-size=\"11\">\n"
                       "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
                       "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
                       width, height, width, height, width / 2, escape(title));
}

std::string axes()
{
    return fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n"
                       "<line x1=\"{0}\" y1=\"{3}\" x2=\"{0}\" y2=\"{1}\" stroke=\"black\"/>\n",
                       margin, height - margin, width - margin, margin);
}

} // namespace

std::string svg_scatter(const std::vector<ScatterPoint>& points, const std::string& title,
                        const std::string& x_label, const std::string& y_label)
{
    double xl = 0, xh = 0, yl = 0, yh = 0;
    for (const auto& p : points) {
        xl = std::min(xl, p.x);
        xh = std::max(xh, p.x);
        yl = std::min(yl, p.y);
        yh = std::max(yh, p.y);
    }
    const Scale sx{xl, xh, margin, width - margin};
    const Scale sy{yl, yh, height - margin, margin};
    std::string out = header(title) + axes();
    out += fmt::format("<line x1=\"{0}\" y1=\"{1:.2f}\" x2=\"{2}\" y2=\"{1:.2f}\" stroke=\"#bbb\" stroke-dasharray=\"4\"/>\n",
                       margin, sy(0), width - margin);
    out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1}\" x2=\"{0:.2f}\" y2=\"{2}\" stroke=\"#bbb\" stroke-dasharray=\"4\"/>\n",
                       sx(0), margin, height - margin);
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", width / 2, height - 20,
                       escape(x_label));
    out += fmt::format("<text x=\"20\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {0})\">{1}</text>\n",
                       height / 2, escape(y_label));
    for (const auto& p : points) {
        const char* colour = palette[static_cast<std::size_t>(std::abs(p.group)) % palette.size()];
        out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\"/>", sx(p.x), sy(p.y), colour);
        if (!p.label.empty())
            out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" fill=\"{}\">{}</text>", sx(p.x) + 4, sy(p.y) - 4,
                               colour, escape(p.label));
        out += '\n';
    }
    out += "</svg>\n";
    return out;
}

std::string svg_lines(const std::vector<std::string>& x_labels, const std::vector<LineSeries>& series,
                      const std::string& title)
{
    double yh = 0;
    for (const auto& s : series)
        for (double v : s.values)
            if (std::isfinite(v))
                yh = std::max(yh, v);
    const double n = static_cast<double>(std::max<std::size_t>(x_labels.size(), 2) - 1);
    const Scale sx{0, n, margin, width - margin};
    const Scale sy{0, yh, height - margin, margin};
    std::string out = header(title) + axes();
    for (std::size_t i = 0; i < x_labels.size(); ++i)
        out += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"end\" transform=\"rotate(-45 {:.2f} {})\">{}</text>\n",
                           sx(static_cast<double>(i)), height - margin + 14, sx(static_cast<double>(i)),
                           height - margin + 14, escape(x_labels[i]));
    out += fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n", margin - 4, sy(yh),
                       fmt::format("{:.4g}", yh));
    for (std::size_t k = 0; k < series.size(); ++k) {
        const char* colour = palette[k % palette.size()];
        std::string pts;
        for (std::size_t i = 0; i < series[k].values.size(); ++i) {
            const double v = std::isfinite(series[k].values[i]) ? series[k].values[i] : 0.0;
            pts += fmt::format("{}{:.2f},{:.2f}", i ? " " : "", sx(static_cast<double>(i)), sy(v));
        }
        out += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>\n", pts, colour);
        out += fmt::format("<text x=\"{}\" y=\"{}\" fill=\"{}\">{}</text>\n", width - margin - 120,
                           margin + 14 * static_cast<double>(k + 1), colour, escape(series[k].name));
    }
    out += "</svg>\n";
    return out;
}

} // namespace cema
