#include "stab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "stab/csv.hpp"

namespace stab {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c; break;
        }
    }
    return out;
}

// Round tick spacing to 1/2/5 * 10^n covering roughly `target` intervals.
std::vector<double> nice_ticks(double lo, double hi, int target) {
    std::vector<double> ticks;
    const double span = hi - lo;
    if (!(span > 0.0)) return ticks;
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (raw <= m * mag) {
            step = m * mag;
            break;
        }
    }
    const double first = std::ceil(lo / step) * step;
    for (double t = first; t <= hi + 0.5 * step; t += step) {
        ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
    }
    return ticks;
}

struct Frame {
    double x0, y0, w, h;  // plot area in pixels
    double x_lo, x_hi, y_lo, y_hi;

    double px(double x) const { return x0 + (x - x_lo) / (x_hi - x_lo) * w; }
    double py(double y) const { return y0 + h - (y - y_lo) / (y_hi - y_lo) * h; }
};

}  // namespace

std::string render_line_chart(const LineChart& chart) {
    if (chart.x.size() != chart.y.size() || chart.x.size() < 2)
        throw std::invalid_argument("line chart needs matching x/y series of length >= 2");

    const double width = 800, height = 500;
    Frame f;
    f.x0 = 80;
    f.y0 = 50;
    f.w = width - 110;
    f.h = height - 110;
    f.x_lo = *std::min_element(chart.x.begin(), chart.x.end());
    f.x_hi = *std::max_element(chart.x.begin(), chart.x.end());
    f.y_lo = *std::min_element(chart.y.begin(), chart.y.end());
    f.y_hi = *std::max_element(chart.y.begin(), chart.y.end());
    if (f.x_hi == f.x_lo) f.x_hi = f.x_lo + 1.0;
    if (f.y_hi == f.y_lo) f.y_hi = f.y_lo + 1.0;
    const double pad = 0.04 * (f.y_hi - f.y_lo);
    f.y_lo -= pad;
    f.y_hi += pad;

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    svg << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // grid + tick labels
    svg << "  <g stroke=\"#d9d9d9\" stroke-width=\"1\">\n";
    for (double t : nice_ticks(f.x_lo, f.x_hi, 8)) {
        const double x = f.px(t);
        svg << "    <line x1=\"" << fmt(x) << "\" y1=\"" << fmt(f.y0) << "\" x2=\"" << fmt(x)
            << "\" y2=\"" << fmt(f.y0 + f.h) << "\"/>\n";
    }
    for (double t : nice_ticks(f.y_lo, f.y_hi, 6)) {
        const double y = f.py(t);
        svg << "    <line x1=\"" << fmt(f.x0) << "\" y1=\"" << fmt(y) << "\" x2=\""
            << fmt(f.x0 + f.w) << "\" y2=\"" << fmt(y) << "\"/>\n";
    }
    svg << "  </g>\n";

    svg << "  <g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
    for (double t : nice_ticks(f.x_lo, f.x_hi, 8)) {
        svg << "    <text x=\"" << fmt(f.px(t)) << "\" y=\"" << fmt(f.y0 + f.h + 16)
            << "\" text-anchor=\"middle\">" << fmt(t) << "</text>\n";
    }
    for (double t : nice_ticks(f.y_lo, f.y_hi, 6)) {
        svg << "    <text x=\"" << fmt(f.x0 - 6) << "\" y=\"" << fmt(f.py(t) + 4)
            << "\" text-anchor=\"end\">" << fmt(t) << "</text>\n";
    }
    svg << "  </g>\n";

    svg << "  <rect x=\"" << fmt(f.x0) << "\" y=\"" << fmt(f.y0) << "\" width=\"" << fmt(f.w)
        << "\" height=\"" << fmt(f.h)
        << "\" fill=\"none\" stroke=\"#000\" stroke-width=\"1\"/>\n";

    svg << "  <polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.6\" points=\"";
    for (std::size_t i = 0; i < chart.x.size(); ++i) {
        if (i > 0) svg << " ";
        svg << fmt(f.px(chart.x[i])) << "," << fmt(f.py(chart.y[i]));
    }
    svg << "\"/>\n";

    if (chart.marker_index < chart.x.size()) {
        const double mx = f.px(chart.x[chart.marker_index]);
        const double my = f.py(chart.y[chart.marker_index]);
        svg << "  <circle cx=\"" << fmt(mx) << "\" cy=\"" << fmt(my)
            << "\" r=\"4\" fill=\"#d62728\"/>\n";
        if (!chart.marker_label.empty()) {
            const bool left = mx > f.x0 + 0.6 * f.w;
            svg << "  <text x=\"" << fmt(mx + (left ? -8 : 8)) << "\" y=\"" << fmt(my - 8)
                << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#d62728\" text-anchor=\""
                << (left ? "end" : "start") << "\">" << xml_escape(chart.marker_label)
                << "</text>\n";
        }
    }

    svg << "  <text x=\"" << fmt(f.x0 + 0.5 * f.w) << "\" y=\"28\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"15\" font-weight=\"bold\">"
        << xml_escape(chart.title) << "</text>\n";
    svg << "  <text x=\"" << fmt(f.x0 + 0.5 * f.w) << "\" y=\"" << fmt(height - 14)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << xml_escape(chart.x_label) << "</text>\n";
    svg << "  <text x=\"20\" y=\"" << fmt(f.y0 + 0.5 * f.h)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
        << "transform=\"rotate(-90,20," << fmt(f.y0 + 0.5 * f.h) << ")\">"
        << xml_escape(chart.y_label) << "</text>\n";

    svg << "</svg>\n";
    return svg.str();
}

void write_line_chart(const std::filesystem::path& path, const LineChart& chart) {
    write_text_atomic(path, render_line_chart(chart));
}

}  // namespace stab
