#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace mwgan::cli {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

} // namespace

std::string line_chart_svg(const std::vector<Series>& panels, const std::string& x_label) {
    const double width = 640, panel_h = 220, left = 70, right = 20, top = 30, bottom = 40;
    const double height = panel_h * static_cast<double>(std::max<std::size_t>(panels.size(), 1));
    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" + num(height) +
                      "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    for (std::size_t p = 0; p < panels.size(); ++p) {
        const Series& s = panels[p];
        const double y0 = panel_h * static_cast<double>(p);
        const double pw = width - left - right, ph = panel_h - top - bottom;
        svg += "<text x=\"" + num(left) + "\" y=\"" + num(y0 + 18) + "\" font-size=\"13\">" + escape(s.title) + "</text>\n";
        svg += "<rect x=\"" + num(left) + "\" y=\"" + num(y0 + top) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
               "\" fill=\"none\" stroke=\"#888\"/>\n";

        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
            if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) pts.emplace_back(s.x[i], s.y[i]);
        if (pts.empty()) {
            svg += "<text x=\"" + num(left + 10) + "\" y=\"" + num(y0 + top + 20) + "\">no data</text>\n";
            continue;
        }
        auto [xmin, xmax] = std::minmax_element(pts.begin(), pts.end());
        double x_lo = xmin->first, x_hi = xmax->first;
        double y_lo = pts.front().second, y_hi = y_lo;
        for (const auto& [x, y] : pts) {
            y_lo = std::min(y_lo, y);
            y_hi = std::max(y_hi, y);
        }
        if (x_hi == x_lo) x_hi = x_lo + 1;
        if (y_hi == y_lo) {
            y_hi += 0.5;
            y_lo -= 0.5;
        }
        const auto sx = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * pw; };
        const auto sy = [&](double y) { return y0 + top + (1.0 - (y - y_lo) / (y_hi - y_lo)) * ph; };

        for (int t = 0; t <= 4; ++t) {
            const double yv = y_lo + (y_hi - y_lo) * t / 4.0;
            const double xv = x_lo + (x_hi - x_lo) * t / 4.0;
            svg += "<text x=\"" + num(left - 6) + "\" y=\"" + num(sy(yv) + 4) + "\" text-anchor=\"end\">" + num(yv) +
                   "</text>\n";
            svg += "<text x=\"" + num(sx(xv)) + "\" y=\"" + num(y0 + top + ph + 14) + "\" text-anchor=\"middle\">" +
                   num(xv) + "</text>\n";
        }
        svg += "<text x=\"" + num(left + pw / 2) + "\" y=\"" + num(y0 + top + ph + 30) + "\" text-anchor=\"middle\">" +
               escape(x_label) + "</text>\n";

        svg += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i) svg += ' ';
            svg += num(sx(pts[i].first)) + "," + num(sy(pts[i].second));
        }
        svg += "\"/>\n";
        if (pts.size() <= 60)
            for (const auto& [x, y] : pts)
                svg += "<circle cx=\"" + num(sx(x)) + "\" cy=\"" + num(sy(y)) + "\" r=\"2.5\" fill=\"#1f77b4\"/>\n";
    }
    svg += "</svg>\n";
    return svg;
}

} // namespace mwgan::cli
