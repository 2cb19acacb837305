#include "pinnlab/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace pinnlab {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 160.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string escape(const std::string& s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

// Comment text may not contain "--".
std::string comment_safe(const std::string& s) {
    std::string out;
    for (const char c : s) {
        out += (c == '-' && !out.empty() && out.back() == '-') ? ' ' : c;
    }
    return out;
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

struct Axis {
    double lo;
    double hi;
    double px_lo;
    double px_hi;

    [[nodiscard]] double map(double v) const {
        return hi == lo ? 0.5 * (px_lo + px_hi) : px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo);
    }
};

void pad(double& lo, double& hi) {
    if (!(lo < hi)) {
        const double d = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
        lo -= d;
        hi += d;
    }
}

std::string header(const PlotLabels& labels, const std::string& data_comment) {
    std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
         "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n";
    s += "<!--\n" + comment_safe(data_comment) + "-->\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + coord(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">" + escape(labels.title) + "</text>\n";
    s += "<text x=\"" + coord(kLeft + (kWidth - kLeft - kRight) / 2) + "\" y=\"" + coord(kHeight - 16) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" + escape(labels.x) + "</text>\n";
    s += "<text x=\"18\" y=\"" + coord(kTop + (kHeight - kTop - kBottom) / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 18 " +
         coord(kTop + (kHeight - kTop - kBottom) / 2) + ")\">" + escape(labels.y) + "</text>\n";
    s += "<rect x=\"" + coord(kLeft) + "\" y=\"" + coord(kTop) + "\" width=\"" + coord(kWidth - kLeft - kRight) +
         "\" height=\"" + coord(kHeight - kTop - kBottom) + "\" fill=\"none\" stroke=\"black\"/>\n";
    return s;
}

std::string y_tick(const Axis& y, double value, const std::string& label) {
    const double py = y.map(value);
    return "<line x1=\"" + coord(kLeft - 5) + "\" y1=\"" + coord(py) + "\" x2=\"" + coord(kLeft) + "\" y2=\"" +
           coord(py) + "\" stroke=\"black\"/>\n<text x=\"" + coord(kLeft - 8) + "\" y=\"" + coord(py + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + escape(label) + "</text>\n";
}

std::string x_tick(double px, const std::string& label) {
    const double base = kHeight - kBottom;
    return "<line x1=\"" + coord(px) + "\" y1=\"" + coord(base) + "\" x2=\"" + coord(px) + "\" y2=\"" +
           coord(base + 5) + "\" stroke=\"black\"/>\n<text x=\"" + coord(px) + "\" y=\"" + coord(base + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + escape(label) + "</text>\n";
}

}  // namespace

std::string line_plot_svg(const PlotLabels& labels, const std::vector<Series>& series, bool log_y) {
    std::string data;
    double xlo = std::numeric_limits<double>::infinity();
    double xhi = -xlo;
    double ylo = xlo;
    double yhi = -xlo;
    std::vector<std::vector<std::pair<double, double>>> points(series.size());
    for (std::size_t s = 0; s < series.size(); ++s) {
        data += "series " + series[s].name + ": x y\n";
        const std::size_t n = std::min(series[s].x.size(), series[s].y.size());
        for (std::size_t i = 0; i < n; ++i) {
            const double x = series[s].x[i];
            double y = series[s].y[i];
            data += num(x) + " " + num(y) + "\n";
            if (!std::isfinite(x) || !std::isfinite(y) || (log_y && !(y > 0.0))) {
                continue;
            }
            if (log_y) {
                y = std::log10(y);
            }
            points[s].emplace_back(x, y);
            xlo = std::min(xlo, x);
            xhi = std::max(xhi, x);
            ylo = std::min(ylo, y);
            yhi = std::max(yhi, y);
        }
    }
    if (!std::isfinite(xlo)) {
        xlo = 0.0;
        xhi = 1.0;
        ylo = 0.0;
        yhi = 1.0;
    }
    pad(xlo, xhi);
    pad(ylo, yhi);
    if (log_y) {
        ylo = std::floor(ylo);
        yhi = std::ceil(yhi);
        pad(ylo, yhi);
    }
    const Axis xa{xlo, xhi, kLeft, kWidth - kRight};
    const Axis ya{ylo, yhi, kHeight - kBottom, kTop};

    std::string svg = header(labels, data);
    for (int i = 0; i <= 4; ++i) {
        const double v = xlo + (xhi - xlo) * i / 4.0;
        svg += x_tick(xa.map(v), num(v));
    }
    if (log_y) {
        const int step = std::max(1, static_cast<int>(std::ceil((yhi - ylo) / 6.0)));
        for (int e = static_cast<int>(ylo); e <= static_cast<int>(yhi); e += step) {
            svg += y_tick(ya, e, "1e" + std::to_string(e));
        }
    } else {
        for (int i = 0; i <= 4; ++i) {
            const double v = ylo + (yhi - ylo) * i / 4.0;
            svg += y_tick(ya, v, num(v));
        }
    }
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % std::size(kPalette)];
        if (!points[s].empty()) {
            svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"";
            for (const auto& [x, y] : points[s]) {
                svg += coord(xa.map(x)) + "," + coord(ya.map(y)) + " ";
            }
            svg += "\"/>\n";
        }
        const double ly = kTop + 16.0 + 18.0 * static_cast<double>(s);
        svg += "<line x1=\"" + coord(kWidth - kRight + 12) + "\" y1=\"" + coord(ly) + "\" x2=\"" +
               coord(kWidth - kRight + 32) + "\" y2=\"" + coord(ly) + "\" stroke=\"" + color +
               "\" stroke-width=\"2\"/>\n<text x=\"" + coord(kWidth - kRight + 38) + "\" y=\"" + coord(ly + 4) +
               "\" font-family=\"sans-serif\" font-size=\"11\">" + escape(series[s].name) + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

std::string box_plot_svg(const PlotLabels& labels, const std::vector<BoxStats>& boxes) {
    std::string data = "group min q1 median q3 max n\n";
    double ylo = std::numeric_limits<double>::infinity();
    double yhi = -ylo;
    for (const auto& b : boxes) {
        data += b.group + " " + num(b.min) + " " + num(b.q1) + " " + num(b.median) + " " + num(b.q3) + " " +
                num(b.max) + " " + std::to_string(b.n) + "\n";
        ylo = std::min(ylo, b.min);
        yhi = std::max(yhi, b.max);
    }
    if (!std::isfinite(ylo) || !std::isfinite(yhi)) {
        ylo = 0.0;
        yhi = 1.0;
    }
    pad(ylo, yhi);
    const Axis ya{ylo, yhi, kHeight - kBottom, kTop};
    std::string svg = header(labels, data);
    for (int i = 0; i <= 4; ++i) {
        const double v = ylo + (yhi - ylo) * i / 4.0;
        svg += y_tick(ya, v, num(v));
    }
    const double span = kWidth - kLeft - kRight;
    const double slot = boxes.empty() ? span : span / static_cast<double>(boxes.size());
    const double half = std::min(30.0, slot * 0.3);
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        const BoxStats& b = boxes[i];
        const double cx = kLeft + slot * (static_cast<double>(i) + 0.5);
        auto hline = [&](double v, double w, const char* extra) {
            return "<line x1=\"" + coord(cx - w) + "\" y1=\"" + coord(ya.map(v)) + "\" x2=\"" + coord(cx + w) +
                   "\" y2=\"" + coord(ya.map(v)) + "\" stroke=\"black\"" + extra + "/>\n";
        };
        svg += "<line x1=\"" + coord(cx) + "\" y1=\"" + coord(ya.map(b.min)) + "\" x2=\"" + coord(cx) + "\" y2=\"" +
               coord(ya.map(b.q1)) + "\" stroke=\"black\"/>\n";
        svg += "<line x1=\"" + coord(cx) + "\" y1=\"" + coord(ya.map(b.q3)) + "\" x2=\"" + coord(cx) + "\" y2=\"" +
               coord(ya.map(b.max)) + "\" stroke=\"black\"/>\n";
        svg += hline(b.min, half * 0.5, "");
        svg += hline(b.max, half * 0.5, "");
        svg += "<rect x=\"" + coord(cx - half) + "\" y=\"" + coord(ya.map(b.q3)) + "\" width=\"" + coord(2 * half) +
               "\" height=\"" + coord(std::max(0.5, ya.map(b.q1) - ya.map(b.q3))) +
               "\" fill=\"#9ecae1\" stroke=\"black\"/>\n";
        svg += hline(b.median, half, " stroke-width=\"2\"");
        svg += x_tick(cx, b.group);
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace pinnlab
