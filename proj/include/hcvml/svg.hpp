// hcvml: minimal static SVG figures (line, bar, box and heatmap charts).
// Coordinates are rounded to 0.01 px; the data files carry full precision.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "hcvml/explore.hpp"
#include "hcvml/numeric.hpp"

namespace hcvml::svg {

struct Series {
    std::string name;
    std::vector<double> x, y;
};

namespace detail {

inline constexpr double kWidth = 640, kHeight = 420, kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;
inline const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

inline std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

inline std::string open(const std::string& title, double w = kWidth, double h = kHeight) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(w) + "\" height=\"" + px(h) + "\" viewBox=\"0 0 " +
           px(w) + " " + px(h) + "\" font-family=\"sans-serif\" font-size=\"11\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" +
           "<text x=\"" + px(w / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" + escape(title) + "</text>\n";
}

inline std::string text(double x, double y, const std::string& s, const char* anchor = "middle", double rotate = 0) {
    std::string t = "<text x=\"" + px(x) + "\" y=\"" + px(y) + "\" text-anchor=\"" + anchor + "\"";
    if (rotate != 0) t += " transform=\"rotate(" + px(rotate) + " " + px(x) + " " + px(y) + ")\"";
    return t + ">" + escape(s) + "</text>\n";
}

inline std::string line(double x1, double y1, double x2, double y2, const char* stroke = "black", double width = 1) {
    return "<line x1=\"" + px(x1) + "\" y1=\"" + px(y1) + "\" x2=\"" + px(x2) + "\" y2=\"" + px(y2) + "\" stroke=\"" +
           stroke + "\" stroke-width=\"" + px(width) + "\"/>\n";
}

inline std::string label_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

struct Frame {
    double x0, x1, y0, y1;
    double sx(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
    double sy(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

inline std::string axes(const Frame& f, const std::string& xlabel, const std::string& ylabel) {
    std::string s = line(kLeft, kHeight - kBottom, kWidth - kRight, kHeight - kBottom);
    s += line(kLeft, kTop, kLeft, kHeight - kBottom);
    for (int k = 0; k <= 4; ++k) {
        const double xv = f.x0 + (f.x1 - f.x0) * k / 4.0, yv = f.y0 + (f.y1 - f.y0) * k / 4.0;
        s += text(f.sx(xv), kHeight - kBottom + 16, label_number(xv));
        s += text(kLeft - 6, f.sy(yv) + 4, label_number(yv), "end");
    }
    s += text((kLeft + kWidth - kRight) / 2, kHeight - 18, xlabel);
    s += text(18, (kTop + kHeight - kBottom) / 2, ylabel, "middle", -90);
    return s;
}

}  // namespace detail

inline std::string line_chart(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                              const std::vector<Series>& series, bool diagonal = false) {
    using namespace detail;
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    bool first = true;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            if (first) {
                x0 = x1 = s.x[i];
                y0 = y1 = s.y[i];
                first = false;
            }
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    const Frame f{x0, x1, std::min(y0, 0.0), y1};
    std::string out = open(title) + axes(f, xlabel, ylabel);
    if (diagonal) out += line(f.sx(0), f.sy(0), f.sx(1), f.sy(1), "#999999");
    for (std::size_t k = 0; k < series.size(); ++k) {
        const char* colour = kPalette[k % std::size(kPalette)];
        std::string pts;
        for (std::size_t i = 0; i < series[k].x.size(); ++i)
            if (std::isfinite(series[k].x[i]) && std::isfinite(series[k].y[i]))
                pts += px(f.sx(series[k].x[i])) + "," + px(f.sy(series[k].y[i])) + " ";
        out += "<polyline fill=\"none\" stroke=\"" + std::string(colour) + "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
        out += "<text x=\"" + px(kWidth - kRight - 4) + "\" y=\"" + px(kTop + 14 * (k + 1)) +
               "\" text-anchor=\"end\" fill=\"" + colour + "\">" + escape(series[k].name) + "</text>\n";
    }
    return out + "</svg>\n";
}

inline std::string bar_chart(const std::string& title, const std::string& ylabel, const std::vector<std::string>& labels,
                             const std::vector<double>& values) {
    using namespace detail;
    double hi = 0, lo = 0;
    for (double v : values) {
        hi = std::max(hi, v);
        lo = std::min(lo, v);
    }
    if (hi == lo) hi = lo + 1;
    const Frame f{0, static_cast<double>(std::max<std::size_t>(values.size(), 1)), lo, hi};
    std::string out = open(title);
    out += line(kLeft, f.sy(0), kWidth - kRight, f.sy(0));
    out += line(kLeft, kTop, kLeft, kHeight - kBottom);
    out += text(kLeft - 6, f.sy(hi) + 4, label_number(hi), "end");
    out += text(kLeft - 6, f.sy(lo) + 4, label_number(lo), "end");
    out += text(18, (kTop + kHeight - kBottom) / 2, ylabel, "middle", -90);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double xa = f.sx(i + 0.15), xb = f.sx(i + 0.85);
        const double ya = f.sy(std::max(values[i], 0.0)), yb = f.sy(std::min(values[i], 0.0));
        out += "<rect x=\"" + px(xa) + "\" y=\"" + px(ya) + "\" width=\"" + px(xb - xa) + "\" height=\"" + px(yb - ya) +
               "\" fill=\"" + kPalette[0] + "\"/>\n";
        out += text((xa + xb) / 2, kHeight - kBottom + 16, labels.at(i));
    }
    return out + "</svg>\n";
}

/// One lane per column, each scaled to its own [min, max].
inline std::string box_plot(const std::string& title, const std::vector<BoxStats>& boxes) {
    using namespace detail;
    const Frame f{0, static_cast<double>(std::max<std::size_t>(boxes.size(), 1)), 0, 1};
    std::string out = open(title);
    out += text(18, (kTop + kHeight - kBottom) / 2, "scaled to column range", "middle", -90);
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        const BoxStats& b = boxes[i];
        const double span = b.max > b.min ? b.max - b.min : 1.0;
        auto y = [&](double v) { return f.sy((v - b.min) / span); };
        const double xm = f.sx(i + 0.5), xa = f.sx(i + 0.25), xb = f.sx(i + 0.75);
        out += line(xm, y(b.whisker_low), xm, y(b.q1));
        out += line(xm, y(b.q3), xm, y(b.whisker_high));
        out += "<rect x=\"" + px(xa) + "\" y=\"" + px(y(b.q3)) + "\" width=\"" + px(xb - xa) + "\" height=\"" +
               px(y(b.q1) - y(b.q3)) + "\" fill=\"#c6dbef\" stroke=\"black\"/>\n";
        out += line(xa, y(b.median), xb, y(b.median), "black", 2);
        for (const Outlier& o : b.outliers)
            out += "<circle cx=\"" + px(xm) + "\" cy=\"" + px(y(o.value)) + "\" r=\"2\" fill=\"none\" stroke=\"#d62728\"/>\n";
        out += text(xm, kHeight - kBottom + 16, b.column);
    }
    return out + "</svg>\n";
}

/// Square matrix in [-1, 1]; blue negative, red positive.
inline std::string heatmap(const std::string& title, const std::vector<std::string>& names, const Matrix& m) {
    using namespace detail;
    const double cell = 30, left = 60, top = 40;
    const double w = left + cell * names.size() + 20, h = top + cell * names.size() + 20;
    std::string out = open(title, w, h);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        out += text(left - 4, top + cell * (i + 0.5) + 4, names[i], "end");
        for (std::size_t j = 0; j < m.cols(); ++j) {
            const double v = std::clamp(m(i, j), -1.0, 1.0);
            const int r = v > 0 ? 255 : static_cast<int>(std::lround(255 * (1 + v)));
            const int b = v < 0 ? 255 : static_cast<int>(std::lround(255 * (1 - v)));
            const int g = static_cast<int>(std::lround(255 * (1 - std::abs(v))));
            char colour[16];
            std::snprintf(colour, sizeof colour, "#%02x%02x%02x", r, g, b);
            out += "<rect x=\"" + px(left + cell * j) + "\" y=\"" + px(top + cell * i) + "\" width=\"" + px(cell) +
                   "\" height=\"" + px(cell) + "\" fill=\"" + colour + "\"/>\n";
        }
    }
    return out + "</svg>\n";
}

}  // namespace hcvml::svg
