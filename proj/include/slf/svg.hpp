#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "slf/core.hpp"
#include "slf/io.hpp"

namespace slf::svg {

struct Series {
    std::string label;
    std::vector<double> y;  // plotted against k = 1..n
};

namespace detail {

inline std::string px(double v) {
    return io::fmt(std::round(v * 100.0) / 100.0);
}

/// Largest "nice" step (1/2/5 times a power of ten) giving <= 8 intervals.
inline double nice_step(double span) {
    if (!(span > 0.0)) return 1.0;
    const double raw = span / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (mag * m >= raw) return mag * m;
    return mag * 10.0;
}

}  // namespace detail

/// Standalone deterministic line chart; no timestamps, no randomness.
inline void write_line_chart(const std::filesystem::path& path, const std::string& title,
                             const std::string& x_label, const std::string& y_label,
                             const std::vector<Series>& series) {
    if (series.empty()) throw InvalidArgument("write_line_chart: no series");
    const std::size_t n = series.front().y.size();
    if (n < 2) throw InvalidArgument("write_line_chart: need >= 2 points");
    for (const auto& s : series)
        if (s.y.size() != n) throw InvalidArgument("write_line_chart: ragged series");

    double y_max = 0.0;
    for (const auto& s : series)
        for (double v : s.y) y_max = std::max(y_max, v);
    if (!(y_max > 0.0)) y_max = 1.0;
    y_max *= 1.05;

    const double w = 860, h = 520;
    const double l = 70, r = 30, t = 42, b = 56;
    const double pw = w - l - r, ph = h - t - b;
    const auto x_of = [&](double k) { return l + (k - 1.0) / (static_cast<double>(n) - 1.0) * pw; };
    const auto y_of = [&](double v) { return t + ph - v / y_max * ph; };

    static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                     "#8c564b", "#e377c2"};
    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " +
           detail::px(w) + " " + detail::px(h) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<text x=\"" + detail::px(w / 2) +
           "\" y=\"24\" text-anchor=\"middle\" font-family=\"monospace\" "
           "font-size=\"16\">" + title + "</text>\n";

    const double y_step = detail::nice_step(y_max);
    for (double v = 0.0; v <= y_max + 1e-12; v += y_step) {
        const double yy = y_of(v);
        out += "<line x1=\"" + detail::px(l) + "\" y1=\"" + detail::px(yy) + "\" x2=\"" +
               detail::px(l + pw) + "\" y2=\"" + detail::px(yy) +
               "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        out += "<text x=\"" + detail::px(l - 8) + "\" y=\"" + detail::px(yy + 4) +
               "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"12\">" +
               io::fmt(std::round(v * 1000.0) / 1000.0) + "</text>\n";
    }
    const auto x_step = static_cast<std::size_t>(
        std::max<double>(1.0, std::ceil(static_cast<double>(n) / 10.0)));
    for (std::size_t k = 1; k <= n; k += x_step) {
        const double xx = x_of(static_cast<double>(k));
        out += "<line x1=\"" + detail::px(xx) + "\" y1=\"" + detail::px(t + ph) +
               "\" x2=\"" + detail::px(xx) + "\" y2=\"" + detail::px(t + ph + 5) +
               "\" stroke=\"black\" stroke-width=\"1\"/>\n";
        out += "<text x=\"" + detail::px(xx) + "\" y=\"" + detail::px(t + ph + 20) +
               "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\">" +
               io::fmt(static_cast<std::int64_t>(k)) + "</text>\n";
    }
    out += "<line x1=\"" + detail::px(l) + "\" y1=\"" + detail::px(t) + "\" x2=\"" +
           detail::px(l) + "\" y2=\"" + detail::px(t + ph) +
           "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
    out += "<line x1=\"" + detail::px(l) + "\" y1=\"" + detail::px(t + ph) + "\" x2=\"" +
           detail::px(l + pw) + "\" y2=\"" + detail::px(t + ph) +
           "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
    out += "<text x=\"" + detail::px(l + pw / 2) + "\" y=\"" + detail::px(h - 14) +
           "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"13\">" +
           x_label + "</text>\n";
    out += "<text x=\"20\" y=\"" + detail::px(t + ph / 2) +
           "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"13\" "
           "transform=\"rotate(-90 20 " + detail::px(t + ph / 2) + ")\">" +
           y_label + "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const char* color = kPalette[si % 6];
        out += "<polyline fill=\"none\" stroke=\"";
        out += color;
        out += "\" stroke-width=\"1.8\" points=\"";
        for (std::size_t k = 1; k <= n; ++k) {
            if (k > 1) out += ' ';
            out += detail::px(x_of(static_cast<double>(k))) + "," +
                   detail::px(y_of(series[si].y[k - 1]));
        }
        out += "\"/>\n";
        const double ly = t + 16 + 18 * static_cast<double>(si);
        out += "<line x1=\"" + detail::px(l + pw - 150) + "\" y1=\"" + detail::px(ly) +
               "\" x2=\"" + detail::px(l + pw - 126) + "\" y2=\"" + detail::px(ly) +
               "\" stroke=\"";
        out += color;
        out += "\" stroke-width=\"1.8\"/>\n";
        out += "<text x=\"" + detail::px(l + pw - 120) + "\" y=\"" + detail::px(ly + 4) +
               "\" font-family=\"monospace\" font-size=\"12\">" + series[si].label +
               "</text>\n";
    }
    out += "</svg>\n";
    io::write_text_file(path, out);
}

}  // namespace slf::svg
