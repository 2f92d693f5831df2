#pragma once

// Reconstruction report: a CSV of observed vs. computed values and a
// self-contained SVG plot (observed as a line, computed as dots).

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>

#include "msci/series.hpp"
#include "msci/theory.hpp"

namespace msci {

/// Row k = 0 carries x0 for both columns; states start at k = 1.
inline void write_reconstruction_csv(const TimeSeries& observed, const Trajectory& rebuilt, std::ostream& out) {
    out << "k,q_obs,x_obs,q_rec,x_rec\n";
    out << "0,," << format_real(observed.x0()) << ",," << format_real(rebuilt.x0) << '\n';
    for (std::size_t k = 1; k <= observed.size(); ++k) {
        const auto& o = observed.samples()[k - 1];
        const auto& r = rebuilt.points[k - 1];
        out << k << ',' << o.q << ',' << format_real(o.x) << ',' << r.q << ',' << format_real(r.x) << '\n';
    }
}

struct PlotStyle {
    double width = 640;
    double height = 400;
    double margin = 48;
    std::string title = "observed vs computed";
};

inline void write_reconstruction_svg(const TimeSeries& observed, const Trajectory& rebuilt, std::ostream& out,
                                     const PlotStyle& style = {}) {
    auto obs = observed.values();
    std::vector<double> rec{rebuilt.x0};
    for (const auto& p : rebuilt.points) rec.push_back(p.x);

    double lo = std::min(*std::min_element(obs.begin(), obs.end()), *std::min_element(rec.begin(), rec.end()));
    double hi = std::max(*std::max_element(obs.begin(), obs.end()), *std::max_element(rec.begin(), rec.end()));
    if (hi - lo < 1e-12) {
        lo -= 1;
        hi += 1;
    }
    const double n = static_cast<double>(std::max<std::size_t>(obs.size() - 1, 1));
    const double pw = style.width - 2 * style.margin;
    const double ph = style.height - 2 * style.margin;
    auto px = [&](std::size_t k) { return style.margin + pw * static_cast<double>(k) / n; };
    auto py = [&](double v) { return style.margin + ph * (1.0 - (v - lo) / (hi - lo)); };
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return std::string(buf);
    };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(style.width) << "\" height=\""
        << num(style.height) << "\" viewBox=\"0 0 " << num(style.width) << ' ' << num(style.height) << "\">\n";
    out << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "  <text x=\"" << num(style.width / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"14\">" << style.title << "</text>\n";
    // axes
    out << "  <line x1=\"" << num(style.margin) << "\" y1=\"" << num(style.height - style.margin) << "\" x2=\""
        << num(style.width - style.margin) << "\" y2=\"" << num(style.height - style.margin)
        << "\" stroke=\"black\"/>\n";
    out << "  <line x1=\"" << num(style.margin) << "\" y1=\"" << num(style.margin) << "\" x2=\"" << num(style.margin)
        << "\" y2=\"" << num(style.height - style.margin) << "\" stroke=\"black\"/>\n";
    out << "  <text x=\"" << num(style.margin - 6) << "\" y=\"" << num(py(hi) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << format_real(hi) << "</text>\n";
    out << "  <text x=\"" << num(style.margin - 6) << "\" y=\"" << num(py(lo) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << format_real(lo) << "</text>\n";

    out << "  <polyline class=\"observed\" fill=\"none\" stroke=\"blue\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < obs.size(); ++k) out << (k ? " " : "") << num(px(k)) << ',' << num(py(obs[k]));
    out << "\"/>\n";
    for (std::size_t k = 0; k < rec.size(); ++k)
        out << "  <circle class=\"computed\" cx=\"" << num(px(k)) << "\" cy=\"" << num(py(rec[k]))
            << "\" r=\"3.5\" fill=\"red\"/>\n";
    out << "</svg>\n";
}

}  // namespace msci
