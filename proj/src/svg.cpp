#include "dic/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace dic {

namespace {

constexpr int kW = 640;
constexpr int kH = 640;
constexpr int kMargin = 60;

std::ofstream open_svg(const std::filesystem::path& path, int w, int h) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" viewBox=\"0 0 " << w << " " << h << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    return f;
}

}  // namespace

void write_scatter_svg(const std::vector<ScatterSeries>& series, const std::string& title,
                       const std::filesystem::path& path) {
    double extent = 1e-9;
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            extent = std::max({extent, std::abs(x), std::abs(y)});
        }
    }
    extent *= 1.05;
    const double span = kW - 2 * kMargin;
    auto px = [&](double x) { return kMargin + (x + extent) / (2 * extent) * span; };
    auto py = [&](double y) { return kH - kMargin - (y + extent) / (2 * extent) * span; };

    auto f = open_svg(path, kW, kH);
    f << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
      << title << "</text>\n";
    // axes through the origin
    f << "<line x1=\"" << px(-extent) << "\" y1=\"" << py(0) << "\" x2=\"" << px(extent)
      << "\" y2=\"" << py(0) << "\" stroke=\"#ccc\"/>\n";
    f << "<line x1=\"" << px(0) << "\" y1=\"" << py(-extent) << "\" x2=\"" << px(0)
      << "\" y2=\"" << py(extent) << "\" stroke=\"#ccc\"/>\n";
    f << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << span
      << "\" height=\"" << span << "\" fill=\"none\" stroke=\"black\"/>\n";

    int legend_y = kMargin + 16;
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            f << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"1.5\" fill=\""
              << s.color << "\" fill-opacity=\"0.6\"/>\n";
        }
        f << "<text x=\"" << kW - kMargin - 4 << "\" y=\"" << legend_y
          << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << s.color << "\">" << s.label
          << "</text>\n";
        legend_y += 16;
    }
    f << "</svg>\n";
}

void write_histogram_svg(const std::vector<HistogramSeries>& series, double lo, double bin_width,
                         const std::string& title, const std::string& x_label,
                         const std::filesystem::path& path) {
    int max_count = 1;
    size_t bins = 0;
    for (const auto& s : series) {
        bins = std::max(bins, s.counts.size());
        for (int c : s.counts) max_count = std::max(max_count, c);
    }
    if (bins == 0) throw std::invalid_argument("histogram: no bins");

    const double span_x = kW - 2 * kMargin;
    const double span_y = kH - 2 * kMargin;
    const double bar_w = span_x / static_cast<double>(bins);

    auto f = open_svg(path, kW, kH);
    f << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
      << title << "</text>\n";
    f << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 16
      << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label << "</text>\n";
    f << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << span_x
      << "\" height=\"" << span_y << "\" fill=\"none\" stroke=\"black\"/>\n";

    int legend_y = kMargin + 16;
    const double sub_w = bar_w / static_cast<double>(series.size());
    for (size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        for (size_t i = 0; i < s.counts.size(); ++i) {
            const double h = span_y * s.counts[i] / static_cast<double>(max_count);
            f << "<rect x=\"" << kMargin + i * bar_w + si * sub_w << "\" y=\""
              << kH - kMargin - h << "\" width=\"" << sub_w * 0.9 << "\" height=\"" << h
              << "\" fill=\"" << s.color << "\" fill-opacity=\"0.7\"/>\n";
        }
        f << "<text x=\"" << kW - kMargin - 4 << "\" y=\"" << legend_y
          << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << s.color << "\">" << s.label
          << "</text>\n";
        legend_y += 16;
    }
    // a few x ticks
    for (size_t i = 0; i <= bins; i += std::max<size_t>(1, bins / 5)) {
        const double x = kMargin + i * bar_w;
        f << "<line x1=\"" << x << "\" y1=\"" << kH - kMargin << "\" x2=\"" << x << "\" y2=\""
          << kH - kMargin + 5 << "\" stroke=\"black\"/>\n";
        f << "<text x=\"" << x << "\" y=\"" << kH - kMargin + 18
          << "\" text-anchor=\"middle\" font-size=\"10\">" << lo + i * bin_width << "</text>\n";
    }
    f << "</svg>\n";
}

std::vector<int> histogram_counts(const std::vector<double>& values, double lo, double hi,
                                  int bins) {
    if (bins <= 0 || !(hi > lo)) throw std::invalid_argument("histogram: bad range");
    std::vector<int> counts(bins, 0);
    for (double v : values) {
        int b = static_cast<int>((v - lo) / (hi - lo) * bins);
        if (b < 0) b = 0;
        if (b >= bins) b = bins - 1;
        ++counts[b];
    }
    return counts;
}

}  // namespace dic
