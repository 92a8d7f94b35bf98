#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace dic {

struct ScatterSeries {
    std::string label;
    std::string color;
    std::vector<std::pair<double, double>> points;
};

// Self-contained SVG scatter plot (square axes, symmetric about the origin).
void write_scatter_svg(const std::vector<ScatterSeries>& series, const std::string& title,
                       const std::filesystem::path& path);

struct HistogramSeries {
    std::string label;
    std::string color;
    std::vector<int> counts;  // per bin
};

// Bar histogram; bin i covers [lo + i*width, lo + (i+1)*width).
void write_histogram_svg(const std::vector<HistogramSeries>& series, double lo, double bin_width,
                         const std::string& title, const std::string& x_label,
                         const std::filesystem::path& path);

std::vector<int> histogram_counts(const std::vector<double>& values, double lo, double hi,
                                  int bins);

}  // namespace dic
