// plot.hpp
// Deterministic SVG figures from result CSV files: fixed 640x400 viewport,
// fixed palette, coordinates rounded to two decimals, no timestamps.

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "caslab/table.hpp"

namespace caslab {

enum class PlotKind { survival, entropy, amplitude_race, dominance, spacing, chsh };

std::string to_string(PlotKind kind);
PlotKind plot_kind_from_string(const std::string& name);  // throws ConfigError
// Columns the kind needs; "a*" stands for one or more amplitude columns.
std::vector<std::string> required_columns(PlotKind kind);

struct Histogram {
    double lo = 0.0;
    double hi = 1.0;
    std::vector<std::size_t> counts;
    std::size_t total() const;
    double width() const { return (hi - lo) / static_cast<double>(counts.size()); }
};

// Values outside [lo, hi) are clamped into the edge bins, so every sample is
// counted exactly once.
Histogram histogram(const std::vector<double>& values, std::size_t bins, double lo, double hi);

// Throws ConfigError when the table is empty or lacks the kind's columns.
std::string render_plot(const Table& table, PlotKind kind);

// Reads `csv`, renders, and writes `svg` via a temporary name. Nothing is
// written on error.
void plot_file(const std::filesystem::path& csv, PlotKind kind, const std::filesystem::path& svg);

}  // namespace caslab
