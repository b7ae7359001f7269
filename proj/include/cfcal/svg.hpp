#pragma once

#include <string>
#include <utility>
#include <vector>

namespace cfcal::svg {

using Series = std::pair<std::string, std::vector<std::pair<double, double>>>;

/// Minimal static line chart; one polyline per series.
void write_line_chart(const std::string& path, const std::string& title,
                      const std::vector<Series>& series);

/// Bar chart of per-bin counts.
void write_histogram(const std::string& path, const std::string& title,
                     const std::vector<double>& bin_edges, const std::vector<double>& counts);

}  // namespace cfcal::svg
