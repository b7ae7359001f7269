#include "cfcal/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace cfcal::svg {

namespace {
constexpr double kWidth = 720, kHeight = 420, kMargin = 50;
const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    double span() const { return hi > lo ? hi - lo : 1.0; }
};
}  // namespace

void write_line_chart(const std::string& path, const std::string& title,
                      const std::vector<Series>& series) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    Range rx, ry;
    for (const auto& [_, pts] : series)
        for (auto [x, y] : pts) {
            rx.add(x);
            ry.add(y);
        }
    auto sx = [&rx](double x) { return kMargin + (x - rx.lo) / rx.span() * (kWidth - 2 * kMargin); };
    auto sy = [&ry](double y) {
        return kHeight - kMargin - (y - ry.lo) / ry.span() * (kHeight - 2 * kMargin);
    };
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='" << kHeight
        << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << kWidth / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title
        << "</text>\n";
    out << "<line x1='" << kMargin << "' y1='" << kHeight - kMargin << "' x2='" << kWidth - kMargin
        << "' y2='" << kHeight - kMargin << "' stroke='black'/>\n";
    out << "<line x1='" << kMargin << "' y1='" << kMargin << "' x2='" << kMargin << "' y2='"
        << kHeight - kMargin << "' stroke='black'/>\n";
    std::size_t ci = 0;
    for (const auto& [name, pts] : series) {
        out << "<polyline fill='none' stroke='" << kColors[ci % 6] << "' stroke-width='1.5' points='";
        for (auto [x, y] : pts) out << sx(x) << ',' << sy(y) << ' ';
        out << "'/>\n";
        out << "<text x='" << kWidth - kMargin + 4 << "' y='" << kMargin + 16.0 * double(ci)
            << "' font-size='12' fill='" << kColors[ci % 6] << "'>" << name << "</text>\n";
        ++ci;
    }
    out << "</svg>\n";
}

void write_histogram(const std::string& path, const std::string& title,
                     const std::vector<double>& bin_edges, const std::vector<double>& counts) {
    if (bin_edges.size() != counts.size() + 1)
        throw std::runtime_error("histogram needs one more edge than counts");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    Range ry;
    ry.add(0.0);
    for (double c : counts) ry.add(c);
    Range rx;
    rx.add(bin_edges.front());
    rx.add(bin_edges.back());
    auto sx = [&rx](double x) { return kMargin + (x - rx.lo) / rx.span() * (kWidth - 2 * kMargin); };
    auto sy = [&ry](double y) {
        return kHeight - kMargin - (y - ry.lo) / ry.span() * (kHeight - 2 * kMargin);
    };
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='" << kHeight
        << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << kWidth / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title
        << "</text>\n";
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double x0 = sx(bin_edges[i]), x1 = sx(bin_edges[i + 1]);
        const double y = sy(counts[i]);
        out << "<rect x='" << x0 << "' y='" << y << "' width='" << std::max(1.0, x1 - x0 - 1)
            << "' height='" << (kHeight - kMargin - y) << "' fill='#1f77b4'/>\n";
    }
    out << "<line x1='" << kMargin << "' y1='" << kHeight - kMargin << "' x2='" << kWidth - kMargin
        << "' y2='" << kHeight - kMargin << "' stroke='black'/>\n";
    out << "</svg>\n";
}

}  // namespace cfcal::svg
