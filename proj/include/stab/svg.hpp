#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace stab {

struct LineChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<double> x;
    std::vector<double> y;
    std::size_t marker_index = SIZE_MAX;  // highlighted point (e.g. the minimum)
    std::string marker_label;
};

std::string render_line_chart(const LineChart& chart);
void write_line_chart(const std::filesystem::path& path, const LineChart& chart);

}  // namespace stab
