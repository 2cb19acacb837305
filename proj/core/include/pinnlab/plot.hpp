#pragma once

// Standalone SVG line and box plots. The plotted numbers are repeated in an
// XML comment at the top of each document.

#include <string>
#include <vector>

#include "pinnlab/sweep.hpp"

namespace pinnlab {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotLabels {
    std::string title;
    std::string x;
    std::string y;
};

/// Non-positive values are dropped when log_y is set.
[[nodiscard]] std::string line_plot_svg(const PlotLabels& labels, const std::vector<Series>& series,
                                        bool log_y = false);

[[nodiscard]] std::string box_plot_svg(const PlotLabels& labels, const std::vector<BoxStats>& boxes);

}  // namespace pinnlab
