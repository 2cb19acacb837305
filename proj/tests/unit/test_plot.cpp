#include <sstream>
#include <string>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <gtest/gtest.h>

#include "pinnlab/plot.hpp"

using namespace pinnlab;
namespace pt = boost::property_tree;

namespace {

pt::ptree parse_xml(const std::string& svg) {
    std::istringstream in(svg);
    pt::ptree tree;
    pt::read_xml(in, tree);
    return tree;
}

std::size_t count_children(const pt::ptree& node, const std::string& tag) {
    std::size_t n = 0;
    for (const auto& [name, child] : node) {
        if (name == tag) ++n;
        n += count_children(child, tag);
    }
    return n;
}

}  // namespace

TEST(LinePlot, WellFormedWithOnePathPerSeries) {
    const std::vector<Series> series{{"total", {0, 100, 200}, {1.0, 0.1, 0.01}},
                                     {"mse_phys <&> \"odd\"", {0, 100, 200}, {0.5, 0.05, 0.0}}};
    const std::string svg = line_plot_svg({"loss -- curves", "step", "loss"}, series, true);
    pt::ptree tree;
    ASSERT_NO_THROW(tree = parse_xml(svg));
    EXPECT_EQ(tree.count("svg"), 1u);
    EXPECT_EQ(count_children(tree, "polyline") + count_children(tree, "path"), 2u);
    // The data table is echoed in a comment.
    EXPECT_NE(svg.find("<!--"), std::string::npos);
    EXPECT_NE(svg.find("0.01"), std::string::npos);
}

TEST(LinePlot, EmptyAndDegenerateInputs) {
    EXPECT_NO_THROW((void)parse_xml(line_plot_svg({"", "", ""}, {})));
    EXPECT_NO_THROW((void)parse_xml(line_plot_svg({"flat", "x", "y"}, {{"c", {1, 1}, {2, 2}}})));
    EXPECT_NO_THROW((void)parse_xml(line_plot_svg({"nonpositive", "x", "y"}, {{"c", {1, 2}, {0, -1}}}, true)));
}

TEST(BoxPlot, OneBoxPerGroup) {
    std::vector<BoxStats> boxes{{"50", 0.1, 0.2, 0.3, 0.4, 0.5, 5},
                                {"150", -3.0, -1.0, 0.2, 0.9, 0.99, 8},
                                {"1000", 0.7, 0.7, 0.7, 0.7, 0.7, 1}};
    const std::string svg = box_plot_svg({"R2 by collocation count", "C.P.", "R2_val"}, boxes);
    pt::ptree tree;
    ASSERT_NO_THROW(tree = parse_xml(svg));
    EXPECT_GE(count_children(tree, "rect"), 3u);
    for (const auto& b : boxes) EXPECT_NE(svg.find(">" + b.group + "<"), std::string::npos) << b.group;
    EXPECT_NO_THROW((void)parse_xml(box_plot_svg({"none", "", ""}, {})));
}
