#pragma once

#include <string>
#include <vector>

#include "pnplab/datasets.hpp"
#include "pnplab/grid.hpp"

namespace pnp::cli {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

/// 2D point cloud over the dataset's ground truth (curve polyline or mode centres).
std::string scatter_svg(const std::string& title, const std::vector<Point2>& points, const ManifoldOracle& oracle);

/// Line plot with markers, one polyline per series.
std::string line_plot_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<Series>& series);

/**
 * Frames of a (f, h, w, 1) clip side by side as grey pixels; when `mask`
 * (same shape) is given, a second row shows the mask as a red overlay.
 */
std::string frame_strip_svg(const std::string& title, const Grid& clip, const Grid* mask = nullptr);

std::vector<Point2> batch_points(const Batch& b);

}  // namespace pnp::cli
