#include "pnplab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "pnplab/errors.hpp"

namespace pnp {

std::string Shape::str() const {
    std::ostringstream os;
    os << '(' << frames << ',' << height << ',' << width << ',' << channels << ')';
    return os.str();
}

Grid::Grid(Shape shape, double fill) : shape_(shape), data_(shape.size(), fill) {}

Grid::Grid(Shape shape, std::vector<double> values) : shape_(shape), data_(std::move(values)) {
    if (data_.size() != shape_.size()) {
        throw ConfigError("grid data length " + std::to_string(data_.size()) + " does not match shape " +
                          shape_.str());
    }
}

bool Grid::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Batch::Batch(Shape sample_shape, std::size_t count, double fill)
    : shape_(sample_shape),
      data_(Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(sample_shape.size()),
                                      static_cast<Eigen::Index>(count), fill)) {}

Batch::Batch(Shape sample_shape, Eigen::MatrixXd columns) : shape_(sample_shape), data_(std::move(columns)) {
    if (static_cast<std::size_t>(data_.rows()) != shape_.size()) {
        throw ConfigError("batch rows " + std::to_string(data_.rows()) + " do not match sample shape " +
                          shape_.str());
    }
}

Batch Batch::from_grids(std::span<const Grid> grids) {
    if (grids.empty()) throw UsageError("cannot build a batch from zero grids");
    Batch b(grids.front().shape(), grids.size());
    for (std::size_t i = 0; i < grids.size(); ++i) b.set_sample(i, grids[i]);
    return b;
}

Batch Batch::from_point_grid(const Grid& points) {
    const Shape& s = points.shape();
    if (s.frames != 1 || s.height != 1) {
        throw ConfigError("point set grid must have shape (1,1,N,C), got " + s.str());
    }
    Batch b(Shape{1, 1, 1, s.channels}, s.width);
    for (std::size_t n = 0; n < s.width; ++n)
        for (std::size_t c = 0; c < s.channels; ++c)
            b.data_(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(n)) = points.at(0, 0, n, c);
    return b;
}

Grid Batch::sample(std::size_t i) const {
    std::vector<double> v(dim());
    const auto col = data_.col(static_cast<Eigen::Index>(i));
    std::copy(col.data(), col.data() + col.size(), v.begin());
    return Grid(shape_, std::move(v));
}

void Batch::set_sample(std::size_t i, const Grid& g) {
    require_same_shape(shape_, g.shape(), "Batch::set_sample");
    auto col = data_.col(static_cast<Eigen::Index>(i));
    std::copy(g.values().begin(), g.values().end(), col.data());
}

Grid Batch::to_point_grid() const {
    if (shape_.locations() != 1) {
        throw ConfigError("to_point_grid needs single-location samples, got " + shape_.str());
    }
    Grid g(Shape{1, 1, count(), shape_.channels});
    for (std::size_t n = 0; n < count(); ++n)
        for (std::size_t c = 0; c < shape_.channels; ++c)
            g.at(0, 0, n, c) = data_(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(n));
    return g;
}

Grid Batch::stacked() const {
    Shape s = shape_;
    s.frames *= count();
    std::vector<double> v(data_.data(), data_.data() + data_.size());
    return Grid(s, std::move(v));
}

void require_same_shape(const Shape& a, const Shape& b, const char* what) {
    if (!(a == b)) throw ConfigError(std::string(what) + ": shape mismatch " + a.str() + " vs " + b.str());
}

void require_finite(const Batch& b, const char* what) {
    if (!b.all_finite()) throw NumericError(std::string(what) + ": non-finite values");
}

}  // namespace pnp
