#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pnp {

/// Extent of a spatio-temporal array: frames x height x width x channels.
struct Shape {
    std::size_t frames = 1;
    std::size_t height = 1;
    std::size_t width = 1;
    std::size_t channels = 1;

    std::size_t size() const { return frames * height * width * channels; }
    /// Number of spatio-temporal locations (everything except channels).
    std::size_t locations() const { return frames * height * width; }
    /// Same extent with a single channel; the shape of masks and uncertainty maps.
    Shape single_channel() const { return {frames, height, width, 1}; }
    std::string str() const;

    friend bool operator==(const Shape&, const Shape&) = default;
};

/// Shape of a single 2D point.
inline constexpr Shape kPointShape{1, 1, 1, 2};

/// Dense row-major (f, h, w, c) array of doubles.
class Grid {
public:
    Grid() = default;
    explicit Grid(Shape shape, double fill = 0.0);
    Grid(Shape shape, std::vector<double> values);

    const Shape& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }

    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::size_t offset(std::size_t f, std::size_t h, std::size_t w, std::size_t c) const {
        return ((f * shape_.height + h) * shape_.width + w) * shape_.channels + c;
    }
    double& at(std::size_t f, std::size_t h, std::size_t w, std::size_t c = 0) { return data_[offset(f, h, w, c)]; }
    double at(std::size_t f, std::size_t h, std::size_t w, std::size_t c = 0) const { return data_[offset(f, h, w, c)]; }

    bool all_finite() const;

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    Shape shape_{0, 0, 0, 0};
    std::vector<double> data_;
};

/**
 * A set of equally-shaped grids stored as one column per sample.
 *
 * Column j holds sample j flattened in Grid order, so a batch can go
 * straight through matrix products. A batch of N points (sample shape
 * (1,1,1,2)) is interchangeable with a point-set Grid of shape (1,1,N,2).
 */
class Batch {
public:
    Batch() = default;
    Batch(Shape sample_shape, std::size_t count, double fill = 0.0);
    Batch(Shape sample_shape, Eigen::MatrixXd columns);

    static Batch from_grids(std::span<const Grid> grids);
    /// Splits a (1,1,N,C) point set into N samples of shape (1,1,1,C).
    static Batch from_point_grid(const Grid& points);

    const Shape& sample_shape() const { return shape_; }
    std::size_t count() const { return static_cast<std::size_t>(data_.cols()); }
    std::size_t dim() const { return static_cast<std::size_t>(data_.rows()); }

    Eigen::MatrixXd& matrix() { return data_; }
    const Eigen::MatrixXd& matrix() const { return data_; }

    Grid sample(std::size_t i) const;
    void set_sample(std::size_t i, const Grid& g);
    /// Inverse of from_point_grid; requires a single-location sample shape.
    Grid to_point_grid() const;
    /// All samples stacked along the frame axis: shape (count*f, h, w, c).
    Grid stacked() const;

    bool all_finite() const { return data_.allFinite(); }

    friend bool operator==(const Batch& a, const Batch& b) {
        return a.shape_ == b.shape_ && a.data_.rows() == b.data_.rows() && a.data_.cols() == b.data_.cols() &&
               a.data_ == b.data_;
    }

private:
    Shape shape_{0, 0, 0, 0};
    Eigen::MatrixXd data_;
};

/// Throws ConfigError naming `what` when the two shapes differ.
void require_same_shape(const Shape& a, const Shape& b, const char* what);
/// Throws NumericError naming `what` if any entry is NaN or infinite.
void require_finite(const Batch& b, const char* what);

}  // namespace pnp
