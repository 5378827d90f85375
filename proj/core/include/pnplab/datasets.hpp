#pragma once

#include <array>
#include <cstddef>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "pnplab/grid.hpp"
#include "pnplab/rng.hpp"

namespace pnp {

enum class DatasetKind { sine2d, gmm2d, movingdot };

std::string to_string(DatasetKind k);
DatasetKind parse_dataset_kind(const std::string& name);

using Point2 = std::array<double, 2>;

/// Points (x, A sin(w x) + noise) with x uniform on [x_min, x_max].
struct Sine2dParams {
    double x_min = -std::numbers::pi;
    double x_max = std::numbers::pi;
    double amplitude = 1.0;
    double frequency = 1.0;
    double noise = 0.02;

    friend bool operator==(const Sine2dParams&, const Sine2dParams&) = default;
};

/// Equal-weight isotropic Gaussian mixture.
struct Gmm2dParams {
    std::vector<Point2> centers = ring(8, 3.0);
    double sigma = 0.15;

    static std::vector<Point2> ring(std::size_t modes, double radius);

    friend bool operator==(const Gmm2dParams&, const Gmm2dParams&) = default;
};

/// A single anti-aliased disc moving at constant velocity, bouncing elastically off the borders.
struct MovingDotParams {
    std::size_t frames = 8;
    std::size_t height = 16;
    std::size_t width = 16;
    double radius = 1.5;
    double speed_min = 0.5;
    double speed_max = 1.5;
    double intensity = 1.0;
    /// Sub-samples per pixel edge used to estimate disc coverage.
    std::size_t supersample = 4;

    Shape shape() const { return {frames, height, width, 1}; }

    friend bool operator==(const MovingDotParams&, const MovingDotParams&) = default;
};

struct DatasetSpec {
    std::variant<Sine2dParams, Gmm2dParams, MovingDotParams> params;

    static DatasetSpec defaults(DatasetKind kind);

    DatasetKind kind() const;
    Shape sample_shape() const;
    /// Number of class labels the dataset produces (mixture modes for gmm2d, otherwise 0).
    std::size_t label_count() const;
    void validate() const;

    friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

/// Dot centre per frame as (x = column, y = row) in pixel coordinates.
using Trajectory = std::vector<Point2>;

struct DatasetBatch {
    Batch samples;
    /// Mixture component per sample (gmm2d) or -1.
    std::vector<int> labels;
    /// Ground-truth dot path per sample (movingdot only).
    std::vector<Trajectory> trajectories;
};

DatasetBatch sample_dataset(const DatasetSpec& spec, std::size_t n, RngStream& rng);

/// Constant-velocity path from `start` with reflection at [radius, size - 1 - radius].
Trajectory bouncing_trajectory(const MovingDotParams& p, Point2 start, Point2 velocity);
/// Renders one disc centred at `center` into a (1, h, w, 1) frame.
Grid render_frame(const MovingDotParams& p, Point2 center);
/// Renders a whole clip, one frame per trajectory entry.
Grid render_clip(const MovingDotParams& p, const Trajectory& path);

/// Pixel-mass centroid (x, y) of frame `f`, weighting by max(value, 0).
/// Throws UndefinedCentroidError when the frame has no positive mass.
Point2 frame_centroid(const Grid& video, std::size_t f);

/// Mean deviation of frame-to-frame centroid displacement from its average.
double temporal_jitter(const Grid& video);

/// Worst-case centroid error of the renderer, found by scanning sub-pixel disc positions.
double centroid_quantization_bound(const MovingDotParams& p, std::size_t positions_per_axis = 32);
/// Upper bound on temporal_jitter of a rendered constant-velocity clip: 2E f/(f-1).
double jitter_rendering_bound(const MovingDotParams& p);

/**
 * Ground truth of a synthetic dataset.
 *
 * sine2d keeps a dense polyline of the curve, gmm2d the mode centres,
 * movingdot the exact centre of the dot in every frame of one clip.
 */
class ManifoldOracle {
public:
    static ManifoldOracle for_dataset(const DatasetSpec& spec, std::size_t polyline_segments = 20000);
    static ManifoldOracle for_trajectory(const MovingDotParams& p, Trajectory path);

    DatasetKind kind() const { return kind_; }
    const DatasetSpec& spec() const { return spec_; }

    double distance(const Grid& sample) const;
    /// Point-sample overload for 2D datasets.
    double distance(Point2 p) const;

    /// Half of the longest polyline segment; the distance error bound for sine2d.
    double discretization_bound() const { return half_segment_; }

    const std::vector<Point2>& polyline() const { return polyline_; }
    const std::vector<Point2>& centers() const { return centers_; }
    const Trajectory& trajectory() const { return trajectory_; }
    double curve(double x) const;

    std::size_t nearest_mode(Point2 p) const;

private:
    DatasetKind kind_ = DatasetKind::sine2d;
    DatasetSpec spec_;
    std::vector<Point2> polyline_;
    double half_segment_ = 0.0;
    std::vector<Point2> centers_;
    Trajectory trajectory_;
};

double oracle_distance(const ManifoldOracle& oracle, const Grid& sample);

}  // namespace pnp
