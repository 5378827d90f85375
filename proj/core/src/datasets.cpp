#include "pnplab/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pnplab/errors.hpp"

namespace pnp {
namespace {

double reflect(double x, double lo, double hi) {
    const double span = hi - lo;
    if (span <= 0.0) return lo;
    double y = std::fmod(x - lo, 2.0 * span);
    if (y < 0.0) y += 2.0 * span;
    if (y > span) y = 2.0 * span - y;
    return lo + y;
}

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
    const double dx = b[0] - a[0];
    const double dy = b[1] - a[1];
    const double len2 = dx * dx + dy * dy;
    double u = len2 > 0.0 ? ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2 : 0.0;
    u = std::clamp(u, 0.0, 1.0);
    return std::hypot(p[0] - (a[0] + u * dx), p[1] - (a[1] + u * dy));
}

Point2 as_point(const Grid& g) {
    if (g.size() != 2) throw UsageError("expected a 2D point sample, got shape " + g.shape().str());
    return {g[0], g[1]};
}

}  // namespace

std::string to_string(DatasetKind k) {
    switch (k) {
        case DatasetKind::sine2d: return "sine2d";
        case DatasetKind::gmm2d: return "gmm2d";
        case DatasetKind::movingdot: return "movingdot";
    }
    return "unknown";
}

DatasetKind parse_dataset_kind(const std::string& name) {
    if (name == "sine2d") return DatasetKind::sine2d;
    if (name == "gmm2d") return DatasetKind::gmm2d;
    if (name == "movingdot") return DatasetKind::movingdot;
    throw ConfigError("unknown dataset kind '" + name + "'");
}

std::vector<Point2> Gmm2dParams::ring(std::size_t modes, double radius) {
    std::vector<Point2> c;
    for (std::size_t k = 0; k < modes; ++k) {
        const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(modes);
        c.push_back({radius * std::cos(a), radius * std::sin(a)});
    }
    return c;
}

DatasetSpec DatasetSpec::defaults(DatasetKind kind) {
    switch (kind) {
        case DatasetKind::sine2d: return {Sine2dParams{}};
        case DatasetKind::gmm2d: return {Gmm2dParams{}};
        case DatasetKind::movingdot: return {MovingDotParams{}};
    }
    throw ConfigError("unknown dataset kind");
}

DatasetKind DatasetSpec::kind() const { return static_cast<DatasetKind>(params.index()); }

Shape DatasetSpec::sample_shape() const {
    if (const auto* m = std::get_if<MovingDotParams>(&params)) return m->shape();
    return kPointShape;
}

std::size_t DatasetSpec::label_count() const {
    if (const auto* g = std::get_if<Gmm2dParams>(&params)) return g->centers.size();
    return 0;
}

void DatasetSpec::validate() const {
    if (const auto* s = std::get_if<Sine2dParams>(&params)) {
        if (!(s->x_max > s->x_min)) throw ConfigError("sine2d: x_max must exceed x_min");
        if (!(s->noise >= 0.0)) throw ConfigError("sine2d: noise must be >= 0");
        if (!std::isfinite(s->amplitude) || !std::isfinite(s->frequency))
            throw ConfigError("sine2d: amplitude and frequency must be finite");
    } else if (const auto* g = std::get_if<Gmm2dParams>(&params)) {
        if (g->centers.empty()) throw ConfigError("gmm2d: mode list is empty");
        if (!(g->sigma > 0.0)) throw ConfigError("gmm2d: sigma must be > 0");
    } else {
        const auto& m = std::get<MovingDotParams>(params);
        if (m.frames < 2 || m.height < 2 || m.width < 2) throw ConfigError("movingdot: f, h, w must be >= 2");
        if (!(m.radius > 0.0)) throw ConfigError("movingdot: radius must be > 0");
        if (2.0 * m.radius >= static_cast<double>(std::min(m.height, m.width)) - 1.0)
            throw ConfigError("movingdot: dot does not fit the frame");
        if (!(m.speed_min >= 0.0 && m.speed_max >= m.speed_min))
            throw ConfigError("movingdot: need 0 <= speed_min <= speed_max");
        if (!(m.intensity > 0.0 && m.intensity <= 1.0)) throw ConfigError("movingdot: intensity must be in (0, 1]");
        if (m.supersample == 0) throw ConfigError("movingdot: supersample must be >= 1");
    }
}

Trajectory bouncing_trajectory(const MovingDotParams& p, Point2 start, Point2 velocity) {
    const double lo = p.radius;
    const double hi_x = static_cast<double>(p.width) - 1.0 - p.radius;
    const double hi_y = static_cast<double>(p.height) - 1.0 - p.radius;
    Trajectory path(p.frames);
    for (std::size_t f = 0; f < p.frames; ++f) {
        const double s = static_cast<double>(f);
        path[f] = {reflect(start[0] + s * velocity[0], lo, hi_x), reflect(start[1] + s * velocity[1], lo, hi_y)};
    }
    return path;
}

Grid render_frame(const MovingDotParams& p, Point2 center) {
    Grid frame(Shape{1, p.height, p.width, 1});
    const std::size_t s = p.supersample;
    const double inv = 1.0 / static_cast<double>(s);
    const double r2 = p.radius * p.radius;
    // Only pixels whose square can touch the disc.
    const auto lo_row = static_cast<long>(std::floor(center[1] - p.radius - 1.0));
    const auto hi_row = static_cast<long>(std::ceil(center[1] + p.radius + 1.0));
    const auto lo_col = static_cast<long>(std::floor(center[0] - p.radius - 1.0));
    const auto hi_col = static_cast<long>(std::ceil(center[0] + p.radius + 1.0));
    for (long i = std::max(0L, lo_row); i <= std::min<long>(hi_row, static_cast<long>(p.height) - 1); ++i) {
        for (long j = std::max(0L, lo_col); j <= std::min<long>(hi_col, static_cast<long>(p.width) - 1); ++j) {
            std::size_t covered = 0;
            for (std::size_t a = 0; a < s; ++a) {
                const double y = static_cast<double>(i) - 0.5 + (static_cast<double>(a) + 0.5) * inv - center[1];
                for (std::size_t b = 0; b < s; ++b) {
                    const double x = static_cast<double>(j) - 0.5 + (static_cast<double>(b) + 0.5) * inv - center[0];
                    if (x * x + y * y <= r2) ++covered;
                }
            }
            frame.at(0, static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
                p.intensity * static_cast<double>(covered) / static_cast<double>(s * s);
        }
    }
    return frame;
}

Grid render_clip(const MovingDotParams& p, const Trajectory& path) {
    MovingDotParams shape = p;
    shape.frames = path.size();
    Grid clip(shape.shape());
    const std::size_t frame_size = p.height * p.width;
    for (std::size_t f = 0; f < path.size(); ++f) {
        const Grid frame = render_frame(p, path[f]);
        std::copy(frame.values().begin(), frame.values().end(), clip.values().begin() + static_cast<long>(f * frame_size));
    }
    return clip;
}

DatasetBatch sample_dataset(const DatasetSpec& spec, std::size_t n, RngStream& rng) {
    spec.validate();
    if (n == 0) throw ConfigError("sample_dataset: n must be >= 1");
    DatasetBatch out;
    out.samples = Batch(spec.sample_shape(), n);
    out.labels.assign(n, -1);
    auto& m = out.samples.matrix();

    if (const auto* s = std::get_if<Sine2dParams>(&spec.params)) {
        for (std::size_t i = 0; i < n; ++i) {
            const double x = rng.uniform(s->x_min, s->x_max);
            double y = s->amplitude * std::sin(s->frequency * x);
            if (s->noise > 0.0) y += s->noise * rng.normal();
            m(0, static_cast<Eigen::Index>(i)) = x;
            m(1, static_cast<Eigen::Index>(i)) = y;
        }
    } else if (const auto* g = std::get_if<Gmm2dParams>(&spec.params)) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto k = rng.index(g->centers.size());
            const double dx = rng.normal();
            const double dy = rng.normal();
            m(0, static_cast<Eigen::Index>(i)) = g->centers[k][0] + g->sigma * dx;
            m(1, static_cast<Eigen::Index>(i)) = g->centers[k][1] + g->sigma * dy;
            out.labels[i] = static_cast<int>(k);
        }
    } else {
        const auto& p = std::get<MovingDotParams>(spec.params);
        const double hi_x = static_cast<double>(p.width) - 1.0 - p.radius;
        const double hi_y = static_cast<double>(p.height) - 1.0 - p.radius;
        for (std::size_t i = 0; i < n; ++i) {
            const Point2 start{rng.uniform(p.radius, hi_x), rng.uniform(p.radius, hi_y)};
            const double speed = rng.uniform(p.speed_min, p.speed_max);
            const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
            Trajectory path = bouncing_trajectory(p, start, {speed * std::cos(angle), speed * std::sin(angle)});
            out.samples.set_sample(i, render_clip(p, path));
            out.trajectories.push_back(std::move(path));
        }
    }
    return out;
}

Point2 frame_centroid(const Grid& video, std::size_t f) {
    const Shape& s = video.shape();
    double mass = 0.0;
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < s.height; ++i) {
        for (std::size_t j = 0; j < s.width; ++j) {
            double w = 0.0;
            for (std::size_t c = 0; c < s.channels; ++c) w += std::max(video.at(f, i, j, c), 0.0);
            mass += w;
            mx += w * static_cast<double>(j);
            my += w * static_cast<double>(i);
        }
    }
    if (!(mass > 0.0)) throw UndefinedCentroidError("frame " + std::to_string(f) + " has no positive mass");
    return {mx / mass, my / mass};
}

double temporal_jitter(const Grid& video) {
    const std::size_t frames = video.shape().frames;
    if (frames < 2) throw UsageError("temporal_jitter: need at least 2 frames");
    std::vector<Point2> c(frames);
    for (std::size_t f = 0; f < frames; ++f) c[f] = frame_centroid(video, f);
    const double steps = static_cast<double>(frames - 1);
    const Point2 mean{(c.back()[0] - c.front()[0]) / steps, (c.back()[1] - c.front()[1]) / steps};
    double total = 0.0;
    for (std::size_t f = 0; f + 1 < frames; ++f) {
        total += std::hypot(c[f + 1][0] - c[f][0] - mean[0], c[f + 1][1] - c[f][1] - mean[1]);
    }
    return total / steps;
}

double centroid_quantization_bound(const MovingDotParams& p, std::size_t positions_per_axis) {
    const double cx = std::floor(static_cast<double>(p.width) / 2.0);
    const double cy = std::floor(static_cast<double>(p.height) / 2.0);
    double worst = 0.0;
    for (std::size_t a = 0; a < positions_per_axis; ++a) {
        for (std::size_t b = 0; b < positions_per_axis; ++b) {
            const Point2 center{cx + static_cast<double>(b) / static_cast<double>(positions_per_axis),
                                cy + static_cast<double>(a) / static_cast<double>(positions_per_axis)};
            const Point2 got = frame_centroid(render_frame(p, center), 0);
            worst = std::max(worst, std::hypot(got[0] - center[0], got[1] - center[1]));
        }
    }
    return worst;
}

double jitter_rendering_bound(const MovingDotParams& p) {
    const double f = static_cast<double>(p.frames);
    return 2.0 * centroid_quantization_bound(p) * f / (f - 1.0);
}

ManifoldOracle ManifoldOracle::for_dataset(const DatasetSpec& spec, std::size_t polyline_segments) {
    spec.validate();
    ManifoldOracle o;
    o.kind_ = spec.kind();
    o.spec_ = spec;
    if (const auto* s = std::get_if<Sine2dParams>(&spec.params)) {
        if (polyline_segments < 1) throw ConfigError("polyline needs at least one segment");
        o.polyline_.resize(polyline_segments + 1);
        for (std::size_t k = 0; k <= polyline_segments; ++k) {
            const double x = s->x_min + (s->x_max - s->x_min) * static_cast<double>(k) /
                                            static_cast<double>(polyline_segments);
            o.polyline_[k] = {x, s->amplitude * std::sin(s->frequency * x)};
        }
        for (std::size_t k = 0; k < polyline_segments; ++k) {
            const double len = std::hypot(o.polyline_[k + 1][0] - o.polyline_[k][0],
                                          o.polyline_[k + 1][1] - o.polyline_[k][1]);
            o.half_segment_ = std::max(o.half_segment_, 0.5 * len);
        }
    } else if (const auto* g = std::get_if<Gmm2dParams>(&spec.params)) {
        o.centers_ = g->centers;
    } else {
        throw UsageError("movingdot oracles are built per clip with for_trajectory");
    }
    return o;
}

ManifoldOracle ManifoldOracle::for_trajectory(const MovingDotParams& p, Trajectory path) {
    ManifoldOracle o;
    o.kind_ = DatasetKind::movingdot;
    o.spec_ = DatasetSpec{p};
    o.trajectory_ = std::move(path);
    return o;
}

double ManifoldOracle::curve(double x) const {
    const auto& s = std::get<Sine2dParams>(spec_.params);
    return s.amplitude * std::sin(s.frequency * x);
}

std::size_t ManifoldOracle::nearest_mode(Point2 p) const {
    if (centers_.empty()) throw UsageError("nearest_mode requires a gmm2d oracle");
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < centers_.size(); ++k) {
        const double d = std::hypot(p[0] - centers_[k][0], p[1] - centers_[k][1]);
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

double ManifoldOracle::distance(Point2 p) const {
    switch (kind_) {
        case DatasetKind::sine2d: {
            const std::size_t segs = polyline_.size() - 1;
            const double x0 = polyline_.front()[0];
            const double dx = (polyline_.back()[0] - x0) / static_cast<double>(segs);
            auto segment_of = [&](double x) {
                const double k = std::floor((x - x0) / dx);
                return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(segs - 1)));
            };
            const std::size_t home = segment_of(p[0]);
            double best = point_segment_distance(p, polyline_[home], polyline_[home + 1]);
            // Any closer segment must intersect the x-window [x - best, x + best].
            const std::size_t first = segment_of(p[0] - best);
            const std::size_t last = segment_of(p[0] + best);
            for (std::size_t k = first; k <= last; ++k)
                best = std::min(best, point_segment_distance(p, polyline_[k], polyline_[k + 1]));
            return best;
        }
        case DatasetKind::gmm2d: {
            const auto& c = centers_[nearest_mode(p)];
            return std::hypot(p[0] - c[0], p[1] - c[1]);
        }
        case DatasetKind::movingdot: break;
    }
    throw UsageError("point distance is not defined for movingdot oracles");
}

double ManifoldOracle::distance(const Grid& sample) const {
    if (kind_ != DatasetKind::movingdot) return distance(as_point(sample));
    const Shape& s = sample.shape();
    if (s.frames != trajectory_.size() || s.channels != 1)
        throw UsageError("movingdot sample shape " + s.str() + " does not match oracle trajectory");
    double total = 0.0;
    for (std::size_t f = 0; f < s.frames; ++f) {
        const Point2 c = frame_centroid(sample, f);
        total += std::hypot(c[0] - trajectory_[f][0], c[1] - trajectory_[f][1]);
    }
    return total / static_cast<double>(s.frames);
}

double oracle_distance(const ManifoldOracle& oracle, const Grid& sample) { return oracle.distance(sample); }

}  // namespace pnp
