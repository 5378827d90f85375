#include "pnplab/eval.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "pnplab/errors.hpp"

namespace pnp {
namespace {

void require_runs(std::span<const SeedSamples> runs, const char* what) {
    if (runs.empty()) throw UsageError(std::string(what) + ": no runs");
}

Point2 point_of(const Batch& b, std::size_t j) {
    return {b.matrix()(0, static_cast<Eigen::Index>(j)), b.matrix()(1, static_cast<Eigen::Index>(j))};
}

}  // namespace

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

MetricReport MetricReport::from_values(std::string metric, std::string fingerprint, std::vector<std::uint64_t> seeds,
                                       std::vector<double> values, std::size_t sample_count) {
    MetricReport r{std::move(metric), std::move(fingerprint), std::move(seeds), std::move(values), sample_count};
    if (r.values.empty()) return r;
    double sum = 0.0;
    for (double v : r.values) sum += v;
    r.mean = sum / static_cast<double>(r.values.size());
    if (r.values.size() > 1 && std::isfinite(r.mean)) {
        double ss = 0.0;
        for (double v : r.values) ss += (v - r.mean) * (v - r.mean);
        r.stddev = std::sqrt(ss / static_cast<double>(r.values.size() - 1));
    }
    return r;
}

MetricReport manifold_metric(std::span<const SeedSamples> runs, const ManifoldOracle& oracle,
                             const std::string& fingerprint) {
    require_runs(runs, "manifold_metric");
    std::vector<std::uint64_t> seeds;
    std::vector<double> values;
    std::size_t total = 0;
    for (const auto& run : runs) {
        if (!(run.samples.sample_shape() == oracle.spec().sample_shape()) && oracle.kind() != DatasetKind::movingdot)
            throw UsageError("manifold_metric: samples do not match the oracle's dataset kind");
        double sum = 0.0;
        for (std::size_t j = 0; j < run.samples.count(); ++j) sum += oracle.distance(run.samples.sample(j));
        seeds.push_back(run.seed);
        values.push_back(sum / static_cast<double>(run.samples.count()));
        total += run.samples.count();
    }
    return MetricReport::from_values("manifold_distance", fingerprint, std::move(seeds), std::move(values), total);
}

ConcentrationReport mode_concentration(std::span<const SeedSamples> runs, const ManifoldOracle& oracle, double radius,
                                       const std::string& fingerprint) {
    require_runs(runs, "mode_concentration");
    if (!(radius > 0.0)) throw UsageError("mode_concentration: radius must be > 0");
    if (oracle.kind() != DatasetKind::gmm2d) throw UsageError("mode_concentration: needs a gmm2d oracle");
    std::vector<std::uint64_t> seeds;
    std::vector<double> fractions;
    std::vector<double> entropies;
    std::size_t total = 0;
    for (const auto& run : runs) {
        require_same_shape(run.samples.sample_shape(), kPointShape, "mode_concentration");
        std::vector<std::size_t> hist(oracle.centers().size(), 0);
        std::size_t inside = 0;
        const std::size_t n = run.samples.count();
        for (std::size_t j = 0; j < n; ++j) {
            const Point2 p = point_of(run.samples, j);
            const std::size_t k = oracle.nearest_mode(p);
            ++hist[k];
            if (std::hypot(p[0] - oracle.centers()[k][0], p[1] - oracle.centers()[k][1]) <= radius) ++inside;
        }
        double h = 0.0;
        for (std::size_t c : hist) {
            if (c == 0) continue;
            const double q = static_cast<double>(c) / static_cast<double>(n);
            h -= q * std::log(q);
        }
        seeds.push_back(run.seed);
        fractions.push_back(static_cast<double>(inside) / static_cast<double>(n));
        entropies.push_back(h);
        total += n;
    }
    return {MetricReport::from_values("mode_fraction", fingerprint, seeds, std::move(fractions), total),
            MetricReport::from_values("mode_entropy", fingerprint, seeds, std::move(entropies), total)};
}

JitterReport jitter_metric(std::span<const SeedSamples> runs, const MovingDotParams& params,
                           const std::string& fingerprint) {
    require_runs(runs, "jitter_metric");
    JitterReport out;
    std::vector<std::uint64_t> seeds;
    std::vector<double> values;
    std::size_t total = 0;
    for (const auto& run : runs) {
        require_same_shape(run.samples.sample_shape(), params.shape(), "jitter_metric");
        double sum = 0.0;
        std::size_t used = 0;
        for (std::size_t j = 0; j < run.samples.count(); ++j) {
            try {
                sum += temporal_jitter(run.samples.sample(j));
                ++used;
            } catch (const UndefinedCentroidError&) {
                ++out.excluded;
            }
        }
        seeds.push_back(run.seed);
        values.push_back(used ? sum / static_cast<double>(used) : std::numeric_limits<double>::quiet_NaN());
        total += used;
    }
    out.jitter = MetricReport::from_values("temporal_jitter", fingerprint, std::move(seeds), std::move(values), total);
    return out;
}

Grid trajectory_tube(const Grid& clip, double radius) {
    const Shape& s = clip.shape();
    Grid tube(s.single_channel());
    for (std::size_t f = 0; f < s.frames; ++f) {
        const Point2 c = frame_centroid(clip, f);
        for (std::size_t i = 0; i < s.height; ++i)
            for (std::size_t j = 0; j < s.width; ++j)
                if (std::hypot(static_cast<double>(j) - c[0], static_cast<double>(i) - c[1]) <= radius + 1.0)
                    tube.at(f, i, j) = 1.0;
    }
    return tube;
}

MetricReport mask_localization(std::span<const LocalizationInput> inputs, const MovingDotParams& params,
                               const std::string& fingerprint) {
    if (inputs.empty()) throw UsageError("mask_localization: empty mask log");
    std::vector<std::uint64_t> seeds;
    std::vector<double> values;
    std::size_t total = 0;
    for (const auto& in : inputs) {
        if (in.mask.count() == 0) throw UsageError("mask_localization: empty mask log");
        require_same_shape(in.mask.sample_shape(), params.shape(), "mask_localization mask");
        require_same_shape(in.clips.sample_shape(), params.shape(), "mask_localization clips");
        if (in.mask.count() != in.clips.count()) throw UsageError("mask_localization: mask and clip counts differ");
        double in_sum = 0.0, out_sum = 0.0;
        std::size_t in_n = 0, out_n = 0;
        for (std::size_t j = 0; j < in.clips.count(); ++j) {
            Grid tube;
            try {
                tube = trajectory_tube(in.clips.sample(j), params.radius);
            } catch (const UndefinedCentroidError&) {
                continue;
            }
            ++total;
            const auto mask = in.mask.matrix().col(static_cast<Eigen::Index>(j));
            for (std::size_t p = 0; p < tube.size(); ++p) {
                if (tube[p] == 1.0) {
                    in_sum += mask(static_cast<Eigen::Index>(p));
                    ++in_n;
                } else {
                    out_sum += mask(static_cast<Eigen::Index>(p));
                    ++out_n;
                }
            }
        }
        const double in_mean = in_n ? in_sum / static_cast<double>(in_n) : 0.0;
        const double out_mean = out_n ? out_sum / static_cast<double>(out_n) : 0.0;
        double ratio = 1.0;
        if (out_mean > 0.0)
            ratio = in_mean / out_mean;
        else if (in_mean > 0.0)
            ratio = std::numeric_limits<double>::infinity();
        seeds.push_back(in.seed);
        values.push_back(ratio);
    }
    return MetricReport::from_values("mask_localization", fingerprint, std::move(seeds), std::move(values), total);
}

Json SamplerSettings::to_json() const {
    Json j;
    j["schedule"] = schedule.timesteps();
    j["plan"] = plan.str();
    j["tau"] = format_double(tau);
    j["cfg"] = {{"enabled", cfg.enabled}, {"scale", cfg.scale}, {"cond", cfg.cond}};
    j["n"] = n;
    j["seeds"] = seeds;
    j["nfe_counting"] = pnp::to_string(counting);
    return j;
}

std::string to_string(AblationAxis a) {
    switch (a) {
        case AblationAxis::iterations: return "K_f";
        case AblationAxis::tau: return "tau";
        case AblationAxis::coverage: return "alpha";
        case AblationAxis::cfg_scale: return "cfg_scale";
    }
    return "unknown";
}

AblationAxis parse_ablation_axis(const std::string& name) {
    if (name == "K_f" || name == "iterations") return AblationAxis::iterations;
    if (name == "tau") return AblationAxis::tau;
    if (name == "alpha" || name == "coverage") return AblationAxis::coverage;
    if (name == "cfg_scale") return AblationAxis::cfg_scale;
    throw ConfigError("unknown ablation axis '" + name + "'");
}

SamplerSettings apply_axis(AblationAxis axis, double value, SamplerSettings base) {
    switch (axis) {
        case AblationAxis::iterations: {
            if (!(value >= 0.0) || value != std::floor(value)) throw ConfigError("K_f values must be whole numbers >= 0");
            base.plan = base.plan.with_iterations(static_cast<std::size_t>(value));
            break;
        }
        case AblationAxis::tau: base.tau = value; break;
        case AblationAxis::coverage: {
            std::size_t first = 3;
            std::size_t k = 3;
            if (!base.plan.empty()) {
                first = base.plan.ranges().front().first;
                k = base.plan.ranges().front().iterations;
            }
            base.plan = PnPPlan::early(base.schedule.steps(), first, value, k);
            break;
        }
        case AblationAxis::cfg_scale:
            base.cfg.enabled = true;
            base.cfg.scale = value;
            break;
    }
    return base;
}

AblationGrid run_ablation(AblationAxis axis, std::span<const double> values, const SamplerSettings& base,
                          const CellRunner& runner) {
    if (values.empty()) throw UsageError("run_ablation: no axis values");
    AblationGrid grid;
    grid.axis = axis;
    for (double v : values) {
        AblationCell cell;
        cell.value = v;
        try {
            cell.report = runner(apply_axis(axis, v, base));
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
        grid.cells.push_back(std::move(cell));
    }
    return grid;
}

std::string metrics_csv(std::span<const MetricReport> reports) {
    std::ostringstream os;
    os << kMetricsSchema << "\nfingerprint,seed,metric,value\n";
    for (const auto& r : reports)
        for (std::size_t i = 0; i < r.values.size(); ++i)
            os << r.fingerprint << ',' << r.seeds[i] << ',' << r.metric << ',' << format_double(r.values[i]) << '\n';
    return os.str();
}

std::vector<MetricRow> parse_metrics_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != kMetricsSchema)
        throw LoadError("metrics CSV: unsupported or missing schema line");
    if (!std::getline(is, line) || line != "fingerprint,seed,metric,value")
        throw LoadError("metrics CSV: unexpected header");
    std::vector<MetricRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cols.push_back(cell);
        if (cols.size() != 4) throw LoadError("metrics CSV: malformed row '" + line + "'");
        MetricRow row;
        row.fingerprint = cols[0];
        try {
            row.seed = std::stoull(cols[1]);
            row.value = cols[3] == "inf" ? std::numeric_limits<double>::infinity() : std::stod(cols[3]);
        } catch (const std::exception&) {
            throw LoadError("metrics CSV: malformed number in '" + line + "'");
        }
        row.metric = cols[2];
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string ablation_csv(const AblationGrid& grid) {
    std::ostringstream os;
    os << kAblationSchema << "\naxis,axis_value,fingerprint,seed,metric,value,error\n";
    for (const auto& cell : grid.cells) {
        if (!cell.report) {
            std::string err = cell.error;
            for (char& c : err)
                if (c == ',' || c == '\n') c = ';';
            os << to_string(grid.axis) << ',' << format_double(cell.value) << ",,,,," << err << '\n';
            continue;
        }
        const auto& r = *cell.report;
        for (std::size_t i = 0; i < r.values.size(); ++i)
            os << to_string(grid.axis) << ',' << format_double(cell.value) << ',' << r.fingerprint << ',' << r.seeds[i]
               << ',' << r.metric << ',' << format_double(r.values[i]) << ",\n";
    }
    return os.str();
}

}  // namespace pnp
