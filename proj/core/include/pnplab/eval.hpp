#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pnplab/datasets.hpp"
#include "pnplab/json_io.hpp"
#include "pnplab/sampler.hpp"

namespace pnp {

/// Per-seed values of one metric and their summary.
struct MetricReport {
    std::string metric;
    std::string fingerprint;
    std::vector<std::uint64_t> seeds;
    std::vector<double> values;
    std::size_t sample_count = 0;
    double mean = 0.0;
    /// Sample standard deviation across seeds (0 for a single seed).
    double stddev = 0.0;

    static MetricReport from_values(std::string metric, std::string fingerprint, std::vector<std::uint64_t> seeds,
                                    std::vector<double> values, std::size_t sample_count);
};

/// Final samples of one seeded run.
struct SeedSamples {
    std::uint64_t seed = 0;
    Batch samples;
};

/// Mean oracle distance of the samples, per seed.
MetricReport manifold_metric(std::span<const SeedSamples> runs, const ManifoldOracle& oracle,
                             const std::string& fingerprint = {});

struct ConcentrationReport {
    MetricReport fraction;  ///< share of samples within `radius` of their nearest mode
    MetricReport entropy;   ///< natural-log entropy of the nearest-mode histogram
};

ConcentrationReport mode_concentration(std::span<const SeedSamples> runs, const ManifoldOracle& oracle, double radius,
                                       const std::string& fingerprint = {});

struct JitterReport {
    MetricReport jitter;
    /// Clips skipped because some frame had no positive mass.
    std::size_t excluded = 0;
};

JitterReport jitter_metric(std::span<const SeedSamples> runs, const MovingDotParams& params,
                           const std::string& fingerprint = {});

/// Accumulated mask of the first planned P&P step together with the clips it produced.
struct LocalizationInput {
    std::uint64_t seed = 0;
    Batch mask;
    Batch clips;
};

/// Pixels within radius + 1 of the clip's per-frame centroid, as a (f, h, w, 1) 0/1 grid.
Grid trajectory_tube(const Grid& clip, double radius);

/**
 * Mean mask value inside the dilated dot tube divided by the mean outside it.
 * Outside mean 0 with positive inside mean gives +infinity; 0/0 gives 1.
 */
MetricReport mask_localization(std::span<const LocalizationInput> inputs, const MovingDotParams& params,
                               const std::string& fingerprint = {});

/// Everything that distinguishes one sampling configuration from another.
struct SamplerSettings {
    Schedule schedule = Schedule::uniform(50);
    PnPPlan plan;
    double tau = -1.0;
    CfgSpec cfg;
    std::size_t n = 1;
    std::vector<std::uint64_t> seeds{0};
    NfeCounting counting = NfeCounting::per_call;

    Json to_json() const;
    std::string fingerprint() const { return fingerprint_of(to_json()); }
};

enum class AblationAxis { iterations, tau, coverage, cfg_scale };

std::string to_string(AblationAxis a);
AblationAxis parse_ablation_axis(const std::string& name);

/// `base` with one axis overridden. Coverage keeps the base plan's first step and K.
SamplerSettings apply_axis(AblationAxis axis, double value, SamplerSettings base);

struct AblationCell {
    double value = 0.0;
    std::optional<MetricReport> report;
    std::string error;
};

struct AblationGrid {
    AblationAxis axis = AblationAxis::iterations;
    std::vector<AblationCell> cells;
};

using CellRunner = std::function<MetricReport(const SamplerSettings&)>;

/// Runs one cell per value; a failing cell keeps its error message and leaves a gap.
AblationGrid run_ablation(AblationAxis axis, std::span<const double> values, const SamplerSettings& base,
                          const CellRunner& runner);

inline constexpr std::string_view kMetricsSchema = "# schema: pnplab.metrics.v1";
inline constexpr std::string_view kAblationSchema = "# schema: pnplab.ablation.v1";

struct MetricRow {
    std::string fingerprint;
    std::uint64_t seed = 0;
    std::string metric;
    double value = 0.0;
};

/// Schema line, then "fingerprint,seed,metric,value" and one row per seed.
std::string metrics_csv(std::span<const MetricReport> reports);
/// Rejects files whose schema line is missing or of another version.
std::vector<MetricRow> parse_metrics_csv(const std::string& text);

/// Schema line, then "axis,axis_value,fingerprint,seed,metric,value,error".
std::string ablation_csv(const AblationGrid& grid);

/// Shortest decimal text that round-trips the double.
std::string format_double(double v);

}  // namespace pnp
