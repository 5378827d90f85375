#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pnplab/cli/grid_container.hpp"
#include "pnplab/cli/run_config.hpp"
#include "pnplab/eval.hpp"
#include "pnplab/sampler.hpp"

namespace pnp::cli {

/// Where a command writes, where checkpoints are cached, and how chatty it is.
struct Context {
    std::filesystem::path out;
    std::filesystem::path cache_dir;
    std::size_t jobs = 1;
    Verbosity verbosity = Verbosity::info;
    std::ostream* log = nullptr;

    void info(const std::string& line) const;
    void debug(const std::string& line) const;
};

/// Output root: $PNPLAB_OUTPUT_ROOT when set, else "pnplab-out".
std::filesystem::path default_output_root();

/// Runs fn(0..n-1) on up to `jobs` threads; rethrows the first failure.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn);

inline constexpr std::uint64_t kInitTag = ~std::uint64_t{0} - 1;

/// Network initialisation derived from the training seed.
VectorFieldNet initial_net(const NetArchitecture& arch, std::uint64_t seed);

struct TrainedModel {
    VectorFieldNet net;
    std::vector<double> losses;  ///< empty when loaded
    bool loaded = false;
    std::filesystem::path source;
};

TrainedModel train_model(const ModelConfig& m, const Context& ctx);
/// Explicit checkpoint, else the cache entry for m.fingerprint(), else a fresh training run stored in the cache.
TrainedModel obtain_model(const ModelConfig& m, const Context& ctx);
std::filesystem::path cache_path(const ModelConfig& m, const Context& ctx);

/// One sampling run per seed, in seed order.
std::vector<SampleRun> sample_seeds(const VectorFieldNet& net, const SamplerSettings& s, LogLevel log, std::size_t jobs);

std::string seed_grid_name(std::uint64_t seed);

GridContainer samples_container(const DatasetSpec& dataset, const SamplerSettings& s, const std::vector<SampleRun>& runs);
GridContainer trajectory_container(const DatasetSpec& dataset, const SamplerSettings& s, const std::vector<SampleRun>& runs);

/// Samples per seed back out of a samples container, plus the dataset it was drawn for.
struct LoadedSamples {
    DatasetSpec dataset;
    std::string fingerprint;
    std::vector<SeedSamples> runs;
};
LoadedSamples read_samples(const GridContainer& c);

/// Accumulated mask of the first planned step for each seed of a trajectory container.
std::vector<LocalizationInput> localization_inputs(const GridContainer& trajectory, const LoadedSamples& samples);

/**
 * Metrics that apply to the dataset kind: manifold distance (2D kinds), mode
 * fraction and entropy (gmm2d), temporal jitter (movingdot) and, when
 * localisation inputs are given, mask localisation.
 */
std::vector<MetricReport> evaluate_runs(const DatasetSpec& dataset, const std::vector<SeedSamples>& runs,
                                        const std::string& fingerprint, std::optional<double> radius = {},
                                        const std::vector<LocalizationInput>& localization = {});

inline constexpr std::string_view kPairedSchema = "# schema: pnplab.paired.v1";
inline constexpr std::string_view kLossSchema = "# schema: pnplab.loss.v1";
inline constexpr std::string_view kNfeSchema = "# schema: pnplab.nfe.v1";

/// Per-seed candidate minus baseline for every metric both sides report, plus a "mean" row.
std::string paired_csv(const std::vector<MetricReport>& baseline, const std::vector<MetricReport>& candidate);
std::string loss_csv(const std::vector<double>& losses);
std::string nfe_csv(const SamplerSettings& s, const std::vector<SampleRun>& runs);

void write_text(const std::filesystem::path& path, const std::string& text);
/// Pretty-printed JSON with a trailing newline.
void write_json(const std::filesystem::path& path, const Json& j);

}  // namespace pnp::cli
