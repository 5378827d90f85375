#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "pnplab/eval.hpp"
#include "pnplab/flow_matching.hpp"
#include "pnplab/json_io.hpp"
#include "pnplab/sampler.hpp"

namespace pnp::cli {

enum class Verbosity { quiet, info, debug };

/// Dataset, network and training recipe; also the checkpoint cache key.
struct ModelConfig {
    DatasetSpec dataset;
    NetArchitecture architecture;
    TrainConfig train;
    /// Use this checkpoint instead of training or the cache.
    std::optional<std::filesystem::path> checkpoint;

    Json to_json() const;
    /// Fingerprint of dataset, architecture and training recipe.
    std::string fingerprint() const;
};

struct EvalConfig {
    std::filesystem::path samples;
    std::optional<std::filesystem::path> baseline;
    std::optional<std::filesystem::path> trajectory;
    /// Concentration radius for gmm2d; defaults to 2 sigma.
    std::optional<double> radius;

    Json to_json() const;
};

/**
 * One JSON config document. Sections are optional; each command checks for
 * the ones it needs. Unknown keys anywhere are rejected with their path.
 */
struct RunConfig {
    std::optional<ModelConfig> model;
    std::optional<SamplerSettings> sampler;
    LogLevel log = LogLevel::none;
    std::optional<EvalConfig> eval;
    Verbosity verbosity = Verbosity::info;

    static RunConfig from_json(const Json& j);
    static RunConfig load(const std::filesystem::path& path);
    /// Canonical form written next to every run's outputs.
    Json to_json() const;

    const ModelConfig& require_model() const;
    const SamplerSettings& require_sampler() const;
    const EvalConfig& require_eval() const;
};

Schedule schedule_from_json(const Json& j, const std::string& path);
Json to_json(const Schedule& s);
SamplerSettings sampler_settings_from_json(const Json& j, const std::string& path, LogLevel* log = nullptr);
ModelConfig model_config_from_json(const Json& j);

std::string to_string(LogLevel l);
LogLevel parse_log_level(const std::string& name);
std::string to_string(Verbosity v);
Verbosity parse_verbosity(const std::string& name);

}  // namespace pnp::cli
