#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pnplab/datasets.hpp"
#include "pnplab/flow_matching.hpp"
#include "pnplab/vector_field_net.hpp"

namespace pnp {

inline constexpr std::string_view kCheckpointMagic = "FMCKPT1\n";
inline constexpr std::uint32_t kCheckpointVersion = 1;

/**
 * Persisted trained network.
 *
 * Layout: magic "FMCKPT1\n", u64 little-endian header length, UTF-8 JSON
 * header (version, dataset, architecture, step, seed, p_drop, t_delta,
 * weight_count), then weight_count little-endian doubles in parameter
 * declaration order, each tensor row-major.
 */
struct Checkpoint {
    std::uint32_t version = kCheckpointVersion;
    DatasetSpec dataset;
    NetArchitecture architecture;
    std::vector<double> weights;
    std::uint64_t step = 0;
    std::uint64_t seed = 0;
    double p_drop = 0.0;
    double t_delta = TimeLaw{}.delta;

    friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

Checkpoint make_checkpoint(const VectorFieldNet& net, const DatasetSpec& dataset, const TrainConfig& config,
                           std::uint64_t step);
VectorFieldNet restore_net(const Checkpoint& ckpt);

std::string encode_checkpoint(const Checkpoint& ckpt);
/// Throws LoadError naming the offending field.
Checkpoint decode_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Little-endian helpers shared by the binary formats.
void append_u64_le(std::string& out, std::uint64_t v);
void append_f64_le(std::string& out, double v);
std::uint64_t read_u64_le(std::string_view bytes, std::size_t offset);
double read_f64_le(std::string_view bytes, std::size_t offset);

std::string read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::string_view bytes);

}  // namespace pnp
