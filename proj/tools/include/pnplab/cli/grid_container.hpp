#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pnplab/grid.hpp"
#include "pnplab/json_io.hpp"

namespace pnp::cli {

inline constexpr std::string_view kContainerMagic = "SRVGRID1\n";
inline constexpr int kContainerVersion = 1;

struct NamedGrid {
    std::string name;
    Grid grid;
};

/**
 * Several named grids in one file.
 *
 * Layout: magic "SRVGRID1\n", u64 little-endian manifest length, JSON
 * manifest {version, meta, grids: [{name, shape, offset, count}]}, then the
 * payload of little-endian doubles. Offsets are byte positions inside the
 * payload; grids are stored back to back in manifest order.
 */
struct GridContainer {
    Json meta = Json::object();
    std::vector<NamedGrid> grids;

    void add(std::string name, Grid grid);
    bool contains(std::string_view name) const;
    /// Throws LoadError when absent.
    const Grid& get(std::string_view name) const;
};

std::string encode_container(const GridContainer& c);
/// Throws LoadError on any structural problem (magic, version, offsets, payload size).
GridContainer decode_container(std::string_view bytes);

void save_container(const std::filesystem::path& path, const GridContainer& c);
GridContainer load_container(const std::filesystem::path& path);

/// All samples stacked along the frame axis, and back.
Grid batch_to_grid(const Batch& b);
Batch grid_to_batch(const Grid& g, const Shape& sample_shape);

}  // namespace pnp::cli
