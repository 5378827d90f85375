#include "pnplab/cli/grid_container.hpp"

#include <algorithm>

#include "pnplab/checkpoint.hpp"
#include "pnplab/errors.hpp"

namespace pnp::cli {

void GridContainer::add(std::string name, Grid grid) {
    if (contains(name)) throw UsageError("grid container already holds '" + name + "'");
    grids.push_back({std::move(name), std::move(grid)});
}

bool GridContainer::contains(std::string_view name) const {
    return std::any_of(grids.begin(), grids.end(), [&](const NamedGrid& g) { return g.name == name; });
}

const Grid& GridContainer::get(std::string_view name) const {
    for (const auto& g : grids)
        if (g.name == name) return g.grid;
    throw LoadError("grid container has no grid named '" + std::string(name) + "'");
}

std::string encode_container(const GridContainer& c) {
    Json entries = Json::array();
    std::size_t offset = 0;
    for (const auto& g : c.grids) {
        const Shape& s = g.grid.shape();
        entries.push_back({{"name", g.name},
                           {"shape", {s.frames, s.height, s.width, s.channels}},
                           {"offset", offset},
                           {"count", g.grid.size()}});
        offset += 8 * g.grid.size();
    }
    const Json manifest{{"version", kContainerVersion}, {"meta", c.meta}, {"grids", entries}};
    const std::string text = manifest.dump();
    std::string out(kContainerMagic);
    append_u64_le(out, text.size());
    out += text;
    out.reserve(out.size() + offset);
    for (const auto& g : c.grids)
        for (double v : g.grid.values()) append_f64_le(out, v);
    return out;
}

GridContainer decode_container(std::string_view bytes) {
    const std::size_t head = kContainerMagic.size();
    if (bytes.size() < head + 8 || bytes.substr(0, head) != kContainerMagic)
        throw LoadError("grid container: bad magic");
    const std::uint64_t len = read_u64_le(bytes, head);
    if (len > bytes.size() - head - 8) throw LoadError("grid container: manifest length exceeds file size");
    Json manifest;
    try {
        manifest = Json::parse(bytes.substr(head + 8, len));
    } catch (const Json::exception& e) {
        throw LoadError(std::string("grid container: manifest is not JSON: ") + e.what());
    }
    const std::string_view payload = bytes.substr(head + 8 + len);

    GridContainer c;
    try {
        if (manifest.at("version").get<int>() != kContainerVersion)
            throw LoadError("grid container: unsupported version " + manifest.at("version").dump());
        c.meta = manifest.at("meta");
        std::size_t expected = 0;
        for (const Json& e : manifest.at("grids")) {
            const auto dims = e.at("shape").get<std::vector<std::size_t>>();
            if (dims.size() != 4) throw LoadError("grid container: shape must have 4 entries");
            const Shape shape{dims[0], dims[1], dims[2], dims[3]};
            const auto offset = e.at("offset").get<std::size_t>();
            const auto count = e.at("count").get<std::size_t>();
            if (count != shape.size()) throw LoadError("grid container: count disagrees with shape");
            if (offset != expected) throw LoadError("grid container: offsets overlap or leave gaps");
            if (offset + 8 * count > payload.size()) throw LoadError("grid container: payload truncated");
            Grid g(shape);
            for (std::size_t i = 0; i < count; ++i) g[i] = read_f64_le(payload, offset + 8 * i);
            c.add(e.at("name").get<std::string>(), std::move(g));
            expected = offset + 8 * count;
        }
        if (expected != payload.size()) throw LoadError("grid container: trailing bytes after payload");
    } catch (const Json::exception& e) {
        throw LoadError(std::string("grid container: malformed manifest: ") + e.what());
    } catch (const UsageError& e) {
        throw LoadError(std::string("grid container: ") + e.what());
    }
    return c;
}

void save_container(const std::filesystem::path& path, const GridContainer& c) {
    write_file_bytes(path, encode_container(c));
}

GridContainer load_container(const std::filesystem::path& path) {
    try {
        return decode_container(read_file_bytes(path));
    } catch (const LoadError& e) {
        throw LoadError(path.string() + ": " + e.what());
    }
}

Grid batch_to_grid(const Batch& b) { return b.stacked(); }

Batch grid_to_batch(const Grid& g, const Shape& sample_shape) {
    const Shape& s = g.shape();
    const Shape per{1, s.height, s.width, s.channels};
    if (sample_shape.frames == 0 || s.frames % sample_shape.frames != 0 ||
        !(Shape{1, sample_shape.height, sample_shape.width, sample_shape.channels} == per))
        throw LoadError("grid of shape " + s.str() + " does not hold samples of shape " + sample_shape.str());
    const std::size_t count = s.frames / sample_shape.frames;
    Eigen::MatrixXd m(static_cast<Eigen::Index>(sample_shape.size()), static_cast<Eigen::Index>(count));
    std::copy(g.values().begin(), g.values().end(), m.data());
    return Batch(sample_shape, std::move(m));
}

}  // namespace pnp::cli
