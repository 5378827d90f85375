#include "pnplab/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <sstream>

#include "pnplab/errors.hpp"
#include "pnplab/json_io.hpp"

namespace pnp {

void append_u64_le(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void append_f64_le(std::string& out, double v) { append_u64_le(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t read_u64_le(std::string_view bytes, std::size_t offset) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[offset + static_cast<std::size_t>(i)]))
             << (8 * i);
    return v;
}

double read_f64_le(std::string_view bytes, std::size_t offset) {
    return std::bit_cast<double>(read_u64_le(bytes, offset));
}

std::string read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_bytes(const std::filesystem::path& path, std::string_view bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ConfigError("short write to " + path.string());
}

Checkpoint make_checkpoint(const VectorFieldNet& net, const DatasetSpec& dataset, const TrainConfig& config,
                           std::uint64_t step) {
    Checkpoint c;
    c.dataset = dataset;
    c.architecture = net.architecture();
    c.weights = net.flatten();
    c.step = step;
    c.seed = config.seed;
    c.p_drop = config.p_drop;
    c.t_delta = config.t_law.delta;
    return c;
}

VectorFieldNet restore_net(const Checkpoint& ckpt) {
    VectorFieldNet net(ckpt.architecture);
    net.assign(ckpt.weights);
    return net;
}

std::string encode_checkpoint(const Checkpoint& ckpt) {
    const Json header{{"version", ckpt.version},        {"dataset", to_json(ckpt.dataset)},
                      {"architecture", to_json(ckpt.architecture)},
                      {"step", ckpt.step},              {"seed", ckpt.seed},
                      {"p_drop", ckpt.p_drop},          {"t_delta", ckpt.t_delta},
                      {"weight_count", ckpt.weights.size()}};
    const std::string text = header.dump();
    std::string out(kCheckpointMagic);
    append_u64_le(out, text.size());
    out += text;
    out.reserve(out.size() + 8 * ckpt.weights.size());
    for (double w : ckpt.weights) append_f64_le(out, w);
    return out;
}

Checkpoint decode_checkpoint(std::string_view bytes) {
    if (bytes.size() < kCheckpointMagic.size() || bytes.substr(0, kCheckpointMagic.size()) != kCheckpointMagic)
        throw LoadError("checkpoint: bad magic");
    std::size_t pos = kCheckpointMagic.size();
    if (bytes.size() < pos + 8) throw LoadError("checkpoint: truncated header length");
    const std::uint64_t header_len = read_u64_le(bytes, pos);
    pos += 8;
    if (header_len > bytes.size() - pos) throw LoadError("checkpoint: truncated header");

    Json header;
    try {
        header = Json::parse(bytes.substr(pos, header_len));
    } catch (const nlohmann::json::exception& e) {
        throw LoadError(std::string("checkpoint: header is not valid JSON: ") + e.what());
    }
    pos += header_len;

    Checkpoint c;
    try {
        JsonObjectReader r(header, "header");
        c.version = r.get<std::uint32_t>("version");
        if (c.version != kCheckpointVersion)
            throw LoadError("checkpoint: unsupported version " + std::to_string(c.version));
        c.dataset = dataset_spec_from_json(r.raw("dataset"), "header.dataset");
        c.architecture = architecture_from_json(r.raw("architecture"), "header.architecture");
        c.step = r.get<std::uint64_t>("step");
        c.seed = r.get<std::uint64_t>("seed");
        c.p_drop = r.get<double>("p_drop");
        c.t_delta = r.get<double>("t_delta");
        const auto count = r.get<std::uint64_t>("weight_count");
        r.finish();

        const std::size_t payload = bytes.size() - pos;
        if (payload % 8 != 0 || payload / 8 != count) {
            throw LoadError("checkpoint: weight_count " + std::to_string(count) + " does not match payload of " +
                            std::to_string(payload) + " bytes");
        }
        if (count != VectorFieldNet(c.architecture).parameter_count())
            throw LoadError("checkpoint: weights do not match the architecture's parameter count");
        c.weights.resize(count);
        for (std::size_t i = 0; i < count; ++i) c.weights[i] = read_f64_le(bytes, pos + 8 * i);
    } catch (const ConfigError& e) {
        throw LoadError(std::string("checkpoint: ") + e.what());
    }
    return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    write_file_bytes(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file_bytes(path)); }

}  // namespace pnp
