#include "pnplab/json_io.hpp"

#include <cstdint>

namespace pnp {

JsonObjectReader::JsonObjectReader(const Json& object, std::string path) : object_(object), path_(std::move(path)) {
    if (!object_.is_object()) throw ConfigError((path_.empty() ? std::string("config") : path_) + ": expected an object");
}

const Json& JsonObjectReader::raw(const std::string& key) {
    seen_.insert(key);
    const auto it = object_.find(key);
    if (it == object_.end()) throw ConfigError(key_path(key) + ": missing required key");
    return *it;
}

JsonObjectReader JsonObjectReader::child(const std::string& key) { return JsonObjectReader(raw(key), key_path(key)); }

void JsonObjectReader::finish() const {
    for (const auto& item : object_.items()) {
        if (!seen_.contains(item.key())) throw ConfigError(key_path(item.key()) + ": unknown key");
    }
}

Json to_json(const DatasetSpec& spec) {
    Json j;
    j["kind"] = to_string(spec.kind());
    if (const auto* s = std::get_if<Sine2dParams>(&spec.params)) {
        j["x_min"] = s->x_min;
        j["x_max"] = s->x_max;
        j["amplitude"] = s->amplitude;
        j["frequency"] = s->frequency;
        j["noise"] = s->noise;
    } else if (const auto* g = std::get_if<Gmm2dParams>(&spec.params)) {
        Json centers = Json::array();
        for (const auto& c : g->centers) centers.push_back({c[0], c[1]});
        j["centers"] = centers;
        j["sigma"] = g->sigma;
    } else {
        const auto& m = std::get<MovingDotParams>(spec.params);
        j["frames"] = m.frames;
        j["height"] = m.height;
        j["width"] = m.width;
        j["radius"] = m.radius;
        j["speed_min"] = m.speed_min;
        j["speed_max"] = m.speed_max;
        j["intensity"] = m.intensity;
        j["supersample"] = m.supersample;
    }
    return j;
}

DatasetSpec dataset_spec_from_json(const Json& j, const std::string& path) {
    JsonObjectReader r(j, path);
    const DatasetKind kind = parse_dataset_kind(r.get<std::string>("kind"));
    DatasetSpec spec = DatasetSpec::defaults(kind);
    if (auto* s = std::get_if<Sine2dParams>(&spec.params)) {
        s->x_min = r.get_or("x_min", s->x_min);
        s->x_max = r.get_or("x_max", s->x_max);
        s->amplitude = r.get_or("amplitude", s->amplitude);
        s->frequency = r.get_or("frequency", s->frequency);
        s->noise = r.get_or("noise", s->noise);
    } else if (auto* g = std::get_if<Gmm2dParams>(&spec.params)) {
        if (r.has("centers")) {
            if (r.has("modes") || r.has("radius"))
                throw ConfigError(r.key_path("centers") + ": give either centers or modes/radius");
            g->centers.clear();
            for (const auto& c : r.raw("centers")) {
                if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number())
                    throw ConfigError(r.key_path("centers") + ": each centre must be [x, y]");
                g->centers.push_back({c[0].get<double>(), c[1].get<double>()});
            }
        } else {
            g->centers = Gmm2dParams::ring(r.get_or<std::size_t>("modes", 8), r.get_or("radius", 3.0));
        }
        g->sigma = r.get_or("sigma", g->sigma);
    } else {
        auto& m = std::get<MovingDotParams>(spec.params);
        m.frames = r.get_or("frames", m.frames);
        m.height = r.get_or("height", m.height);
        m.width = r.get_or("width", m.width);
        m.radius = r.get_or("radius", m.radius);
        m.speed_min = r.get_or("speed_min", m.speed_min);
        m.speed_max = r.get_or("speed_max", m.speed_max);
        m.intensity = r.get_or("intensity", m.intensity);
        m.supersample = r.get_or("supersample", m.supersample);
    }
    r.finish();
    try {
        spec.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return spec;
}

Json to_json(const NetArchitecture& arch) {
    const Shape& s = arch.grid_shape;
    return Json{{"grid_shape", {s.frames, s.height, s.width, s.channels}},
                {"hidden", arch.hidden},
                {"activation", to_string(arch.activation)},
                {"time_features", arch.time_features},
                {"num_classes", arch.num_classes},
                {"cond_dim", arch.cond_dim}};
}

NetArchitecture architecture_from_json(const Json& j, const std::string& path) {
    JsonObjectReader r(j, path);
    NetArchitecture a;
    if (r.has("grid_shape")) {
        const auto dims = r.get<std::vector<std::size_t>>("grid_shape");
        if (dims.size() != 4) throw ConfigError(r.key_path("grid_shape") + ": expected [f, h, w, c]");
        a.grid_shape = {dims[0], dims[1], dims[2], dims[3]};
    }
    a.hidden = r.get_or("hidden", a.hidden);
    if (r.has("activation")) {
        try {
            a.activation = parse_activation(r.get<std::string>("activation"));
        } catch (const ConfigError& e) {
            throw ConfigError(r.key_path("activation") + ": " + e.what());
        }
    }
    a.time_features = r.get_or("time_features", a.time_features);
    a.num_classes = r.get_or("num_classes", a.num_classes);
    a.cond_dim = r.get_or("cond_dim", a.cond_dim);
    r.finish();
    try {
        a.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return a;
}

Json to_json(const TrainConfig& c) {
    return Json{{"steps", c.steps},         {"batch_size", c.batch_size}, {"learning_rate", c.learning_rate},
                {"t_delta", c.t_law.delta}, {"p_drop", c.p_drop},         {"seed", c.seed}};
}

TrainConfig train_config_from_json(const Json& j, const std::string& path) {
    JsonObjectReader r(j, path);
    TrainConfig c;
    c.steps = r.get_or("steps", c.steps);
    c.batch_size = r.get_or("batch_size", c.batch_size);
    c.learning_rate = r.get_or("learning_rate", c.learning_rate);
    c.t_law.delta = r.get_or("t_delta", c.t_law.delta);
    c.p_drop = r.get_or("p_drop", c.p_drop);
    c.seed = r.get_or("seed", c.seed);
    r.finish();
    try {
        c.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return c;
}

std::string fingerprint_of(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = kHex[h & 0xF];
        h >>= 4;
    }
    return out;
}

}  // namespace pnp
