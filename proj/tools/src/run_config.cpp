#include "pnplab/cli/run_config.hpp"

#include <fstream>

#include "pnplab/checkpoint.hpp"
#include "pnplab/errors.hpp"

namespace pnp::cli {

std::string to_string(LogLevel l) {
    switch (l) {
        case LogLevel::none: return "none";
        case LogLevel::planned: return "planned";
        case LogLevel::all: return "all";
    }
    return "none";
}

LogLevel parse_log_level(const std::string& name) {
    if (name == "none") return LogLevel::none;
    if (name == "planned") return LogLevel::planned;
    if (name == "all") return LogLevel::all;
    throw ConfigError("unknown log level '" + name + "' (none, planned, all)");
}

std::string to_string(Verbosity v) {
    switch (v) {
        case Verbosity::quiet: return "quiet";
        case Verbosity::info: return "info";
        case Verbosity::debug: return "debug";
    }
    return "info";
}

Verbosity parse_verbosity(const std::string& name) {
    if (name == "quiet") return Verbosity::quiet;
    if (name == "info") return Verbosity::info;
    if (name == "debug") return Verbosity::debug;
    throw ConfigError("unknown verbosity '" + name + "' (quiet, info, debug)");
}

Schedule schedule_from_json(const Json& j, const std::string& path) {
    JsonObjectReader r(j, path);
    const auto law = r.get_or<std::string>("law", "uniform");
    Schedule s = Schedule::uniform(1);
    if (law == "uniform") {
        s = Schedule::uniform(r.get<std::size_t>("steps"));
    } else if (law == "shifted") {
        s = Schedule::shifted(r.get<std::size_t>("steps"), r.get<double>("shift"));
    } else if (law == "custom") {
        s = Schedule(r.get<std::vector<double>>("times"));
    } else {
        throw ConfigError(r.key_path("law") + ": unknown schedule law '" + law + "' (uniform, shifted, custom)");
    }
    r.finish();
    return s;
}

Json to_json(const Schedule& s) {
    switch (s.law()) {
        case Schedule::Law::uniform: return {{"law", "uniform"}, {"steps", s.steps()}};
        case Schedule::Law::shifted: return {{"law", "shifted"}, {"steps", s.steps()}, {"shift", s.shift()}};
        case Schedule::Law::custom: break;
    }
    return {{"law", "custom"}, {"times", s.timesteps()}};
}

namespace {

PnPPlan plan_from_json(const Json& j, const std::string& path, std::size_t steps) {
    if (j.is_string()) return PnPPlan::parse(j.get<std::string>());
    JsonObjectReader r(j, path);
    const auto first = r.get<std::size_t>("first");
    const auto coverage = r.get<double>("coverage");
    const auto k = r.get<std::size_t>("iterations");
    r.finish();
    if (!(coverage >= 0.0 && coverage <= 1.0)) throw ConfigError(path + ".coverage: must lie in [0, 1]");
    return PnPPlan::early(steps, first, coverage, k);
}

}  // namespace

SamplerSettings sampler_settings_from_json(const Json& j, const std::string& path, LogLevel* log) {
    JsonObjectReader r(j, path);
    SamplerSettings s;
    if (r.has("schedule")) s.schedule = schedule_from_json(r.raw("schedule"), r.key_path("schedule"));
    try {
        if (r.has("plan")) s.plan = plan_from_json(r.raw("plan"), r.key_path("plan"), s.schedule.steps());
        s.plan.validate(s.schedule.steps());
    } catch (const ConfigError& e) {
        throw ConfigError(r.key_path("plan") + ": " + e.what());
    }
    s.tau = r.get_or("tau", s.tau);
    if (r.has("cfg")) {
        JsonObjectReader c = r.child("cfg");
        s.cfg.enabled = c.get_or("enabled", s.cfg.enabled);
        s.cfg.scale = c.get_or("scale", s.cfg.scale);
        s.cfg.cond = c.get_or("cond", s.cfg.cond);
        c.finish();
        if (!(s.cfg.scale >= 0.0)) throw ConfigError(c.key_path("scale") + ": must be >= 0");
    }
    s.n = r.get_or("n", s.n);
    if (s.n == 0) throw ConfigError(r.key_path("n") + ": must be >= 1");
    s.seeds = r.get_or("seeds", s.seeds);
    if (s.seeds.empty()) throw ConfigError(r.key_path("seeds") + ": need at least one seed");
    if (r.has("nfe_counting")) {
        try {
            s.counting = parse_nfe_counting(r.get<std::string>("nfe_counting"));
        } catch (const ConfigError& e) {
            throw ConfigError(r.key_path("nfe_counting") + ": " + e.what());
        }
    }
    if (log != nullptr && r.has("log")) {
        try {
            *log = parse_log_level(r.get<std::string>("log"));
        } catch (const ConfigError& e) {
            throw ConfigError(r.key_path("log") + ": " + e.what());
        }
    }
    r.finish();
    return s;
}

namespace {

Json sampler_to_json(const SamplerSettings& s, LogLevel log) {
    return {{"schedule", to_json(s.schedule)},
            {"plan", s.plan.str()},
            {"tau", s.tau},
            {"cfg", {{"enabled", s.cfg.enabled}, {"scale", s.cfg.scale}, {"cond", s.cfg.cond}}},
            {"n", s.n},
            {"seeds", s.seeds},
            {"nfe_counting", to_string(s.counting)},
            {"log", to_string(log)}};
}

}  // namespace

Json ModelConfig::to_json() const {
    Json j{{"dataset", pnp::to_json(dataset)}, {"model", pnp::to_json(architecture)}, {"train", pnp::to_json(train)}};
    if (checkpoint) j["checkpoint"] = checkpoint->generic_string();
    return j;
}

std::string ModelConfig::fingerprint() const {
    return fingerprint_of(Json{{"dataset", pnp::to_json(dataset)},
                               {"model", pnp::to_json(architecture)},
                               {"train", pnp::to_json(train)}});
}

Json EvalConfig::to_json() const {
    Json j{{"samples", samples.generic_string()}};
    if (baseline) j["baseline"] = baseline->generic_string();
    if (trajectory) j["trajectory"] = trajectory->generic_string();
    if (radius) j["radius"] = *radius;
    return j;
}

ModelConfig model_config_from_json(const Json& j) {
    JsonObjectReader r(j, "");
    ModelConfig m;
    m.dataset = dataset_spec_from_json(r.raw("dataset"), "dataset");
    m.dataset.validate();
    const Json arch = r.has("model") ? r.raw("model") : Json::object();
    m.architecture = architecture_from_json(arch, "model");
    if (!arch.contains("grid_shape")) m.architecture.grid_shape = m.dataset.sample_shape();
    if (m.dataset.label_count() == 0 && m.architecture.num_classes > 0)
        throw ConfigError("model.num_classes: dataset " + to_string(m.dataset.kind()) + " has no labels");
    if (m.architecture.num_classes > 0 && m.architecture.num_classes != m.dataset.label_count())
        throw ConfigError("model.num_classes: dataset has " + std::to_string(m.dataset.label_count()) + " classes");
    m.architecture.validate();
    if (!(m.architecture.grid_shape == m.dataset.sample_shape()))
        throw ConfigError("model.grid_shape: " + m.architecture.grid_shape.str() + " does not match dataset sample shape " +
                          m.dataset.sample_shape().str());
    if (r.has("train")) m.train = train_config_from_json(r.raw("train"), "train");
    m.train.validate();
    if (r.has("checkpoint")) m.checkpoint = r.get<std::string>("checkpoint");
    r.finish();
    return m;
}

RunConfig RunConfig::from_json(const Json& j) {
    JsonObjectReader r(j, "");
    RunConfig c;
    if (r.has("dataset")) {
        Json model_part = Json::object();
        for (const char* key : {"dataset", "model", "train", "checkpoint"})
            if (r.has(key)) model_part[key] = r.raw(key);
        c.model = model_config_from_json(model_part);
    } else {
        for (const char* key : {"model", "train", "checkpoint"})
            if (r.has(key)) throw ConfigError(std::string(key) + ": needs a dataset section");
    }
    if (r.has("sampler")) c.sampler = sampler_settings_from_json(r.raw("sampler"), "sampler", &c.log);
    if (r.has("eval")) {
        JsonObjectReader e = r.child("eval");
        EvalConfig ev;
        ev.samples = e.get<std::string>("samples");
        if (e.has("baseline")) ev.baseline = e.get<std::string>("baseline");
        if (e.has("trajectory")) ev.trajectory = e.get<std::string>("trajectory");
        if (e.has("radius")) {
            ev.radius = e.get<double>("radius");
            if (!(*ev.radius > 0.0)) throw ConfigError(e.key_path("radius") + ": must be > 0");
        }
        e.finish();
        c.eval = ev;
    }
    if (r.has("verbosity")) {
        try {
            c.verbosity = parse_verbosity(r.get<std::string>("verbosity"));
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("verbosity: ") + e.what());
        }
    }
    r.finish();
    return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_file_bytes(path);
    } catch (const LoadError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::exception& e) {
        throw ConfigError(path.string() + ": not valid JSON: " + e.what());
    }
    return from_json(j);
}

Json RunConfig::to_json() const {
    Json j = Json::object();
    if (model) j.update(model->to_json());
    if (sampler) j["sampler"] = sampler_to_json(*sampler, log);
    if (eval) j["eval"] = eval->to_json();
    j["verbosity"] = to_string(verbosity);
    return j;
}

const ModelConfig& RunConfig::require_model() const {
    if (!model) throw ConfigError("dataset: missing required section");
    return *model;
}

const SamplerSettings& RunConfig::require_sampler() const {
    if (!sampler) throw ConfigError("sampler: missing required section");
    return *sampler;
}

const EvalConfig& RunConfig::require_eval() const {
    if (!eval) throw ConfigError("eval: missing required section");
    return *eval;
}

}  // namespace pnp::cli
