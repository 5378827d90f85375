#include "pnplab/cli/pipeline.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include "pnplab/checkpoint.hpp"
#include "pnplab/errors.hpp"

namespace pnp::cli {

void Context::info(const std::string& line) const {
    if (log != nullptr && verbosity != Verbosity::quiet) *log << line << '\n' << std::flush;
}

void Context::debug(const std::string& line) const {
    if (log != nullptr && verbosity == Verbosity::debug) *log << line << '\n' << std::flush;
}

std::filesystem::path default_output_root() {
    if (const char* env = std::getenv("PNPLAB_OUTPUT_ROOT"); env != nullptr && *env != '\0') return env;
    return "pnplab-out";
}

void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
    jobs = std::max<std::size_t>(1, std::min(jobs, n));
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex guard;
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(guard);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    if (failure) std::rethrow_exception(failure);
}

VectorFieldNet initial_net(const NetArchitecture& arch, std::uint64_t seed) {
    RngStream rng = RngStream(seed).split(kInitTag);
    return VectorFieldNet::initialized(arch, rng);
}

std::filesystem::path cache_path(const ModelConfig& m, const Context& ctx) {
    return ctx.cache_dir / (to_string(m.dataset.kind()) + "-" + m.fingerprint() + ".ckpt");
}

TrainedModel train_model(const ModelConfig& m, const Context& ctx) {
    ctx.info("training " + to_string(m.dataset.kind()) + " net for " + std::to_string(m.train.steps) + " steps");
    const std::size_t every = std::max<std::size_t>(1, m.train.steps / 10);
    auto result = train(m.dataset, initial_net(m.architecture, m.train.seed), m.train, [&](std::size_t k, double loss) {
        if ((k + 1) % every == 0) ctx.debug("  step " + std::to_string(k + 1) + " loss " + format_double(loss));
    });
    return {std::move(result.net), std::move(result.losses), false, {}};
}

TrainedModel obtain_model(const ModelConfig& m, const Context& ctx) {
    auto check = [&](const Checkpoint& c, const std::filesystem::path& path) {
        if (!(c.architecture.grid_shape == m.dataset.sample_shape()))
            throw ConfigError("checkpoint " + path.string() + " holds a net for shape " + c.architecture.grid_shape.str() +
                              " but the dataset produces " + m.dataset.sample_shape().str());
    };
    if (m.checkpoint) {
        Checkpoint c;
        try {
            c = load_checkpoint(*m.checkpoint);
        } catch (const LoadError& e) {
            throw ConfigError(std::string("checkpoint: ") + e.what());
        }
        check(c, *m.checkpoint);
        return {restore_net(c), {}, true, *m.checkpoint};
    }
    const auto cached = cache_path(m, ctx);
    if (std::filesystem::exists(cached)) {
        try {
            const Checkpoint c = load_checkpoint(cached);
            check(c, cached);
            ctx.info("using cached checkpoint " + cached.string());
            return {restore_net(c), {}, true, cached};
        } catch (const LoadError& e) {
            ctx.info(std::string("ignoring unreadable cache entry: ") + e.what());
        }
    }
    TrainedModel t = train_model(m, ctx);
    const auto tmp = cached.string() + ".tmp";
    save_checkpoint(tmp, make_checkpoint(t.net, m.dataset, m.train, m.train.steps));
    std::filesystem::rename(tmp, cached);
    t.source = cached;
    return t;
}

std::vector<SampleRun> sample_seeds(const VectorFieldNet& net, const SamplerSettings& s, LogLevel log, std::size_t jobs) {
    std::vector<SampleRun> runs(s.seeds.size());
    parallel_for(s.seeds.size(), jobs, [&](std::size_t i) {
        runs[i] = sample(net, s.schedule, s.plan, s.tau, s.cfg, s.n, RngStream(s.seeds[i]), {s.counting, log});
        const auto expected = nfe_total(s.schedule, s.plan, s.counting, s.cfg.enabled);
        if (runs[i].nfe_used != expected)
            throw std::logic_error("NFE bookkeeping drifted: used " + std::to_string(runs[i].nfe_used) + ", expected " +
                                   std::to_string(expected));
    });
    return runs;
}

std::string seed_grid_name(std::uint64_t seed) { return "seed/" + std::to_string(seed); }

namespace {

Json shape_json(const Shape& s) { return {s.frames, s.height, s.width, s.channels}; }

Shape shape_from(const Json& j) {
    const auto d = j.get<std::vector<std::size_t>>();
    if (d.size() != 4) throw LoadError("sample_shape must have 4 entries");
    return {d[0], d[1], d[2], d[3]};
}

Json base_meta(const DatasetSpec& dataset, const SamplerSettings& s, const std::vector<SampleRun>& runs) {
    Json seeds = Json::array();
    for (const auto& r : runs) seeds.push_back(r.seed);
    return {{"dataset", to_json(dataset)},
            {"sample_shape", shape_json(dataset.sample_shape())},
            {"settings_fingerprint", s.fingerprint()},
            {"seeds", seeds}};
}

}  // namespace

GridContainer samples_container(const DatasetSpec& dataset, const SamplerSettings& s, const std::vector<SampleRun>& runs) {
    GridContainer c;
    c.meta = base_meta(dataset, s, runs);
    Json nfe = Json::array();
    for (const auto& r : runs) nfe.push_back(r.nfe_used);
    c.meta["nfe_used"] = nfe;
    for (const auto& r : runs) c.add(seed_grid_name(r.seed), batch_to_grid(r.samples));
    return c;
}

GridContainer trajectory_container(const DatasetSpec& dataset, const SamplerSettings& s, const std::vector<SampleRun>& runs) {
    GridContainer c;
    c.meta = base_meta(dataset, s, runs);
    Json steps = Json::array();
    for (const auto& r : runs) {
        for (const auto& st : r.log) {
            const std::string prefix = seed_grid_name(r.seed) + "/step/" + std::to_string(st.step);
            steps.push_back({{"seed", r.seed},
                             {"step", st.step},
                             {"t", st.t},
                             {"iterations", st.masks.size()},
                             {"nfe_after", st.nfe_after}});
            c.add(prefix + "/z", batch_to_grid(st.z));
            for (std::size_t k = 0; k < st.endpoints.size(); ++k)
                c.add(prefix + "/endpoint/" + std::to_string(k), batch_to_grid(st.endpoints[k]));
            for (std::size_t k = 0; k < st.masks.size(); ++k) {
                c.add(prefix + "/mask/" + std::to_string(k + 1), batch_to_grid(st.masks[k]));
                c.add(prefix + "/uncertainty/" + std::to_string(k + 1), batch_to_grid(st.uncertainty[k]));
            }
        }
    }
    c.meta["steps"] = steps;
    return c;
}

LoadedSamples read_samples(const GridContainer& c) {
    LoadedSamples out;
    try {
        out.dataset = dataset_spec_from_json(c.meta.at("dataset"), "meta.dataset");
        const Shape shape = shape_from(c.meta.at("sample_shape"));
        if (!(shape == out.dataset.sample_shape())) throw LoadError("sample_shape disagrees with the dataset");
        out.fingerprint = c.meta.at("settings_fingerprint").get<std::string>();
        for (const auto& s : c.meta.at("seeds")) {
            const auto seed = s.get<std::uint64_t>();
            out.runs.push_back({seed, grid_to_batch(c.get(seed_grid_name(seed)), shape)});
        }
    } catch (const Json::exception& e) {
        throw LoadError(std::string("samples container: malformed meta: ") + e.what());
    } catch (const ConfigError& e) {
        throw LoadError(std::string("samples container: ") + e.what());
    }
    return out;
}

std::vector<LocalizationInput> localization_inputs(const GridContainer& trajectory, const LoadedSamples& samples) {
    std::vector<LocalizationInput> out;
    const Shape mask_shape = samples.dataset.sample_shape().single_channel();
    try {
        for (const auto& run : samples.runs) {
            for (const auto& st : trajectory.meta.at("steps")) {
                if (st.at("seed").get<std::uint64_t>() != run.seed) continue;
                const auto k = st.at("iterations").get<std::size_t>();
                if (k == 0) continue;
                const std::string name = seed_grid_name(run.seed) + "/step/" + std::to_string(st.at("step").get<std::size_t>()) +
                                         "/mask/" + std::to_string(k);
                out.push_back({run.seed, grid_to_batch(trajectory.get(name), mask_shape), run.samples});
                break;
            }
        }
    } catch (const Json::exception& e) {
        throw LoadError(std::string("trajectory container: malformed meta: ") + e.what());
    }
    return out;
}

std::vector<MetricReport> evaluate_runs(const DatasetSpec& dataset, const std::vector<SeedSamples>& runs,
                                        const std::string& fingerprint, std::optional<double> radius,
                                        const std::vector<LocalizationInput>& localization) {
    std::vector<MetricReport> out;
    switch (dataset.kind()) {
        case DatasetKind::sine2d: {
            auto m = manifold_metric(runs, ManifoldOracle::for_dataset(dataset), fingerprint);
            m.metric = "manifold_distance";
            out.push_back(std::move(m));
            break;
        }
        case DatasetKind::gmm2d: {
            const auto oracle = ManifoldOracle::for_dataset(dataset);
            auto m = manifold_metric(runs, oracle, fingerprint);
            m.metric = "manifold_distance";
            out.push_back(std::move(m));
            const double r = radius.value_or(2.0 * std::get<Gmm2dParams>(dataset.params).sigma);
            auto c = mode_concentration(runs, oracle, r, fingerprint);
            c.fraction.metric = "mode_fraction";
            c.entropy.metric = "mode_entropy";
            out.push_back(std::move(c.fraction));
            out.push_back(std::move(c.entropy));
            break;
        }
        case DatasetKind::movingdot: {
            const auto& p = std::get<MovingDotParams>(dataset.params);
            auto j = jitter_metric(runs, p, fingerprint);
            j.jitter.metric = "temporal_jitter";
            out.push_back(std::move(j.jitter));
            out.push_back(MetricReport::from_values("excluded_clips", fingerprint, {0}, {static_cast<double>(j.excluded)}, 1));
            if (!localization.empty()) {
                auto l = mask_localization(localization, p, fingerprint);
                l.metric = "mask_localization";
                out.push_back(std::move(l));
            }
            break;
        }
    }
    return out;
}

std::string paired_csv(const std::vector<MetricReport>& baseline, const std::vector<MetricReport>& candidate) {
    std::string out = std::string(kPairedSchema) + "\nmetric,seed,baseline,candidate,delta\n";
    for (const auto& b : baseline) {
        for (const auto& c : candidate) {
            if (b.metric != c.metric) continue;
            for (std::size_t i = 0; i < b.seeds.size(); ++i) {
                for (std::size_t k = 0; k < c.seeds.size(); ++k) {
                    if (c.seeds[k] != b.seeds[i]) continue;
                    out += b.metric + "," + std::to_string(b.seeds[i]) + "," + format_double(b.values[i]) + "," +
                           format_double(c.values[k]) + "," + format_double(c.values[k] - b.values[i]) + "\n";
                }
            }
            out += b.metric + ",mean," + format_double(b.mean) + "," + format_double(c.mean) + "," +
                   format_double(c.mean - b.mean) + "\n";
        }
    }
    return out;
}

std::string loss_csv(const std::vector<double>& losses) {
    std::string out = std::string(kLossSchema) + "\nstep,loss\n";
    for (std::size_t k = 0; k < losses.size(); ++k) out += std::to_string(k) + "," + format_double(losses[k]) + "\n";
    return out;
}

std::string nfe_csv(const SamplerSettings& s, const std::vector<SampleRun>& runs) {
    std::string out = std::string(kNfeSchema) + "\nseed,base_steps,extra,nfe_used,nfe_total\n";
    const auto total = nfe_total(s.schedule, s.plan, s.counting, s.cfg.enabled);
    for (const auto& r : runs)
        out += std::to_string(r.seed) + "," + std::to_string(s.schedule.steps()) + "," +
               std::to_string(s.plan.extra_evaluations()) + "," + std::to_string(r.nfe_used) + "," + std::to_string(total) + "\n";
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) { write_file_bytes(path, text); }

void write_json(const std::filesystem::path& path, const Json& j) { write_file_bytes(path, j.dump(2) + "\n"); }

}  // namespace pnp::cli
