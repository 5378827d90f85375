#include "pnplab/cli/commands.hpp"

#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "pnplab/checkpoint.hpp"
#include "pnplab/cli/suites.hpp"
#include "pnplab/cli/svg.hpp"
#include "pnplab/errors.hpp"

namespace pnp::cli {

void cmd_train(const RunConfig& config, const Context& ctx) {
    const ModelConfig& m = config.require_model();
    if (m.checkpoint) throw ConfigError("checkpoint: not used by train; remove the key");
    TrainedModel t = train_model(m, ctx);
    const Checkpoint ckpt = make_checkpoint(t.net, m.dataset, m.train, m.train.steps);
    save_checkpoint(ctx.out / "model.ckpt", ckpt);
    std::filesystem::create_directories(ctx.cache_dir);
    save_checkpoint(cache_path(m, ctx), ckpt);
    write_text(ctx.out / "loss.csv", loss_csv(t.losses));
    std::vector<double> steps(t.losses.size());
    for (std::size_t k = 0; k < steps.size(); ++k) steps[k] = static_cast<double>(k);
    write_text(ctx.out / "loss.svg", line_plot_svg("training loss", "step", "fm loss", {{"loss", steps, t.losses}}));
    write_json(ctx.out / "config.json", config.to_json());
    ctx.info("wrote " + (ctx.out / "model.ckpt").string());
}

void cmd_sample(const RunConfig& config, const Context& ctx) {
    const ModelConfig& m = config.require_model();
    const SamplerSettings& s = config.require_sampler();
    const TrainedModel model = obtain_model(m, ctx);
    if (s.cfg.enabled && !model.net.architecture().conditional())
        throw ConfigError("sampler.cfg.enabled: the network is not class-conditional");
    const auto runs = sample_seeds(model.net, s, config.log, ctx.jobs);
    save_container(ctx.out / "samples.srvgrid", samples_container(m.dataset, s, runs));
    if (config.log != LogLevel::none) save_container(ctx.out / "trajectory.srvgrid", trajectory_container(m.dataset, s, runs));
    write_text(ctx.out / "nfe.csv", nfe_csv(s, runs));
    write_json(ctx.out / "config.json", config.to_json());
    ctx.info("NFE per run: " + std::to_string(runs.front().nfe_used) + " (" + to_string(s.counting) + "; " +
             std::to_string(s.schedule.steps()) + " steps, " + std::to_string(s.plan.extra_evaluations()) +
             " refinement iterations)");
}

namespace {

LoadedSamples load_samples(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw ConfigError("eval: input not found: " + path.string());
    return read_samples(load_container(path));
}

void plot_samples(const LoadedSamples& s, const std::filesystem::path& path, const std::string& title,
                  const std::vector<LocalizationInput>& loc) {
    if (s.runs.empty()) return;
    if (s.dataset.kind() == DatasetKind::movingdot) {
        const Grid clip = s.runs.front().samples.sample(0);
        if (!loc.empty()) {
            const Grid mask = loc.front().mask.sample(0);
            write_text(path, frame_strip_svg(title, clip, &mask));
        } else {
            write_text(path, frame_strip_svg(title, clip));
        }
    } else {
        write_text(path, scatter_svg(title, batch_points(s.runs.front().samples), ManifoldOracle::for_dataset(s.dataset)));
    }
}

}  // namespace

void cmd_eval(const RunConfig& config, const Context& ctx) {
    const EvalConfig& e = config.require_eval();
    const LoadedSamples cand = load_samples(e.samples);
    std::vector<LocalizationInput> loc;
    if (e.trajectory) {
        if (!std::filesystem::exists(*e.trajectory)) throw ConfigError("eval: input not found: " + e.trajectory->string());
        loc = localization_inputs(load_container(*e.trajectory), cand);
    }
    const auto reports = evaluate_runs(cand.dataset, cand.runs, cand.fingerprint, e.radius, loc);
    write_text(ctx.out / "metrics.csv", metrics_csv(reports));
    const std::string ext = cand.dataset.kind() == DatasetKind::movingdot ? "frames" : "scatter";
    plot_samples(cand, ctx.out / (ext + ".svg"), "samples " + cand.fingerprint, loc);
    if (e.baseline) {
        const LoadedSamples base = load_samples(*e.baseline);
        if (!(base.dataset == cand.dataset)) throw ConfigError("eval.baseline: drawn for a different dataset");
        const auto base_reports = evaluate_runs(base.dataset, base.runs, base.fingerprint, e.radius);
        write_text(ctx.out / "paired.csv", paired_csv(base_reports, reports));
        plot_samples(base, ctx.out / (ext + "_baseline.svg"), "baseline " + base.fingerprint, {});
    }
    write_json(ctx.out / "config.json", config.to_json());
    for (const auto& r : reports) ctx.info(r.metric + ": mean " + format_double(r.mean) + " sd " + format_double(r.stddev));
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Flow-matching lab: train toy generators and compare Euler with Predict-and-Perturb sampling"};
    app.require_subcommand(1);

    std::string config_path, suite, out_dir, cache_dir;
    std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> iterations;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--out", out_dir, "Output directory (default: $PNPLAB_OUTPUT_ROOT/<command>)");
        cmd->add_option("--jobs", jobs, "Parallel worker slots")->check(CLI::PositiveNumber);
        cmd->add_option("--seed", seed, "Override the seed (train: training seed; sample: single sampling seed)");
        cmd->add_option("--cache-dir", cache_dir, "Checkpoint cache (default: $PNPLAB_OUTPUT_ROOT/cache)");
    };
    auto* train_cmd = app.add_subcommand("train", "Train a vector-field net");
    auto* sample_cmd = app.add_subcommand("sample", "Sample with Euler or P&P");
    auto* eval_cmd = app.add_subcommand("eval", "Score sample containers and draw plots");
    for (auto* cmd : {train_cmd, sample_cmd, eval_cmd}) {
        cmd->add_option("--config", config_path, "JSON config file")->required();
        add_common(cmd);
    }
    auto* repro_cmd = app.add_subcommand("repro", "Run a reproduction suite and check its criteria");
    repro_cmd->add_option("--suite", suite, "Suite name (see list-suites)")->required();
    repro_cmd->add_option("--iterations", iterations, "Override the suite's P&P iteration count");
    add_common(repro_cmd);
    auto* list_cmd = app.add_subcommand("list-suites", "Print the reproduction suites");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        std::ostringstream msg, help;
        app.exit(e, help, msg);
        err << msg.str() << help.str();
        return kExitConfig;
    }

    try {
        if (list_cmd->parsed()) {
            for (const auto& name : suite_names()) out << name << "  " << suite_description(name) << '\n';
            return kExitOk;
        }
        const std::filesystem::path root = default_output_root();
        Context ctx;
        ctx.jobs = jobs;
        ctx.log = &err;
        ctx.cache_dir = cache_dir.empty() ? root / "cache" : std::filesystem::path(cache_dir);

        if (repro_cmd->parsed()) {
            ctx.out = out_dir.empty() ? root / "repro" / suite : std::filesystem::path(out_dir);
            SuiteOptions opts;
            opts.seed = seed;
            opts.iterations = iterations;
            const SuiteReport report = run_suite(suite, opts, ctx);
            out << criteria_table(report);
            return report.passed() ? kExitOk : kExitFailed;
        }

        RunConfig config = RunConfig::load(config_path);
        ctx.verbosity = config.verbosity;
        if (train_cmd->parsed()) {
            if (seed && config.model) config.model->train.seed = *seed;
            ctx.out = out_dir.empty() ? root / "train" : std::filesystem::path(out_dir);
            cmd_train(config, ctx);
        } else if (sample_cmd->parsed()) {
            if (seed && config.sampler) config.sampler->seeds = {*seed};
            ctx.out = out_dir.empty() ? root / "sample" : std::filesystem::path(out_dir);
            cmd_sample(config, ctx);
        } else {
            ctx.out = out_dir.empty() ? root / "eval" : std::filesystem::path(out_dir);
            cmd_eval(config, ctx);
        }
        return kExitOk;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const LoadError& e) {
        err << "input error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const UsageError& e) {
        err << "input error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DomainError& e) {
        err << "input error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailed;
    }
}

}  // namespace pnp::cli
