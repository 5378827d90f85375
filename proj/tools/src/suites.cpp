#include "pnplab/cli/suites.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include "pnplab/cli/svg.hpp"
#include "pnplab/errors.hpp"

namespace pnp::cli {

bool SuiteReport::passed() const {
    return std::all_of(criteria.begin(), criteria.end(), [](const Criterion& c) { return c.passed; });
}

const Criterion& SuiteReport::at(const std::string& id) const {
    for (const auto& c : criteria)
        if (c.id == id) return c;
    throw UsageError("suite " + suite + " has no criterion " + id);
}

namespace {

struct SuiteEntry {
    std::string name;
    std::string description;
    bool takes_iterations;
};

const std::vector<SuiteEntry>& entries() {
    static const std::vector<SuiteEntry> list{
        {"toy-sine", "sine2d: Euler vs P&P manifold distance, endpoint pull and chain convergence", true},
        {"mode-seek", "gmm2d: concentration and entropy under a long mid-trajectory P&P chain", true},
        {"jitter", "movingdot: temporal jitter and mask localisation of uncertainty-aware P&P", true},
        {"ablate-kf", "sine2d: manifold distance across P&P iteration counts", false},
        {"ablate-tau", "sine2d: threshold sweep with its unmasked and Euler endpoints", false},
        {"ablate-alpha", "sine2d: manifold distance across the refined interval length", false},
    };
    return list;
}

const SuiteEntry& entry(const std::string& name) {
    for (const auto& e : entries())
        if (e.name == name) return e;
    std::string known;
    for (const auto& e : entries()) known += (known.empty() ? "" : ", ") + e.name;
    throw ConfigError("unknown suite '" + name + "' (known: " + known + ")");
}

constexpr std::size_t kSteps = 50;

ModelConfig point_model(DatasetKind kind) {
    ModelConfig m;
    m.dataset = DatasetSpec::defaults(kind);
    m.architecture.grid_shape = m.dataset.sample_shape();
    m.train.steps = 20000;
    m.train.seed = 1;
    return m;
}

ModelConfig movingdot_model() {
    ModelConfig m;
    m.dataset = DatasetSpec::defaults(DatasetKind::movingdot);
    m.architecture.grid_shape = m.dataset.sample_shape();
    m.architecture.hidden = {512, 512};
    m.train.steps = 6000;
    m.train.batch_size = 64;
    m.train.seed = 1;
    return m;
}

SamplerSettings base_settings(const SuiteOptions& o, std::size_t n) {
    SamplerSettings s;
    s.schedule = Schedule::uniform(kSteps);
    s.n = n;
    const std::uint64_t first = o.seed.value_or(1);
    s.seeds = {first, first + 1, first + 2};
    return s;
}

PnPPlan early_plan() { return PnPPlan::early(kSteps, 3, 0.2, 3); }

PnPPlan treatment_plan(PnPPlan plan, const SuiteOptions& o) {
    return o.iterations ? plan.with_iterations(*o.iterations) : plan;
}

std::vector<SeedSamples> seed_samples(const std::vector<SampleRun>& runs) {
    std::vector<SeedSamples> out;
    for (const auto& r : runs) out.push_back({r.seed, r.samples});
    return out;
}

const MetricReport& find_metric(const std::vector<MetricReport>& reports, const std::string& metric) {
    for (const auto& r : reports)
        if (r.metric == metric) return r;
    throw std::logic_error("missing metric " + metric);
}

std::string num(double v) { return format_double(v); }

/// One sampler configuration of a suite with its runs and scores.
struct Arm {
    std::string label;
    SamplerSettings settings;
    std::vector<SampleRun> runs;
    std::vector<MetricReport> reports;
    std::vector<LocalizationInput> localization;
};

Arm run_arm(const std::string& label, const VectorFieldNet& net, const DatasetSpec& dataset, SamplerSettings s,
            const Context& ctx, std::optional<double> radius = {}, bool localize = false) {
    Arm a{label, std::move(s), {}, {}, {}};
    const LogLevel log = localize && !a.settings.plan.empty() ? LogLevel::planned : LogLevel::none;
    ctx.info(label + ": sampling " + std::to_string(a.settings.seeds.size()) + " seeds, plan '" + a.settings.plan.str() +
             "', tau " + num(a.settings.tau));
    a.runs = sample_seeds(net, a.settings, log, ctx.jobs);
    if (log != LogLevel::none) {
        for (const auto& r : a.runs) a.localization.push_back({r.seed, r.log.front().masks.back(), r.samples});
    }
    a.reports = evaluate_runs(dataset, seed_samples(a.runs), a.settings.fingerprint(), radius, a.localization);
    save_container(ctx.out / ("samples_" + label + ".srvgrid"), samples_container(dataset, a.settings, a.runs));
    if (dataset.kind() == DatasetKind::movingdot) {
        const Grid clip = a.runs.front().samples.sample(0);
        if (a.localization.empty()) {
            write_text(ctx.out / ("frames_" + label + ".svg"), frame_strip_svg(label, clip));
        } else {
            const Grid mask = a.localization.front().mask.sample(0);
            write_text(ctx.out / ("frames_" + label + ".svg"), frame_strip_svg(label, clip, &mask));
        }
    } else {
        write_text(ctx.out / ("scatter_" + label + ".svg"),
                   scatter_svg(label, batch_points(a.runs.front().samples), ManifoldOracle::for_dataset(dataset)));
    }
    return a;
}

Json arms_json(const std::vector<const Arm*>& arms) {
    Json j = Json::object();
    for (const Arm* a : arms) j[a->label] = a->settings.to_json();
    return j;
}

void write_common(const Context& ctx, Json config, const std::vector<MetricReport>& metrics, const SuiteReport& report) {
    write_json(ctx.out / "config.json", config);
    write_text(ctx.out / "metrics.csv", metrics_csv(metrics));
    write_text(ctx.out / "criteria.csv", criteria_csv(report));
}

std::vector<MetricReport> concat(const Arm& a, const Arm& b) {
    std::vector<MetricReport> out = a.reports;
    out.insert(out.end(), b.reports.begin(), b.reports.end());
    return out;
}

/// Largest rise between consecutive entries, relative to the first entry.
double worst_relative_rise(const std::vector<double>& v, std::size_t count) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < count; ++k) worst = std::max(worst, (v[k] - v[k - 1]) / v[0]);
    return worst;
}

double linear_r2(const std::vector<double>& y) {
    const auto n = static_cast<double>(y.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < y.size(); ++k) {
        const auto x = static_cast<double>(k);
        sx += x;
        sy += y[k];
        sxx += x * x;
        sxy += x * y[k];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double icept = (sy - slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    for (std::size_t k = 0; k < y.size(); ++k) {
        const double fit = icept + slope * static_cast<double>(k);
        ss_res += (y[k] - fit) * (y[k] - fit);
        ss_tot += (y[k] - sy / n) * (y[k] - sy / n);
    }
    return ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
}

SuiteReport toy_sine(const SuiteOptions& o, const Context& ctx) {
    constexpr double kMaxRatio = 0.9;
    constexpr std::size_t kChainStep = 5, kChains = 512, kPullK = 3, kConvergeK = 8;
    constexpr std::uint64_t kChainSeed = 1;
    constexpr double kTolerance = 0.02;

    const ModelConfig m = point_model(DatasetKind::sine2d);
    const TrainedModel model = obtain_model(m, ctx);
    const DatasetSpec& ds = m.dataset;

    SamplerSettings s = base_settings(o, 2000);
    const Arm euler = run_arm("euler", model.net, ds, s, ctx);
    s.plan = treatment_plan(early_plan(), o);
    const Arm pnp = run_arm("pnp", model.net, ds, s, ctx);

    SuiteReport rep{"toy-sine", {}};
    const double de = find_metric(euler.reports, "manifold_distance").mean;
    const double dp = find_metric(pnp.reports, "manifold_distance").mean;
    rep.criteria.push_back({"manifold_ratio", dp / de <= kMaxRatio, dp / de, kMaxRatio,
                            "pnp " + num(dp) + " / euler " + num(de)});
    const std::uint64_t nfe = pnp.runs.front().nfe_used;
    const std::uint64_t expect = nfe_total(pnp.settings.schedule, pnp.settings.plan, pnp.settings.counting, false);
    rep.criteria.push_back({"nfe_exact", nfe == expect, static_cast<double>(nfe), static_cast<double>(expect),
                            std::to_string(kSteps) + " base + " + std::to_string(pnp.settings.plan.extra_evaluations()) +
                                " refinement"});

    // Endpoint chain held at one noise level.
    const ManifoldOracle oracle = ManifoldOracle::for_dataset(ds);
    const Schedule sched = Schedule::uniform(kSteps);
    const RngStream rng(kChainSeed);
    FieldEvaluator field(model.net);
    const Batch z_t = euler_integrate(field, initial_noise(ds.sample_shape(), kChains, rng), sched, 0, kChainStep);
    const auto chain = fixed_level_chain(field, z_t, sched[kChainStep], kConvergeK, rng.split(kChainStep));
    std::vector<double> pull(chain.size(), 0.0), gap(chain.size(), 0.0);
    for (std::size_t k = 0; k < chain.size(); ++k) {
        for (std::size_t j = 0; j < kChains; ++j) {
            pull[k] += oracle.distance(chain[k].sample(j)) / kChains;
            gap[k] += (chain[k].matrix().col(j) - chain.back().matrix().col(j)).norm() / kChains;
        }
    }
    const double pull_rise = worst_relative_rise(pull, kPullK + 1);
    rep.criteria.push_back({"endpoint_pull", pull_rise <= kTolerance, pull_rise, kTolerance,
                            "distance k=0.." + std::to_string(kPullK) + ": " + num(pull[0]) + " " + num(pull[1]) + " " +
                                num(pull[2]) + " " + num(pull[3]) + " at t=" + num(sched[kChainStep])});
    const double gap_rise = worst_relative_rise(gap, kConvergeK + 1);
    rep.criteria.push_back({"endpoint_convergence", gap_rise <= kTolerance, gap_rise, kTolerance,
                            "gap to k=" + std::to_string(kConvergeK) + " from " + num(gap[0]) + " to " +
                                num(gap[kConvergeK - 1]) + ", linear R^2 " +
                                num(linear_r2(std::vector<double>(gap.begin(), gap.end() - 1)))});

    std::ostringstream csv;
    csv << kChainSchema << "\nk,manifold_distance,gap_to_last\n";
    std::vector<double> ks;
    for (std::size_t k = 0; k < chain.size(); ++k) {
        csv << k << ',' << num(pull[k]) << ',' << num(gap[k]) << '\n';
        ks.push_back(static_cast<double>(k));
    }
    write_text(ctx.out / "chain.csv", csv.str());
    write_text(ctx.out / "chain.svg",
               line_plot_svg("endpoint chain at t=" + num(sched[kChainStep]), "iteration k", "mean value",
                             {{"manifold distance", ks, pull}, {"gap to last", ks, gap}}));

    write_text(ctx.out / "paired.csv", paired_csv(euler.reports, pnp.reports));
    Json config{{"suite", rep.suite},
                {"model", m.to_json()},
                {"model_fingerprint", m.fingerprint()},
                {"arms", arms_json({&euler, &pnp})},
                {"experiment",
                 {{"max_ratio", kMaxRatio},
                  {"chain", {{"step", kChainStep}, {"chains", kChains}, {"seed", kChainSeed}, {"pull_iterations", kPullK},
                             {"convergence_iterations", kConvergeK}, {"tolerance", kTolerance}}}}}};
    write_common(ctx, config, concat(euler, pnp), rep);
    return rep;
}

SuiteReport mode_seek(const SuiteOptions& o, const Context& ctx) {
    constexpr std::size_t kStep = 25, kIterations = 32;
    constexpr double kMargin = 0.05;

    const ModelConfig m = point_model(DatasetKind::gmm2d);
    const TrainedModel model = obtain_model(m, ctx);
    const DatasetSpec& ds = m.dataset;
    const double kRadius = 2.0 * std::get<Gmm2dParams>(ds.params).sigma;

    SamplerSettings s = base_settings(o, 2000);
    const Arm base = run_arm("euler", model.net, ds, s, ctx, kRadius);
    s.plan = treatment_plan(PnPPlan({{kStep, kStep, kIterations}}), o);
    const Arm seek = run_arm("pnp", model.net, ds, s, ctx, kRadius);

    SuiteReport rep{"mode-seek", {}};
    const double fb = find_metric(base.reports, "mode_fraction").mean;
    const double ft = find_metric(seek.reports, "mode_fraction").mean;
    rep.criteria.push_back({"concentration_margin", ft - fb >= kMargin, ft - fb, kMargin,
                            "fraction within " + num(kRadius) + ": pnp " + num(ft) + " vs euler " + num(fb)});
    const double eb = find_metric(base.reports, "mode_entropy").mean;
    const double et = find_metric(seek.reports, "mode_entropy").mean;
    rep.criteria.push_back({"entropy_not_higher", et <= eb, et - eb, 0.0,
                            "entropy pnp " + num(et) + " vs euler " + num(eb) + " nats"});

    write_text(ctx.out / "paired.csv", paired_csv(base.reports, seek.reports));
    Json config{{"suite", rep.suite},
                {"model", m.to_json()},
                {"model_fingerprint", m.fingerprint()},
                {"arms", arms_json({&base, &seek})},
                {"experiment", {{"step", kStep}, {"t", s.schedule[kStep]}, {"radius", kRadius}, {"min_margin", kMargin}}}};
    write_common(ctx, config, concat(base, seek), rep);
    return rep;
}

SuiteReport jitter(const SuiteOptions& o, const Context& ctx) {
    constexpr double kTau = 0.25;

    const ModelConfig m = movingdot_model();
    const TrainedModel model = obtain_model(m, ctx);
    const DatasetSpec& ds = m.dataset;

    SamplerSettings s = base_settings(o, 64);
    const Arm euler = run_arm("euler", model.net, ds, s, ctx);
    s.plan = treatment_plan(early_plan(), o);
    s.tau = kTau;
    const Arm pnp = run_arm("pnp", model.net, ds, s, ctx, {}, true);

    SuiteReport rep{"jitter", {}};
    const auto& je = find_metric(euler.reports, "temporal_jitter");
    const auto& jp = find_metric(pnp.reports, "temporal_jitter");
    rep.criteria.push_back({"jitter_not_higher", jp.mean <= je.mean, jp.mean - je.mean, 0.0,
                            "jitter pnp " + num(jp.mean) + " vs euler " + num(je.mean) + " px"});
    if (pnp.localization.empty()) {
        rep.criteria.push_back({"mask_localization", false, 0.0, 1.0, "plan is empty; no mask to localise"});
    } else {
        const double ratio = find_metric(pnp.reports, "mask_localization").mean;
        double on = 0.0;
        for (const auto& l : pnp.localization) on += l.mask.matrix().mean() / static_cast<double>(pnp.localization.size());
        rep.criteria.push_back({"mask_localization", ratio > 1.0, ratio, 1.0,
                                "inside/outside tube mask mean; masked share " + num(on)});
    }

    write_text(ctx.out / "paired.csv", paired_csv(euler.reports, pnp.reports));
    Json config{{"suite", rep.suite},
                {"model", m.to_json()},
                {"model_fingerprint", m.fingerprint()},
                {"arms", arms_json({&euler, &pnp})},
                {"experiment", {{"tau", kTau}}}};
    write_common(ctx, config, concat(euler, pnp), rep);
    return rep;
}

/// Runs every cell, keeping the sample runs by settings fingerprint.
struct AblationRun {
    AblationGrid grid;
    std::map<std::string, std::vector<SampleRun>> runs;
    std::map<std::string, SamplerSettings> settings;
};

AblationRun ablate(AblationAxis axis, const std::vector<double>& values, const SamplerSettings& base,
                   const VectorFieldNet& net, const DatasetSpec& ds, const Context& ctx) {
    AblationRun out;
    out.grid = run_ablation(axis, values, base, [&](const SamplerSettings& s) {
        ctx.info(to_string(axis) + " cell: plan '" + s.plan.str() + "', tau " + num(s.tau));
        auto runs = sample_seeds(net, s, LogLevel::none, ctx.jobs);
        MetricReport r = find_metric(evaluate_runs(ds, seed_samples(runs), s.fingerprint()), "manifold_distance");
        out.runs[s.fingerprint()] = std::move(runs);
        out.settings[s.fingerprint()] = s;
        return r;
    });
    return out;
}

void write_ablation(const Context& ctx, const AblationRun& a, const std::string& x_label) {
    write_text(ctx.out / "ablation.csv", ablation_csv(a.grid));
    std::vector<MetricReport> reports;
    std::vector<double> xs, ys;
    for (const auto& c : a.grid.cells) {
        if (!c.report) continue;
        reports.push_back(*c.report);
        xs.push_back(c.value);
        ys.push_back(c.report->mean);
    }
    write_text(ctx.out / "ablation.svg",
               line_plot_svg(to_string(a.grid.axis) + " ablation", x_label, "manifold distance", {{"mean", xs, ys}}));
}

Criterion cells_complete(const AblationRun& a) {
    std::size_t failed = 0;
    std::string detail;
    for (const auto& c : a.grid.cells) {
        if (c.report) continue;
        ++failed;
        detail += "value " + num(c.value) + ": " + c.error + "; ";
    }
    bool nfe_ok = true;
    for (const auto& [fp, runs] : a.runs) {
        const SamplerSettings& s = a.settings.at(fp);
        const std::uint64_t expect = nfe_total(s.schedule, s.plan, s.counting, s.cfg.enabled);
        for (const auto& r : runs) nfe_ok = nfe_ok && r.nfe_used == expect;
    }
    if (!nfe_ok) detail += "nfe mismatch";
    return {"cells_complete_nfe_exact", failed == 0 && nfe_ok, static_cast<double>(failed), 0.0,
            detail.empty() ? "every cell ran with T + sum K evaluations" : detail};
}

Json ablation_config(const std::string& suite, const ModelConfig& m, const AblationRun& a, const SamplerSettings& base,
                     const std::vector<double>& values) {
    return {{"suite", suite},
            {"model", m.to_json()},
            {"model_fingerprint", m.fingerprint()},
            {"axis", to_string(a.grid.axis)},
            {"values", values},
            {"base", base.to_json()}};
}

SuiteReport ablate_kf(const SuiteOptions& o, const Context& ctx) {
    const std::vector<double> values{0, 1, 3};
    const ModelConfig m = point_model(DatasetKind::sine2d);
    const TrainedModel model = obtain_model(m, ctx);
    SamplerSettings base = base_settings(o, 2000);
    base.plan = early_plan();
    const AblationRun a = ablate(AblationAxis::iterations, values, base, model.net, m.dataset, ctx);

    SuiteReport rep{"ablate-kf", {cells_complete(a)}};
    std::vector<double> means;
    for (const auto& c : a.grid.cells) means.push_back(c.report ? c.report->mean : std::nan(""));
    bool monotone = true;
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < means.size(); ++k) {
        monotone = monotone && means[k] <= means[k - 1];
        worst = std::max(worst, means[k] - means[k - 1]);
    }
    std::string detail = "distance at K=";
    for (std::size_t k = 0; k < means.size(); ++k) detail += num(values[k]) + ": " + num(means[k]) + (k + 1 < means.size() ? ", " : "");
    rep.criteria.push_back({"distance_non_increasing", monotone, worst, 0.0, detail});

    write_ablation(ctx, a, "K");
    write_json(ctx.out / "config.json", ablation_config(rep.suite, m, a, base, values));
    write_text(ctx.out / "criteria.csv", criteria_csv(rep));
    return rep;
}

SuiteReport ablate_tau(const SuiteOptions& o, const Context& ctx) {
    const ModelConfig m = point_model(DatasetKind::sine2d);
    const TrainedModel model = obtain_model(m, ctx);
    SamplerSettings base = base_settings(o, 2000);
    base.plan = early_plan();

    // Reference endpoints: unmasked P&P (tau = -1) and plain Euler. The largest map of a run that never
    // masks (tau = inf) is the largest value such a run can see, so any tau above it must reproduce Euler.
    SamplerSettings unmasked = base;
    unmasked.tau = -1.0;
    const auto unmasked_runs = sample_seeds(model.net, unmasked, LogLevel::none, ctx.jobs);
    SamplerSettings never = base;
    never.tau = std::numeric_limits<double>::infinity();
    double tau_max = 0.0;
    for (const auto& r : sample_seeds(model.net, never, LogLevel::planned, ctx.jobs))
        for (const auto& step : r.log)
            for (const auto& u : step.uncertainty) tau_max = std::max(tau_max, u.matrix().maxCoeff());
    SamplerSettings euler = base;
    euler.plan = PnPPlan();
    const auto euler_runs = sample_seeds(model.net, euler, LogLevel::none, ctx.jobs);

    const std::vector<double> values{0.0, 0.25, 2.0 * tau_max};
    const AblationRun a = ablate(AblationAxis::tau, values, base, model.net, m.dataset, ctx);

    auto same_samples = [](const std::vector<SampleRun>& x, const std::vector<SampleRun>& y) {
        if (x.size() != y.size()) return false;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (!(x[i].samples == y[i].samples)) return false;
        return true;
    };
    auto cell_runs = [&](double v) -> const std::vector<SampleRun>* {
        const auto it = a.runs.find(apply_axis(AblationAxis::tau, v, base).fingerprint());
        return it == a.runs.end() ? nullptr : &it->second;
    };

    SuiteReport rep{"ablate-tau", {cells_complete(a)}};
    const auto* zero = cell_runs(0.0);
    rep.criteria.push_back({"tau_zero_is_unmasked", zero && same_samples(*zero, unmasked_runs), 0.0, 0.0,
                            "tau=0 samples bit-identical to unmasked P&P"});
    const auto* high = cell_runs(values.back());
    rep.criteria.push_back({"tau_above_max_is_euler", high && same_samples(*high, euler_runs), values.back(), tau_max,
                            "tau=2x max uncertainty (" + num(tau_max) + ") samples bit-identical to Euler"});

    write_ablation(ctx, a, "tau");
    Json config = ablation_config(rep.suite, m, a, base, values);
    config["tau_max"] = tau_max;
    write_json(ctx.out / "config.json", config);
    write_text(ctx.out / "criteria.csv", criteria_csv(rep));
    return rep;
}

SuiteReport ablate_alpha(const SuiteOptions& o, const Context& ctx) {
    const std::vector<double> values{0.1, 0.2, 0.4, 0.6};
    const ModelConfig m = point_model(DatasetKind::sine2d);
    const TrainedModel model = obtain_model(m, ctx);
    SamplerSettings base = base_settings(o, 2000);
    base.plan = early_plan();
    const AblationRun a = ablate(AblationAxis::coverage, values, base, model.net, m.dataset, ctx);

    SuiteReport rep{"ablate-alpha", {cells_complete(a)}};
    write_ablation(ctx, a, "coverage");
    write_json(ctx.out / "config.json", ablation_config(rep.suite, m, a, base, values));
    write_text(ctx.out / "criteria.csv", criteria_csv(rep));
    return rep;
}

}  // namespace

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& e : entries()) n.push_back(e.name);
        return n;
    }();
    return names;
}

std::string suite_description(const std::string& name) { return entry(name).description; }

SuiteReport run_suite(const std::string& name, const SuiteOptions& opts, const Context& ctx) {
    const SuiteEntry& e = entry(name);
    if (opts.iterations && !e.takes_iterations) throw ConfigError("--iterations: suite " + name + " sweeps K itself");
    std::filesystem::create_directories(ctx.out);
    if (name == "toy-sine") return toy_sine(opts, ctx);
    if (name == "mode-seek") return mode_seek(opts, ctx);
    if (name == "jitter") return jitter(opts, ctx);
    if (name == "ablate-kf") return ablate_kf(opts, ctx);
    if (name == "ablate-tau") return ablate_tau(opts, ctx);
    return ablate_alpha(opts, ctx);
}

std::string criteria_csv(const SuiteReport& report) {
    std::ostringstream os;
    os << kCriteriaSchema << "\ncriterion,passed,value,threshold,detail\n";
    for (const auto& c : report.criteria) {
        std::string detail = c.detail;
        std::replace(detail.begin(), detail.end(), ',', ';');
        os << c.id << ',' << (c.passed ? "true" : "false") << ',' << format_double(c.value) << ','
           << format_double(c.threshold) << ',' << detail << '\n';
    }
    return os.str();
}

std::string criteria_table(const SuiteReport& report) {
    auto brief = [](double v) {
        std::ostringstream s;
        s << std::setprecision(5) << v;
        return s.str();
    };
    std::size_t width = 9;
    for (const auto& c : report.criteria) width = std::max(width, c.id.size());
    std::ostringstream os;
    os << "suite " << report.suite << '\n';
    os << std::left << std::setw(static_cast<int>(width)) << "criterion" << "  status  "
       << std::setw(12) << "value" << std::setw(12) << "threshold" << "detail\n";
    for (const auto& c : report.criteria) {
        os << std::setw(static_cast<int>(width)) << c.id << "  " << (c.passed ? "PASS    " : "FAIL    ")
           << std::setw(12) << brief(c.value) << std::setw(12) << brief(c.threshold) << c.detail << '\n';
    }
    os << (report.passed() ? "all criteria passed\n" : "some criteria failed\n");
    return os.str();
}

}  // namespace pnp::cli
