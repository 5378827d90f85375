// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Usage: acceptance --work-dir <dir> [--jobs N] [--properties-only]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "pnplab/cli/suites.hpp"
#include "pnplab/flow_matching.hpp"
#include "pnplab/sampler.hpp"

using namespace pnp;
using namespace pnp::cli;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool passed = false;
    std::string detail;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

int failures = 0;

void report(int id, const std::string& name, const Outcome& o, double seconds, double budget) {
    const bool in_budget = seconds < budget;
    const bool ok = o.passed && in_budget;
    if (!ok) ++failures;
    std::cout << "criterion " << id << " " << (ok ? "PASS" : "FAIL") << "  " << name << ": " << o.detail << " ["
              << fmt(seconds) << " s of " << fmt(budget) << " s" << (in_budget ? "" : ", over budget") << "]"
              << std::endl;
}

Outcome fm_dae_identity() {
    RngStream rng(2024);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        RngStream r = rng.split(static_cast<std::uint64_t>(trial));
        NetArchitecture arch;
        arch.hidden = {1 + r.index(32), 1 + r.index(32)};
        arch.activation = static_cast<Activation>(r.index(3));
        if (r.index(2) == 1) {
            arch.num_classes = 5;
            arch.cond_dim = 4;
        }
        const VectorFieldNet net = VectorFieldNet::initialized(arch, r);
        const std::size_t n = 1 + r.index(32);
        Batch z1(kPointShape, n), z0(kPointShape, n);
        std::vector<double> t(n);
        std::vector<int> cond;
        for (std::size_t j = 0; j < n; ++j) {
            z1.matrix().col(static_cast<Eigen::Index>(j)) << r.uniform(-4, 4), r.uniform(-4, 4);
            z0.matrix().col(static_cast<Eigen::Index>(j)) << r.normal(), r.normal();
            t[j] = r.uniform(0.01, 0.99);
            if (arch.conditional()) cond.push_back(static_cast<int>(r.index(6)) - 1);
        }
        const PathSample s = make_path_sample_at(z1, cond, z0, t);
        const double fm = fm_loss(net, s), dae = dae_loss_weighted(net, s);
        worst = std::max(worst, std::abs(fm - dae) / std::max(std::abs(fm), 1e-300));
    }
    return {worst <= 1e-9, "worst relative gap " + fmt(worst) + " over 1000 trials (limit 1e-9)"};
}

Outcome gradient_oracle() {
    const double h = 1e-5;
    RngStream rng(4048);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        NetArchitecture arch;
        arch.grid_shape = trial % 3 == 0 ? Shape{2, 2, 2, 1} : kPointShape;
        arch.hidden = {12, 10};
        arch.time_features = 6;
        arch.activation = static_cast<Activation>(trial % 3);
        if (trial % 2 == 0) {
            arch.num_classes = 3;
            arch.cond_dim = 2;
        }
        auto net = VectorFieldNet::initialized(arch, rng);
        Batch z(arch.grid_shape, 2), v(arch.grid_shape, 2);
        rng.fill_normal({z.matrix().data(), static_cast<std::size_t>(z.matrix().size())});
        rng.fill_normal({v.matrix().data(), static_cast<std::size_t>(v.matrix().size())});
        const std::vector<double> t{rng.uniform(), rng.uniform()};
        std::vector<int> cond;
        if (arch.conditional()) cond = {static_cast<int>(rng.index(4)) - 1, static_cast<int>(rng.index(4)) - 1};
        const auto lg = loss_and_gradients(net, z, t, v, cond);

        const std::size_t tensor = rng.index(net.parameters().size());
        auto& p = net.parameters()[tensor];
        const auto idx = static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(p.size())));
        const double saved = p.data()[idx];
        p.data()[idx] = saved + h;
        const double up = loss_and_gradients(net, z, t, v, cond).loss;
        p.data()[idx] = saved - h;
        const double down = loss_and_gradients(net, z, t, v, cond).loss;
        p.data()[idx] = saved;
        const double fd = (up - down) / (2.0 * h);
        const double an = lg.gradients[tensor].data()[idx];
        worst = std::max(worst, std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-6}));
    }
    return {worst <= 1e-4, "worst relative error " + fmt(worst) + " over 100 checks (limit 1e-4)"};
}

Outcome equivalences() {
    const Schedule sched = Schedule::uniform(30);
    const PnPPlan plan = PnPPlan::parse("2-6:3,10-12:2");
    std::vector<std::string> broken;
    for (const Shape& shape : {kPointShape, Shape{3, 4, 4, 1}}) {
        NetArchitecture arch;
        arch.grid_shape = shape;
        arch.hidden = {24, 24};
        RngStream init(9);
        const VectorFieldNet net = VectorFieldNet::initialized(arch, init);
        const RngStream rng(314);
        const std::size_t n = 24;

        FieldEvaluator field(net);
        Batch z = initial_noise(shape, n, rng);
        Batch unmasked = z;
        for (std::size_t i = 0; i < sched.steps(); ++i) {
            z = euler_step(field, z, sched[i], sched[i + 1]).next;
            const std::size_t k = plan.iterations_at(i);
            unmasked = k == 0 ? euler_step(field, unmasked, sched[i], sched[i + 1]).next
                              : refined_euler_step(field, unmasked, sched[i], sched[i + 1], k, rng.split(i));
        }
        const Batch& euler = z;
        const std::string tag = " (" + shape.str() + ")";
        if (!(sample(net, sched, {}, 0.3, {}, n, rng).samples == euler)) broken.push_back("empty plan" + tag);

        // Maps of a run that never masks; any tau above their maximum keeps that run unmasked.
        const double inf = std::numeric_limits<double>::infinity();
        const SampleRun kept = sample(net, sched, plan, inf, {}, n, rng, {NfeCounting::per_call, LogLevel::planned});
        double top = 0.0;
        for (const auto& s : kept.log)
            for (const auto& u : s.uncertainty) top = std::max(top, u.matrix().maxCoeff());
        if (!(sample(net, sched, plan, std::nextafter(top, inf), {}, n, rng).samples == euler))
            broken.push_back("tau above max" + tag);
        if (!(sample(net, sched, plan, 0.0, {}, n, rng).samples == unmasked)) broken.push_back("tau=0" + tag);
        if (!(sample(net, sched, plan, -0.5, {}, n, rng).samples == unmasked)) broken.push_back("tau<0" + tag);

        FieldEvaluator f1(net), f2(net);
        const Batch start = initial_noise(shape, n, rng.split(5));
        if (!(refined_euler_step(f1, start, sched[4], sched[5], 0, rng.split(4)) ==
              euler_step(f2, start, sched[4], sched[5]).next))
            broken.push_back("K=0 step" + tag);
    }
    std::string detail = "empty plan, tau above max map, tau <= 0 and K=0 on point and video shapes";
    for (const auto& b : broken) detail += "; differs: " + b;
    return {broken.empty(), detail};
}

Outcome nfe_exactness() {
    NetArchitecture arch;
    arch.hidden = {8, 8};
    arch.num_classes = 3;
    arch.cond_dim = 2;
    RngStream init(3);
    const VectorFieldNet net = VectorFieldNet::initialized(arch, init);
    RngStream gen(99);
    std::size_t mismatched = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t steps = 1 + gen.index(60);
        const Schedule sched = gen.index(2) == 0 ? Schedule::uniform(steps) : Schedule::shifted(steps, gen.uniform(0.5, 5.0));
        std::vector<PlanRange> ranges;
        std::size_t at = gen.index(4);
        while (at < steps && ranges.size() < 5) {
            const std::size_t last = std::min(steps - 1, at + gen.index(8));
            ranges.push_back({at, last, 1 + gen.index(5)});
            at = last + 1 + gen.index(6);
        }
        const PnPPlan plan(ranges);
        const bool cfg_on = gen.index(2) == 1;
        const NfeCounting mode = gen.index(2) == 0 ? NfeCounting::per_call : NfeCounting::per_pass;
        FieldEvaluator field(net, CfgSpec{cfg_on, 3.0, 2});
        const Batch z0 = initial_noise(kPointShape, 3, RngStream(static_cast<std::uint64_t>(trial)));
        const SampleRun run = sample_from(field, sched, plan, gen.uniform(-0.5, 0.5), z0, RngStream(7), {mode, LogLevel::none});
        const std::uint64_t expect = nfe_total(sched, plan, mode, cfg_on);
        if (field.nfe(mode) != expect || run.nfe_used != expect) ++mismatched;
    }
    const Schedule t40 = Schedule::uniform(40);
    const PnPPlan ref = PnPPlan::parse("3-6:3,7-14:1");
    const std::uint64_t base = nfe_total(t40, {}, NfeCounting::per_call, false);
    const std::uint64_t with = nfe_total(t40, ref, NfeCounting::per_call, false);
    FieldEvaluator field(net);
    const SampleRun counted =
        sample_from(field, t40, ref, -1.0, initial_noise(kPointShape, 2, RngStream(1)), RngStream(1), {});
    const bool ref_ok = base == 40 && with == 60 && counted.nfe_used == 60 && field.calls() == 60;
    return {mismatched == 0 && ref_ok, std::to_string(mismatched) + " of 100 random pairs mismatched; reference plan " +
                                           std::to_string(base) + " -> " + std::to_string(counted.nfe_used) + " NFE"};
}

std::map<std::string, std::string> tree_bytes(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream os;
        os << in.rdbuf();
        files[fs::relative(e.path(), dir).generic_string()] = os.str();
    }
    return files;
}

Outcome from_criteria(const SuiteReport& r, std::initializer_list<const char*> ids) {
    Outcome o{true, ""};
    for (const char* id : ids) {
        const Criterion& c = r.at(id);
        o.passed = o.passed && c.passed;
        if (!o.detail.empty()) o.detail += "; ";
        o.detail += std::string(id) + " " + (c.passed ? "ok" : "failed") + " (" + c.detail + ")";
    }
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria 1-11"};
    std::string work_dir = "acceptance_work";
    std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
    app.add_option("--work-dir", work_dir, "Scratch directory; cleared at start");
    app.add_option("--jobs", jobs, "Parallel worker slots")->check(CLI::PositiveNumber);
    bool properties_only = false;
    app.add_flag("--properties-only", properties_only, "Run criteria 1-4 only; 5-11 are reported as skipped");
    CLI11_PARSE(app, argc, argv);

    const fs::path work(work_dir);
    fs::remove_all(work);
    fs::create_directories(work);

    auto timed = [](const std::function<Outcome()>& fn, double& seconds) {
        const auto t0 = Clock::now();
        Outcome o = fn();
        seconds = seconds_since(t0);
        return o;
    };
    double s = 0.0;
    Outcome o = timed(fm_dae_identity, s);
    report(1, "fm/dae identity", o, s, 10);
    o = timed(gradient_oracle, s);
    report(2, "gradient oracle", o, s, 30);
    o = timed(equivalences, s);
    report(3, "boundary equivalences", o, s, 10);
    o = timed(nfe_exactness, s);
    report(4, "nfe exactness", o, s, 5);

    if (properties_only) {
        for (int id = 5; id <= 11; ++id) std::cout << "criterion " << id << " SKIP  not run (--properties-only)\n";
        std::cout << (failures == 0 ? "criteria 1-4 passed" : std::to_string(failures) + " criteria failed") << std::endl;
        return failures == 0 ? 0 : 1;
    }

    std::ostringstream suite_log;
    auto run = [&](const std::string& suite, const fs::path& root, double& seconds) {
        Context ctx;
        ctx.out = root / suite;
        ctx.cache_dir = work / "cache";
        ctx.jobs = jobs;
        ctx.verbosity = Verbosity::quiet;
        ctx.log = &suite_log;
        const auto t0 = Clock::now();
        SuiteReport r = run_suite(suite, {}, ctx);
        seconds = seconds_since(t0);
        return r;
    };

    std::map<std::string, SuiteReport> first;
    std::map<std::string, double> first_seconds, second_seconds;
    for (const auto& suite : suite_names()) first[suite] = run(suite, work / "run1", first_seconds[suite]);
    for (const auto& suite : suite_names()) run(suite, work / "run2", second_seconds[suite]);

    const SuiteReport& sine = first.at("toy-sine");
    report(5, "sine2d manifold distance", from_criteria(sine, {"manifold_ratio", "nfe_exact"}),
           first_seconds.at("toy-sine"), 15 * 60);
    // The cached rerun bounds the chain cost from above: it also samples both arms.
    report(6, "endpoint pull at fixed t", from_criteria(sine, {"endpoint_pull"}), second_seconds.at("toy-sine"), 60);
    report(7, "mode seeking", from_criteria(first.at("mode-seek"), {"concentration_margin", "entropy_not_higher"}),
           first_seconds.at("mode-seek"), 5 * 60);
    report(8, "endpoint convergence", from_criteria(sine, {"endpoint_convergence"}), second_seconds.at("toy-sine"), 60);
    report(9, "temporal jitter", from_criteria(first.at("jitter"), {"jitter_not_higher"}), first_seconds.at("jitter"),
           30 * 60);
    report(10, "mask localisation", from_criteria(first.at("jitter"), {"mask_localization"}), first_seconds.at("jitter"),
           30 * 60);

    const auto t0 = Clock::now();
    std::vector<std::string> differing;
    for (const auto& suite : suite_names()) {
        const auto a = tree_bytes(work / "run1" / suite), b = tree_bytes(work / "run2" / suite);
        if (a != b) differing.push_back(suite);
    }
    Outcome det{differing.empty(), "six suites rerun against the cached checkpoints"};
    for (const auto& d : differing) det.detail += "; differs: " + d;
    double rerun = seconds_since(t0);
    for (const auto& [name, sec] : second_seconds) rerun += sec;
    report(11, "determinism", det, rerun, std::numeric_limits<double>::infinity());

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
