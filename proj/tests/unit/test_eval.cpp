#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "doctest.h"

#include "pnplab/errors.hpp"
#include "pnplab/eval.hpp"

using namespace pnp;

namespace {

Batch points(const std::vector<Point2>& xs) {
    Batch b(kPointShape, xs.size());
    for (std::size_t j = 0; j < xs.size(); ++j) b.matrix().col(static_cast<Eigen::Index>(j)) << xs[j][0], xs[j][1];
    return b;
}

Batch clips_with_jitter(const MovingDotParams& p, std::size_t n, double sigma, std::uint64_t seed) {
    RngStream rng(seed);
    Batch out(p.shape(), n);
    for (std::size_t j = 0; j < n; ++j) {
        Trajectory path = bouncing_trajectory(p, {rng.uniform(4, 11), rng.uniform(4, 11)}, {rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4)});
        for (auto& c : path) {
            c[0] += sigma * rng.normal();
            c[1] += sigma * rng.normal();
        }
        out.set_sample(j, render_clip(p, path));
    }
    return out;
}

}  // namespace

TEST_CASE("metric report summary") {
    const auto r = MetricReport::from_values("m", "fp", {1, 2, 3}, {1.0, 2.0, 3.0}, 30);
    CHECK(r.mean == 2.0);
    CHECK(r.stddev == doctest::Approx(1.0));
    CHECK(MetricReport::from_values("m", "fp", {1}, {5.0}, 1).stddev == 0.0);
}

TEST_CASE("manifold metric") {
    const auto oracle = ManifoldOracle::for_dataset(DatasetSpec::defaults(DatasetKind::sine2d));
    std::vector<Point2> on;
    for (int i = 0; i < 200; ++i) {
        const double x = -3.0 + 0.03 * i;
        on.push_back({x, std::sin(x)});
    }
    const std::vector<SeedSamples> exact{{1, points(on)}, {2, points(on)}};
    const auto base = manifold_metric(exact, oracle);
    CHECK(base.mean <= oracle.discretization_bound());
    CHECK(base.sample_count == 400);

    for (double d : {0.01, 0.05, 0.2}) {
        std::vector<Point2> moved = on;
        for (auto& p : moved) p[1] += d;
        const std::vector<SeedSamples> shifted{{1, points(moved)}};
        const double grown = manifold_metric(shifted, oracle).mean - base.mean;
        MESSAGE("offset " << d << " raises the mean distance by " << grown);
        CHECK(grown <= d + oracle.discretization_bound());
        CHECK(grown > 0.0);
    }

    SUBCASE("mixture translation is exact") {
        const auto g = ManifoldOracle::for_dataset(DatasetSpec::defaults(DatasetKind::gmm2d));
        std::vector<Point2> at = g.centers();
        for (auto& p : at) p[0] += 0.3;
        const std::vector<SeedSamples> runs{{1, points(at)}};
        CHECK(manifold_metric(runs, g).mean == doctest::Approx(0.3).epsilon(1e-12));
    }
    const std::vector<SeedSamples> wrong{{1, Batch(Shape{1, 1, 1, 3}, 2)}};
    CHECK_THROWS_AS(manifold_metric(wrong, oracle), UsageError);
}

TEST_CASE("mode concentration") {
    const auto oracle = ManifoldOracle::for_dataset(DatasetSpec::defaults(DatasetKind::gmm2d));
    const std::vector<SeedSamples> centers{{1, points(oracle.centers())}};
    const auto c = mode_concentration(centers, oracle, 0.3);
    CHECK(c.fraction.mean == 1.0);
    CHECK(c.entropy.mean <= std::log(8.0) + 1e-12);
    CHECK(c.entropy.mean == doctest::Approx(std::log(8.0)));

    std::vector<Point2> ring;
    for (int k = 0; k < 64; ++k) {
        const double a = 2 * std::numbers::pi * k / 64.0;
        ring.push_back({5.0 * std::cos(a), 5.0 * std::sin(a)});
    }
    const std::vector<SeedSamples> far{{1, points(ring)}};
    CHECK(mode_concentration(far, oracle, 0.3).fraction.mean == 0.0);

    const std::vector<SeedSamples> one_mode{{1, points({{3, 0}, {3.1, 0}, {2.9, 0.1}})}};
    CHECK(mode_concentration(one_mode, oracle, 0.3).entropy.mean == 0.0);

    CHECK_THROWS_AS(mode_concentration(centers, oracle, 0.0), UsageError);
    const auto sine = ManifoldOracle::for_dataset(DatasetSpec::defaults(DatasetKind::sine2d));
    CHECK_THROWS_AS(mode_concentration(centers, sine, 0.3), UsageError);
}

TEST_CASE("jitter metric") {
    const MovingDotParams p;
    const std::vector<SeedSamples> clean{{1, clips_with_jitter(p, 32, 0.0, 3)}};
    const auto base = jitter_metric(clean, p);
    CHECK(base.jitter.mean <= jitter_rendering_bound(p));
    CHECK(base.excluded == 0);

    double prev = base.jitter.mean;
    for (double sigma : {0.2, 0.5}) {
        const std::vector<SeedSamples> noisy{{1, clips_with_jitter(p, 32, sigma, 3)}};
        const double j = jitter_metric(noisy, p).jitter.mean;
        CHECK(j > prev);
        prev = j;
    }

    Batch with_blank = clean[0].samples;
    Grid blank = with_blank.sample(0);
    for (std::size_t k = 0; k < p.height * p.width; ++k) blank[k] = 0.0;
    with_blank.set_sample(0, blank);
    const std::vector<SeedSamples> partial{{1, with_blank}};
    const auto r = jitter_metric(partial, p);
    CHECK(r.excluded == 1);
    CHECK(r.jitter.sample_count == 31);
}

TEST_CASE("mask localization") {
    const MovingDotParams p;
    const Batch clips = clips_with_jitter(p, 4, 0.0, 5);
    const Batch ones(p.shape(), 4, 1.0);
    const std::vector<LocalizationInput> all_on{{1, ones, clips}};
    CHECK(mask_localization(all_on, p).mean == 1.0);

    Batch tube_mask(p.shape(), 4);
    for (std::size_t j = 0; j < 4; ++j) tube_mask.set_sample(j, trajectory_tube(clips.sample(j), p.radius));
    const std::vector<LocalizationInput> exact{{1, tube_mask, clips}};
    CHECK(mask_localization(exact, p).mean == std::numeric_limits<double>::infinity());

    Batch inverse(p.shape(), tube_mask.matrix().unaryExpr([](double v) { return 1.0 - v; }));
    const std::vector<LocalizationInput> outside{{1, inverse, clips}};
    CHECK(mask_localization(outside, p).mean == 0.0);

    const std::vector<LocalizationInput> none{{1, Batch(p.shape(), 4), clips}};
    CHECK(mask_localization(none, p).mean == 1.0);
    CHECK_THROWS_AS(mask_localization(std::vector<LocalizationInput>{}, p), UsageError);

    SUBCASE("tube covers the dot") {
        const Grid tube = trajectory_tube(clips.sample(0), p.radius);
        const Grid clip = clips.sample(0);
        for (std::size_t k = 0; k < clip.size(); ++k)
            if (clip[k] > 0.5) CHECK(tube[k] == 1.0);
    }
}

TEST_CASE("sampler settings fingerprint") {
    SamplerSettings a;
    SamplerSettings b = a;
    CHECK(a.fingerprint() == b.fingerprint());
    b.tau = 0.25;
    CHECK(a.fingerprint() != b.fingerprint());
    b = a;
    b.plan = PnPPlan::parse("3-9:3");
    CHECK(a.fingerprint() != b.fingerprint());
    b = a;
    b.seeds = {1, 2};
    CHECK(a.fingerprint() != b.fingerprint());
    CHECK(a.fingerprint().size() == 16);
}

TEST_CASE("ablation axes") {
    SamplerSettings base;
    base.plan = PnPPlan::parse("3-9:3");
    CHECK(apply_axis(AblationAxis::iterations, 0, base).plan.empty());
    CHECK(apply_axis(AblationAxis::iterations, 5, base).plan == PnPPlan::parse("3-9:5"));
    CHECK(apply_axis(AblationAxis::tau, 0.5, base).tau == 0.5);
    CHECK(apply_axis(AblationAxis::coverage, 0.4, base).plan == PnPPlan::parse("3-19:3"));
    const auto cfg = apply_axis(AblationAxis::cfg_scale, 3, base).cfg;
    CHECK(cfg.scale == 3.0);
    CHECK(cfg.enabled);
    CHECK_THROWS_AS(apply_axis(AblationAxis::iterations, 1.5, base), ConfigError);
    CHECK(parse_ablation_axis(to_string(AblationAxis::coverage)) == AblationAxis::coverage);
    CHECK_THROWS_AS(parse_ablation_axis("nope"), ConfigError);
}

TEST_CASE("ablation grid on a random net") {
    NetArchitecture arch;
    arch.hidden = {16, 16};
    RngStream init(3);
    const VectorFieldNet net = VectorFieldNet::initialized(arch, init);
    const auto oracle = ManifoldOracle::for_dataset(DatasetSpec::defaults(DatasetKind::sine2d));
    SamplerSettings base;
    base.schedule = Schedule::uniform(20);
    base.plan = PnPPlan::parse("2-5:3");
    base.n = 64;
    base.seeds = {1, 2};

    std::vector<Batch> last;
    const CellRunner runner = [&](const SamplerSettings& s) {
        std::vector<SeedSamples> runs;
        for (auto seed : s.seeds) runs.push_back({seed, sample(net, s.schedule, s.plan, s.tau, s.cfg, s.n, RngStream(seed)).samples});
        last.push_back(runs[0].samples);
        return manifold_metric(runs, oracle, s.fingerprint());
    };

    SUBCASE("single value equals a direct run") {
        const std::vector<double> one{0.25};
        const auto grid = run_ablation(AblationAxis::tau, one, base, runner);
        REQUIRE(grid.cells.size() == 1);
        const auto direct = runner(apply_axis(AblationAxis::tau, 0.25, base));
        CHECK(grid.cells[0].report->values == direct.values);
        CHECK(grid.cells[0].report->fingerprint == direct.fingerprint);
    }
    SUBCASE("tau endpoints reproduce the sampler boundaries") {
        const std::vector<double> taus{0.0, 0.25, 1e9};
        run_ablation(AblationAxis::tau, taus, base, runner);
        REQUIRE(last.size() == 3);
        CHECK(last[0] == sample(net, base.schedule, base.plan, -1.0, {}, 64, RngStream(1)).samples);
        CHECK(last[2] == sample(net, base.schedule, {}, -1.0, {}, 64, RngStream(1)).samples);
    }
    SUBCASE("failing cells leave a gap") {
        const std::vector<double> ks{1, 2.5, 3};
        const auto grid = run_ablation(AblationAxis::iterations, ks, base, runner);
        CHECK(grid.cells[0].report.has_value());
        CHECK(!grid.cells[1].report.has_value());
        CHECK(!grid.cells[1].error.empty());
        CHECK(grid.cells[2].report.has_value());
        const std::string csv = ablation_csv(grid);
        CHECK(csv.rfind(std::string(kAblationSchema) + "\naxis,axis_value,fingerprint,seed,metric,value,error\n", 0) == 0);
        CHECK(csv.find("K_f,2.5,") != std::string::npos);
    }
    CHECK_THROWS_AS(run_ablation(AblationAxis::tau, std::vector<double>{}, base, runner), UsageError);
}

TEST_CASE("csv round trip") {
    const std::vector<MetricReport> reports{
        MetricReport::from_values("manifold_distance", "abc", {1, 2}, {0.1, 1.0 / 3.0}, 10),
        MetricReport::from_values("nfe", "abc", {1}, {60}, 1)};
    const std::string text = metrics_csv(reports);
    CHECK(text.rfind(std::string(kMetricsSchema) + "\nfingerprint,seed,metric,value\n", 0) == 0);
    const auto rows = parse_metrics_csv(text);
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].value == 1.0 / 3.0);
    CHECK(rows[2].metric == "nfe");
    CHECK(rows[1].seed == 2);

    std::string other = text;
    other.replace(other.find("v1"), 2, "v2");
    CHECK_THROWS_AS(parse_metrics_csv(other), LoadError);
    CHECK_THROWS_AS(parse_metrics_csv("fingerprint,seed,metric,value\n"), LoadError);

    for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 123.0}) CHECK(std::stod(format_double(v)) == v);
}
