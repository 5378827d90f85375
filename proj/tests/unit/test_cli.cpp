#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "pnplab/checkpoint.hpp"
#include "pnplab/cli/commands.hpp"
#include "pnplab/cli/grid_container.hpp"
#include "pnplab/cli/pipeline.hpp"
#include "pnplab/cli/suites.hpp"
#include "pnplab/cli/svg.hpp"
#include "pnplab/errors.hpp"

using namespace pnp;
using namespace pnp::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const char* root = std::getenv("PNPLAB_TEST_TMP");
    fs::path dir = fs::path(root ? root : "pnplab-test-tmp") / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path shared_cache() {
    const char* root = std::getenv("PNPLAB_TEST_TMP");
    return fs::path(root ? root : "pnplab-test-tmp") / "cache";
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult run(std::vector<std::string> args) {
    args.insert(args.begin(), "pnplab");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path write_config(const fs::path& dir, const std::string& name, const Json& j) {
    const fs::path p = dir / name;
    std::ofstream(p) << j.dump(2);
    return p;
}

Json small_model(std::size_t steps = 300) {
    return {{"dataset", {{"kind", "sine2d"}}},
            {"model", {{"hidden", {16, 16}}}},
            {"train", {{"steps", steps}, {"batch_size", 64}, {"seed", 3}}}};
}

Json with_sampler(Json j, Json sampler) {
    j["sampler"] = std::move(sampler);
    return j;
}

/// Tag-balance check: every element closes in order and there is exactly one root.
bool well_formed_xml(const std::string& doc) {
    std::vector<std::string> stack;
    std::size_t roots = 0, i = 0;
    while ((i = doc.find('<', i)) != std::string::npos) {
        const std::size_t end = doc.find('>', i);
        if (end == std::string::npos) return false;
        std::string tag = doc.substr(i + 1, end - i - 1);
        i = end + 1;
        if (tag.empty()) return false;
        if (tag[0] == '?' || tag[0] == '!') continue;
        if (tag[0] == '/') {
            if (stack.empty() || stack.back() != tag.substr(1)) return false;
            stack.pop_back();
            continue;
        }
        const bool self_closing = tag.back() == '/';
        const std::string name = tag.substr(0, tag.find_first_of(" \t\n/"));
        if (stack.empty()) ++roots;
        if (!self_closing) stack.push_back(name);
    }
    return stack.empty() && roots == 1;
}

std::map<std::string, std::string> tree_bytes(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) files[fs::relative(e.path(), dir).generic_string()] = slurp(e.path());
    return files;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST_CASE("grid container round trip and rejection") {
    GridContainer c;
    c.meta = {{"note", "x"}};
    Grid a(Shape{2, 3, 1, 1});
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = 0.5 * static_cast<double>(i) - 1.0;
    c.add("a", a);
    c.add("b", Grid(kPointShape, 7.25));
    const std::string bytes = encode_container(c);
    const GridContainer d = decode_container(bytes);
    CHECK(d.meta == c.meta);
    CHECK(d.get("a") == a);
    CHECK(d.get("b") == c.get("b"));
    CHECK(encode_container(d) == bytes);
    CHECK_THROWS_AS(d.get("missing"), LoadError);
    CHECK_THROWS_AS(c.add("a", a), UsageError);

    CHECK_THROWS_AS(decode_container(bytes.substr(0, bytes.size() - 3)), LoadError);
    CHECK_THROWS_AS(decode_container(bytes + "x"), LoadError);
    std::string bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(decode_container(bad_magic), LoadError);

    // Bump the manifest version in place; same length keeps the framing intact.
    std::string future = bytes;
    const auto pos = future.find("\"version\":1");
    REQUIRE(pos != std::string::npos);
    future[pos + 10] = '9';
    CHECK_THROWS_AS(decode_container(future), LoadError);

    const Batch b(kPointShape, 4, 1.5);
    CHECK(grid_to_batch(batch_to_grid(b), kPointShape) == b);
}

TEST_CASE("config errors exit 2 and name the key") {
    const fs::path dir = scratch("config_errors");
    Json j = with_sampler(small_model(), {{"n", 4}, {"tauu", 0.1}});
    auto r = run({"sample", "--config", write_config(dir, "bad.json", j).string(), "--out", (dir / "o").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("sampler.tauu") != std::string::npos);

    j = small_model();
    j["model"]["hiden"] = Json::array({8});
    r = run({"train", "--config", write_config(dir, "bad2.json", j).string(), "--out", (dir / "o").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("model.hiden") != std::string::npos);

    r = run({"train", "--config", (dir / "nope.json").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("nope.json") != std::string::npos);

    r = run({"train", "--bogus"});
    CHECK(r.code == 2);

    std::ofstream(dir / "broken.json") << "{ not json";
    r = run({"train", "--config", (dir / "broken.json").string()});
    CHECK(r.code == 2);
}

TEST_CASE("numeric failure exits 3") {
    const fs::path dir = scratch("numeric");
    Json j = small_model(50);
    j["train"]["learning_rate"] = 1e300;
    const auto r = run({"train", "--config", write_config(dir, "c.json", j).string(), "--out", (dir / "o").string(),
                        "--cache-dir", (dir / "cache").string()});
    CHECK(r.code == 3);
}

TEST_CASE("suite listing and unknown suite") {
    const auto r = run({"list-suites"});
    CHECK(r.code == 0);
    for (const char* name : {"toy-sine", "mode-seek", "jitter", "ablate-kf", "ablate-tau", "ablate-alpha"})
        CHECK(r.out.find(name) != std::string::npos);
    CHECK(suite_names().size() == 6);
    const fs::path dir = scratch("suite_unknown");
    CHECK(run({"repro", "--suite", "toy-moon", "--out", dir.string()}).code == 2);
    CHECK(run({"repro", "--suite", "ablate-kf", "--iterations", "2", "--out", dir.string()}).code == 2);
}

TEST_CASE("train with zero steps keeps the initial net") {
    const fs::path dir = scratch("train_zero");
    const Json j = small_model(0);
    const auto r = run({"train", "--config", write_config(dir, "c.json", j).string(), "--out", (dir / "o").string(),
                        "--cache-dir", (dir / "cache").string()});
    REQUIRE(r.code == 0);
    const VectorFieldNet net = restore_net(load_checkpoint(dir / "o" / "model.ckpt"));
    const ModelConfig m = model_config_from_json(j);
    CHECK(net == initial_net(m.architecture, 3));
    CHECK(fs::exists(dir / "cache" / (std::string("sine2d-") + m.fingerprint() + ".ckpt")));
    CHECK(fs::exists(dir / "o" / "loss.csv"));
    CHECK(fs::exists(dir / "o" / "config.json"));
}

TEST_CASE("train reruns are byte-identical; mismatched checkpoints are rejected") {
    const fs::path dir = scratch("train_rerun");
    const fs::path cfg = write_config(dir, "c.json", small_model(120));
    for (const char* out : {"a", "b"})
        REQUIRE(run({"train", "--config", cfg.string(), "--out", (dir / out).string(), "--cache-dir",
                     (dir / "cache").string()})
                    .code == 0);
    CHECK(tree_bytes(dir / "a") == tree_bytes(dir / "b"));
    CHECK(slurp(dir / "a" / "loss.csv").rfind("# schema: pnplab.loss.v1\n", 0) == 0);

    Json md{{"dataset", {{"kind", "movingdot"}}},
            {"checkpoint", (dir / "a" / "model.ckpt").string()},
            {"sampler", {{"n", 2}}}};
    const auto r = run({"sample", "--config", write_config(dir, "md.json", md).string(), "--out",
                        (dir / "md").string(), "--cache-dir", (dir / "cache").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("model.ckpt") != std::string::npos);
}

TEST_CASE("sample reports NFE, reuses the cache and is byte-deterministic") {
    const fs::path dir = scratch("sample");
    const fs::path cache = dir / "cache";
    const Json sampler{{"schedule", {{"law", "uniform"}, {"steps", 40}}}, {"n", 32}, {"seeds", {5, 6}}};
    const fs::path euler_cfg = write_config(dir, "euler.json", with_sampler(small_model(), sampler));
    Json pnp_sampler = sampler;
    pnp_sampler["plan"] = "3-6:3,7-14:1";
    pnp_sampler["tau"] = 0.05;
    pnp_sampler["log"] = "planned";
    const fs::path pnp_cfg = write_config(dir, "pnp.json", with_sampler(small_model(), pnp_sampler));

    auto nfe_rows = [](const fs::path& out) { return csv_rows(slurp(out / "nfe.csv")); };

    REQUIRE(run({"sample", "--config", euler_cfg.string(), "--out", (dir / "euler").string(), "--cache-dir",
                 cache.string()})
                .code == 0);
    auto rows = nfe_rows(dir / "euler");
    REQUIRE(rows.size() == 3);
    CHECK(rows[1][3] == "40");
    CHECK(rows[1][4] == "40");
    CHECK(fs::exists(cache));

    REQUIRE(run({"sample", "--config", pnp_cfg.string(), "--out", (dir / "pnp").string(), "--cache-dir",
                 cache.string()})
                .code == 0);
    rows = nfe_rows(dir / "pnp");
    CHECK(rows[1][2] == "20");
    CHECK(rows[1][3] == "60");
    CHECK(rows[2][3] == "60");
    CHECK(fs::exists(dir / "pnp" / "trajectory.srvgrid"));

    REQUIRE(run({"sample", "--config", pnp_cfg.string(), "--out", (dir / "pnp2").string(), "--cache-dir",
                 cache.string(), "--jobs", "2"})
                .code == 0);
    CHECK(tree_bytes(dir / "pnp") == tree_bytes(dir / "pnp2"));

    // --seed narrows the run to one seed.
    REQUIRE(run({"sample", "--config", pnp_cfg.string(), "--out", (dir / "seed").string(), "--cache-dir",
                 cache.string(), "--seed", "6"})
                .code == 0);
    const LoadedSamples one = read_samples(load_container(dir / "seed" / "samples.srvgrid"));
    const LoadedSamples two = read_samples(load_container(dir / "pnp" / "samples.srvgrid"));
    REQUIRE(one.runs.size() == 1);
    CHECK(one.runs[0].seed == 6);
    CHECK(one.runs[0].samples == two.runs[1].samples);
}

TEST_CASE("eval: oracle samples, paired deltas, plots and missing inputs") {
    const fs::path dir = scratch("eval");
    DatasetSpec spec = DatasetSpec::defaults(DatasetKind::sine2d);
    std::get<Sine2dParams>(spec.params).noise = 0.0;
    SamplerSettings s;
    s.seeds = {1, 2};
    s.n = 200;
    std::vector<SampleRun> oracle_runs, shifted_runs;
    for (std::uint64_t seed : s.seeds) {
        RngStream rng(seed);
        Batch clean = sample_dataset(spec, s.n, rng).samples;
        Batch off = clean;
        for (std::size_t i = 0; i < off.count(); ++i) off.matrix()(1, static_cast<Eigen::Index>(i)) += 0.05 * seed;
        oracle_runs.push_back({clean, {}, 0, seed});
        shifted_runs.push_back({off, {}, 0, seed});
    }
    save_container(dir / "oracle.srvgrid", samples_container(spec, s, oracle_runs));
    s.tau = 0.5;  // a different fingerprint for the second container
    save_container(dir / "shifted.srvgrid", samples_container(spec, s, shifted_runs));

    auto eval_cfg = [&](const std::string& name, Json eval) {
        return write_config(dir, name, Json{{"eval", std::move(eval)}}).string();
    };

    REQUIRE(run({"eval", "--config", eval_cfg("a.json", {{"samples", (dir / "oracle.srvgrid").string()}}), "--out",
                 (dir / "a").string()})
                .code == 0);
    const auto oracle_rows = parse_metrics_csv(slurp(dir / "a" / "metrics.csv"));
    REQUIRE(oracle_rows.size() == 2);
    const double bound = ManifoldOracle::for_dataset(spec).discretization_bound();
    for (const auto& row : oracle_rows) {
        CHECK(row.metric == "manifold_distance");
        CHECK(row.value <= bound + 1e-12);
    }
    CHECK(well_formed_xml(slurp(dir / "a" / "scatter.svg")));

    REQUIRE(run({"eval", "--config", eval_cfg("b.json", {{"samples", (dir / "shifted.srvgrid").string()}}), "--out",
                 (dir / "b").string()})
                .code == 0);
    REQUIRE(run({"eval", "--config",
                 eval_cfg("p.json", {{"samples", (dir / "shifted.srvgrid").string()},
                                     {"baseline", (dir / "oracle.srvgrid").string()}}),
                 "--out", (dir / "p").string()})
                .code == 0);

    const auto base = parse_metrics_csv(slurp(dir / "a" / "metrics.csv"));
    const auto cand = parse_metrics_csv(slurp(dir / "b" / "metrics.csv"));
    const auto paired = csv_rows(slurp(dir / "p" / "paired.csv"));
    REQUIRE(paired.size() == 4);  // header, two seeds, mean
    CHECK(paired[0] == std::vector<std::string>{"metric", "seed", "baseline", "candidate", "delta"});
    double mean = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
        const double delta = cand[i].value - base[i].value;
        CHECK(paired[i + 1][1] == std::to_string(base[i].seed));
        CHECK(std::stod(paired[i + 1][4]) == doctest::Approx(delta).epsilon(1e-12));
        CHECK(delta > 0.0);
        mean += delta / 2.0;
    }
    CHECK(paired[3][1] == "mean");
    CHECK(std::stod(paired[3][4]) == doctest::Approx(mean).epsilon(1e-12));

    const auto r = run({"eval", "--config", eval_cfg("m.json", {{"samples", (dir / "gone.srvgrid").string()}}), "--out",
                        (dir / "m").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("gone.srvgrid") != std::string::npos);

    std::ofstream(dir / "junk.srvgrid") << "SRVGRID1\nxx";
    CHECK(run({"eval", "--config", eval_cfg("j.json", {{"samples", (dir / "junk.srvgrid").string()}}), "--out",
               (dir / "j").string()})
              .code == 2);
}

TEST_CASE("svg emitters produce one well-formed root") {
    const DatasetSpec md = DatasetSpec::defaults(DatasetKind::movingdot);
    const auto& p = std::get<MovingDotParams>(md.params);
    const Grid clip = render_clip(p, bouncing_trajectory(p, {4.0, 5.0}, {1.0, 0.5}));
    Grid mask(p.shape());
    mask[3] = 1.0;
    CHECK(well_formed_xml(frame_strip_svg("clip", clip)));
    CHECK(well_formed_xml(frame_strip_svg("clip <masked> & \"quoted\"", clip, &mask)));
    CHECK(well_formed_xml(line_plot_svg("loss", "step", "value", {{"a", {0, 1, 2}, {3, 2, 1}}, {"b", {0, 2}, {1, 1}}})));
    CHECK(well_formed_xml(line_plot_svg("empty", "x", "y", {})));
    CHECK_FALSE(well_formed_xml("<svg><g></svg>"));
}

TEST_CASE("mode-seek with K forced to 0 fails the concentration criterion") {
    const fs::path dir = scratch("mode_seek_control");
    const auto r = run({"repro", "--suite", "mode-seek", "--iterations", "0", "--out", dir.string(), "--cache-dir",
                        shared_cache().string()});
    CHECK(r.code == 1);
    const auto rows = csv_rows(slurp(dir / "criteria.csv"));
    REQUIRE(rows.size() == 3);
    CHECK(rows[1][0] == "concentration_margin");
    CHECK(rows[1][1] == "false");
    CHECK(std::stod(rows[1][2]) == 0.0);
}
