#include <benchmark/benchmark.h>

#include "pnplab/flow_matching.hpp"
#include "pnplab/sampler.hpp"

using namespace pnp;

namespace {

VectorFieldNet bench_net(Shape shape, std::size_t hidden) {
    NetArchitecture arch;
    arch.grid_shape = shape;
    arch.hidden = {hidden, hidden};
    RngStream rng(1);
    return VectorFieldNet::initialized(arch, rng);
}

}  // namespace

static void BM_EvaluateField(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const VectorFieldNet net = bench_net(kPointShape, 64);
    FieldEvaluator field(net);
    const Batch z = initial_noise(kPointShape, n, RngStream(2));
    for (auto _ : state) benchmark::DoNotOptimize(field(z, 0.3));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_EvaluateField)->Arg(256)->Arg(2000);

static void BM_TrainStep(benchmark::State& state) {
    const DatasetSpec spec = DatasetSpec::defaults(DatasetKind::sine2d);
    const VectorFieldNet start = bench_net(kPointShape, 64);
    TrainConfig cfg;
    cfg.steps = 10;
    for (auto _ : state) benchmark::DoNotOptimize(train(spec, start, cfg));
    state.SetItemsProcessed(state.iterations() * 10);
}
BENCHMARK(BM_TrainStep);

static void BM_SampleSine(benchmark::State& state) {
    const VectorFieldNet net = bench_net(kPointShape, 64);
    const Schedule sched = Schedule::uniform(50);
    const PnPPlan plan = state.range(0) ? PnPPlan::early(50, 3, 0.2, 3) : PnPPlan();
    for (auto _ : state) benchmark::DoNotOptimize(sample(net, sched, plan, 0.1, {}, 500, RngStream(3)));
}
BENCHMARK(BM_SampleSine)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_UncertaintyMask(benchmark::State& state) {
    const Shape shape{8, 16, 16, 1};
    const Batch a = initial_noise(shape, 64, RngStream(4));
    const Batch b = initial_noise(shape, 64, RngStream(5));
    const Batch zero(shape.single_channel(), 64);
    for (auto _ : state) benchmark::DoNotOptimize(uncertainty_mask(uncertainty_map(a, b), 0.25, zero));
}
BENCHMARK(BM_UncertaintyMask);
BENCHMARK_MAIN();
