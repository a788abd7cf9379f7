#include <benchmark/benchmark.h>

#include "gamla/geometry.hpp"

using namespace gamla;

namespace {

GamlaModel expanded_model(const std::vector<std::size_t>& sizes) {
    const GamlaArchitecture arch = GamlaArchitecture::from_layer_sizes(sizes);
    const MlpNetwork net = MlpNetwork::glorot(arch.layer_sizes(arch.ambient_dim), arch.activations(), 3);
    Hyperrectangle box;
    box.low = Eigen::Vector3d::Constant(-1);
    box.high = Eigen::Vector3d::Constant(1);
    return GamlaModel(arch, net, Phase::AfterRound2, box);
}

const GamlaModel& swiss_model() {
    static const GamlaModel m = expanded_model({3, 24, 12, 6, 2, 6, 12, 24, 3});
    return m;
}

void BM_Jets(benchmark::State& state) {
    const ImplicitHead head = complementary_head(swiss_model());
    const Eigen::Vector3d x(0.1, -0.2, 0.3);
    const int order = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(head.jets(x, order));
}
BENCHMARK(BM_Jets)->Arg(1)->Arg(2);

void BM_GaussianCurvature(benchmark::State& state) {
    const ImplicitHead head = complementary_head(swiss_model());
    const Eigen::Vector3d x(0.1, -0.2, 0.3);
    for (auto _ : state) benchmark::DoNotOptimize(gaussian_curvature(head, x));
}
BENCHMARK(BM_GaussianCurvature);

void BM_LevelSetFilter(benchmark::State& state) {
    const GamlaModel& model = swiss_model();
    const ImplicitHead head = complementary_head(model);
    LevelSetSpec spec;
    spec.eps = 1e-3;
    spec.box = model.ambient_box();
    spec.count = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(filter_level_set(head, spec, 1));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LevelSetFilter)->Arg(100000)->Unit(benchmark::kMillisecond);

} // namespace
