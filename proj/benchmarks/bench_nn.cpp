#include <benchmark/benchmark.h>

#include "gamla/datasets.hpp"
#include "gamla/gamla.hpp"
#include "gamla/nn.hpp"

using namespace gamla;

namespace {

MlpNetwork swiss_net(std::size_t width) {
    const GamlaArchitecture arch = GamlaArchitecture::from_structure(3, 2, 3, width);
    return MlpNetwork::glorot(arch.layer_sizes(2), arch.activations(), 1);
}

void BM_ForwardBatch(benchmark::State& state) {
    const MlpNetwork net = swiss_net(static_cast<std::size_t>(state.range(0)));
    const Eigen::MatrixXd x = gen_swiss_roll(1024, 1).points;
    for (auto _ : state) benchmark::DoNotOptimize(net.forward_batch(x));
    state.SetItemsProcessed(state.iterations() * x.rows());
}
BENCHMARK(BM_ForwardBatch)->Arg(4)->Arg(18)->Arg(64);

void BM_Backward(benchmark::State& state) {
    const MlpNetwork net = swiss_net(static_cast<std::size_t>(state.range(0)));
    const Eigen::MatrixXd x = gen_swiss_roll(64, 1).points;
    for (auto _ : state) benchmark::DoNotOptimize(backward(net, x, x));
    state.SetItemsProcessed(state.iterations() * x.rows());
}
BENCHMARK(BM_Backward)->Arg(4)->Arg(18)->Arg(64);

void BM_TrainEpoch(benchmark::State& state) {
    const PointCloud cloud = gen_quadric(static_cast<std::size_t>(state.range(0)), 1);
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.learning_rate = 1e-2;
    const GamlaArchitecture arch = GamlaArchitecture::from_layer_sizes({3, 3, 2, 3, 3});
    MlpNetwork net = MlpNetwork::glorot(arch.layer_sizes(2), arch.activations(), 1);
    for (auto _ : state) train(net, cloud.points, cloud.points, cfg);
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainEpoch)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

} // namespace
