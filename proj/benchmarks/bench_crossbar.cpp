#include <benchmark/benchmark.h>

#include "mtjsnn/crossbar.hpp"
#include "mtjsnn/rng.hpp"

using namespace mtjsnn;

namespace {

HardwareInstance dense_instance() {
    NetworkModel m = NetworkModel::architecture();
    rng::Stream s(3, 3);
    for (double& w : m.fc.w) w = 6.0 * (s.uniform01() - 0.5);
    CrossbarParams p;
    p.V_o = 1.0;
    p.G_o = 10e-6;
    p.G_s = 1.0 / 400.0;
    p.I_o = 10e-6;
    return map_weights(clip_and_quantize(m), p, 71e-6);
}

}  // namespace

static void BM_ColumnCurrent192(benchmark::State& state) {
    const HardwareInstance hw = dense_instance();
    std::vector<double> act(192);
    rng::Stream s(4, 4);
    for (double& a : act) a = s.uniform01();
    std::size_t col = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            column_current(hw.dense.columns[col], act.data(), hw.params.V_o));
        col = (col + 1) % hw.dense.columns.size();
    }
}
BENCHMARK(BM_ColumnCurrent192);

static void BM_ApplyVariation(benchmark::State& state) {
    const HardwareInstance hw = dense_instance();
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(apply_variation(hw, 0.2, 0.2, ++seed).dense.columns[0].gamma);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ApplyVariation)->Unit(benchmark::kMillisecond);
