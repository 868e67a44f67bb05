#include <benchmark/benchmark.h>

#include "mtjsnn/snn.hpp"

using namespace mtjsnn;

namespace {

struct Fixture {
    NetworkModel model;
    NetworkModel quantized;
    SwitchCurve curve;
    CrossbarParams params;
    HardwareInstance hw;
    SwitchProbability prob;
    std::vector<float> image;

    Fixture() {
        model = NetworkModel::architecture();
        init_weights(model, 17);
        quantized = clip_and_quantize(model);
        curve.T_w = 0.5e-9;
        curve.T_K = 300.0;
        for (int i = 0; i <= 40; ++i) {
            const double x = 200e-6 * i / 40.0;
            curve.points.push_back({x, 1.0 / (1.0 + std::exp(-(x - 70e-6) / 10e-6)), 2000});
        }
        curve.I_bias = 70e-6;
        curve.I_o = 10e-6;
        params = CrossbarParams::from_curve(curve, 1.0, 400.0);
        hw = map_weights(quantized, params, curve.I_bias);
        prob = SwitchProbability(curve, SwitchProbability::Mode::raw_curve);
        image.resize(784);
        rng::Stream s(5, 5);
        for (auto& p : image) p = static_cast<float>(s.uniform01());
    }
};

Fixture& fixture() {
    static Fixture f;
    return f;
}

}  // namespace

static void BM_IdealImageStep(benchmark::State& state) {
    auto& f = fixture();
    RunConfig cfg;
    cfg.T_N = 1;
    cfg.threads = 1;
    const SnnRunner runner(f.model, cfg);
    std::size_t img = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(runner.run_single(f.image.data(), img % 1000)[0]);
        ++img;
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_IdealImageStep)->Unit(benchmark::kMicrosecond);

static void BM_HardwareImageStep(benchmark::State& state) {
    auto& f = fixture();
    RunConfig cfg;
    cfg.mode = RunMode::hardware;
    cfg.T_w = 0.5e-9;
    cfg.T_N = 1;
    cfg.threads = 1;
    const SnnRunner runner(f.hw, f.prob, cfg);
    std::size_t img = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(runner.run_single(f.image.data(), img % 1000)[0]);
        ++img;
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_HardwareImageStep)->Unit(benchmark::kMicrosecond);
