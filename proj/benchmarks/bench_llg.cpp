#include <benchmark/benchmark.h>

#include "mtjsnn/llg.hpp"

using namespace mtjsnn;

static void BM_HeunStep(benchmark::State& state) {
    DeviceParams params;
    const FieldModel fields = FieldModel::calibrate(params);
    rng::Stream stream(1, 1);
    MagnetState s;
    s.m = {-1.0, 0.0, 0.0};
    const double i_s = spin_current(params, 50e-6);
    for (auto _ : state) {
        s = llg_step(s, fields, params, i_s, 1e-13, stream);
        benchmark::DoNotOptimize(s.m.x);
    }
}
BENCHMARK(BM_HeunStep);

static void BM_SwitchingTrial(benchmark::State& state) {
    DeviceParams params;
    const FieldModel fields = FieldModel::calibrate(params);
    PulseSpec pulse;
    pulse.I_q = 70e-6;
    std::uint64_t trial = 0;
    for (auto _ : state) {
        rng::Stream stream(7, trial++);
        benchmark::DoNotOptimize(switching_trial(params, fields, pulse, stream).switched);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SwitchingTrial)->Unit(benchmark::kMillisecond);

static void BM_ThermalSample(benchmark::State& state) {
    DeviceParams params;
    rng::Stream stream(2, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(thermal_field_sample(params, 1e-13, stream));
    }
}
BENCHMARK(BM_ThermalSample);

BENCHMARK_MAIN();
