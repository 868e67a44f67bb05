#include "mtjsnn/snn.hpp"

#include <atomic>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "mtjsnn/parallel.hpp"
#include "mtjsnn/text_io.hpp"

namespace mtjsnn {

void RunConfig::validate() const {
    if (T_N < 1) throw std::invalid_argument("RunConfig: T_N must be >= 1");
}

void RunConfig::validate_against(const SwitchCurve& curve) const {
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-6 * std::max(a, b); };
    if (!close(curve.T_w, T_w) || !close(curve.T_K, T_K_run)) {
        throw std::runtime_error(
            "RunConfig: loaded curve was characterized at a different (T_w, T_K)");
    }
}

int encode_poisson(double pixel, rng::Stream& stream) {
    if (!(pixel >= 0.0 && pixel <= 1.0)) {
        throw std::invalid_argument("encode_poisson: pixel outside [0,1]");
    }
    return stream.uniform01() < pixel ? 1 : 0;
}

int fire_ideal(double preactivation, rng::Stream& stream) {
    const double p = 1.0 / (1.0 + std::exp(-preactivation));
    return stream.uniform01() < p ? 1 : 0;
}

int fire_hardware(const Column& col, const double* activations, const SwitchProbability& prob,
                  double v_o, rng::Stream& stream, long* saturation_events) {
    const double i_j = column_current(col, activations, v_o);
    if (saturation_events && prob.clamped(i_j)) ++(*saturation_events);
    return stream.uniform01() < prob.eval(i_j) ? 1 : 0;
}

void pool_average(const double* in, int maps, int in_size, double* out) {
    if (in_size % 2 != 0) throw std::invalid_argument("pool_average: odd plane dimension");
    const int out_size = in_size / 2;
    for (int m = 0; m < maps; ++m) {
        const double* plane = in + m * in_size * in_size;
        double* dst = out + m * out_size * out_size;
        for (int y = 0; y < out_size; ++y) {
            for (int x = 0; x < out_size; ++x) {
                const double* c = plane + 2 * y * in_size + 2 * x;
                dst[y * out_size + x] = 0.25 * (c[0] + c[1] + c[in_size] + c[in_size + 1]);
            }
        }
    }
}

int classify(const std::array<long, 10>& counts) {
    int best = 0;
    for (int k = 1; k < 10; ++k) {
        if (counts[k] > counts[best]) best = k;
    }
    return best;
}

double RunResult::final_accuracy() const {
    if (n_images == 0) return 0.0;
    return static_cast<double>(per_step_correct.empty() ? 0 : per_step_correct.back()) /
           static_cast<double>(n_images);
}

std::vector<double> RunResult::accuracy_curve() const {
    std::vector<double> acc;
    acc.reserve(per_step_correct.size());
    for (long c : per_step_correct) {
        acc.push_back(static_cast<double>(c) / static_cast<double>(n_images));
    }
    return acc;
}

SnnRunner::SnnRunner(const NetworkModel& model, const RunConfig& cfg) : model_(&model), cfg_(cfg) {
    cfg_.validate();
    if (cfg_.mode != RunMode::ideal) {
        throw std::invalid_argument("SnnRunner: hardware config needs a HardwareInstance");
    }
    model.validate();
}

SnnRunner::SnnRunner(const HardwareInstance& hw, const SwitchProbability& prob,
                     const RunConfig& cfg)
    : hw_(&hw), prob_(prob), cfg_(cfg) {
    cfg_.validate();
    if (cfg_.mode != RunMode::hardware) {
        throw std::invalid_argument("SnnRunner: ideal config got a HardwareInstance");
    }
}

namespace {

struct Workspace {
    std::vector<double> input;   // 784 spike values
    std::vector<double> conv1;   // 6*24*24
    std::vector<double> pool1;   // 6*12*12
    std::vector<double> conv2;   // 12*8*8
    std::vector<double> pool2;   // 192
    std::vector<double> gather;  // receptive-field buffer
    std::vector<double> currents1, currents2, currents3;
    std::vector<std::uint8_t> spikes1, spikes2, spikes3;

    Workspace()
        : input(784),
          conv1(6 * 24 * 24),
          pool1(6 * 12 * 12),
          conv2(12 * 8 * 8),
          pool2(192),
          gather(6 * 25),
          currents1(6 * 24 * 24),
          currents2(12 * 8 * 8),
          currents3(10),
          spikes1(6 * 24 * 24),
          spikes2(12 * 8 * 8),
          spikes3(10) {}
};

inline bool draw(std::uint64_t key, std::uint64_t image, long t, int layer, std::uint64_t neuron,
                 double p) {
    return rng::bernoulli(key, rng::snn_stream(image, static_cast<std::uint64_t>(t),
                                               static_cast<std::uint64_t>(layer), neuron),
                          p);
}

}  // namespace

std::array<long, 10> SnnRunner::run_single(const float* image, std::size_t image_index,
                                           long* saturation_events, const LayerHook* hook,
                                           std::vector<std::array<long, 10>>* step_counts) const {
    thread_local Workspace ws;
    const std::uint64_t key = cfg_.master_seed ^ rng::TAG_SNN;
    const bool hardware = cfg_.mode == RunMode::hardware;
    const double v_o = hardware ? hw_->params.V_o : 0.0;
    if (hook && !hardware) {
        throw std::invalid_argument("run_single: per-layer hooks are hardware-mode only");
    }
    long sat = 0;

    for (int px = 0; px < 784; ++px) {
        if (!(image[px] >= 0.0f && image[px] <= 1.0f)) {
            throw std::invalid_argument("run_single: pixel outside [0,1]");
        }
    }

    std::array<long, 10> counts{};
    if (step_counts) step_counts->assign(static_cast<std::size_t>(cfg_.T_N), {});

    for (long t = 0; t < cfg_.T_N; ++t) {
        // rate-encode the input
        for (int px = 0; px < 784; ++px) {
            ws.input[px] =
                draw(key, image_index, t, 0, static_cast<std::uint64_t>(px), image[px]) ? 1.0 : 0.0;
        }

        auto conv_layer = [&](int layer_id, const std::vector<double>& in, int in_size,
                              int in_maps, std::vector<double>& out_spikes,
                              std::vector<double>& currents) {
            const int os = in_size - 4;  // 5x5 valid
            const int rows = in_maps * 25;
            const ConvLayer* cl =
                hardware ? nullptr : (layer_id == 1 ? &model_->conv1 : &model_->conv2);
            const LayerInstance* li = hardware ? (layer_id == 1 ? &hw_->conv1 : &hw_->conv2)
                                               : nullptr;
            for (int y = 0; y < os; ++y) {
                for (int x = 0; x < os; ++x) {
                    // gather the receptive field shared by all output maps
                    double* g = ws.gather.data();
                    for (int i = 0; i < in_maps; ++i) {
                        const double* plane = in.data() + i * in_size * in_size;
                        for (int ky = 0; ky < 5; ++ky) {
                            const double* row = plane + (y + ky) * in_size + x;
                            for (int kx = 0; kx < 5; ++kx) *g++ = row[kx];
                        }
                    }
                    const int maps = hardware ? li->out_maps : cl->out_maps;
                    for (int m = 0; m < maps; ++m) {
                        const std::uint64_t neuron =
                            static_cast<std::uint64_t>((m * os + y) * os + x);
                        double p;
                        if (hardware) {
                            const Column& col = li->columns[neuron];
                            const double i_j = column_current(col, ws.gather.data(), v_o);
                            if (prob_.clamped(i_j)) ++sat;
                            p = prob_.eval(i_j);
                            if (hook) currents[neuron] = i_j;
                        } else {
                            double z = cl->b[static_cast<std::size_t>(m)];
                            const double* w = cl->w.data() + m * rows;
                            for (int r = 0; r < rows; ++r) z += w[r] * ws.gather[r];
                            p = 1.0 / (1.0 + std::exp(-z));
                        }
                        out_spikes[neuron] =
                            draw(key, image_index, t, layer_id, neuron, p) ? 1.0 : 0.0;
                    }
                }
            }
        };

        conv_layer(1, ws.input, 28, 1, ws.conv1, ws.currents1);
        if (hook) {
            for (std::size_t i = 0; i < ws.conv1.size(); ++i) {
                ws.spikes1[i] = ws.conv1[i] != 0.0 ? 1 : 0;
            }
            (*hook)({1, &hw_->conv1, &ws.input, &ws.currents1, &ws.spikes1});
        }
        pool_average(ws.conv1.data(), 6, 24, ws.pool1.data());

        conv_layer(2, ws.pool1, 12, 6, ws.conv2, ws.currents2);
        if (hook) {
            for (std::size_t i = 0; i < ws.conv2.size(); ++i) {
                ws.spikes2[i] = ws.conv2[i] != 0.0 ? 1 : 0;
            }
            (*hook)({2, &hw_->conv2, &ws.pool1, &ws.currents2, &ws.spikes2});
        }
        pool_average(ws.conv2.data(), 12, 8, ws.pool2.data());

        // output layer
        for (int k = 0; k < 10; ++k) {
            const std::uint64_t neuron = static_cast<std::uint64_t>(k);
            double p;
            if (hardware) {
                const Column& col = hw_->dense.columns[neuron];
                const double i_j = column_current(col, ws.pool2.data(), v_o);
                if (prob_.clamped(i_j)) ++sat;
                p = prob_.eval(i_j);
                if (hook) ws.currents3[neuron] = i_j;
            } else {
                double z = model_->fc.b[static_cast<std::size_t>(k)];
                const double* w = model_->fc.w.data() + k * kFlatSize;
                for (int j = 0; j < kFlatSize; ++j) z += w[j] * ws.pool2[j];
                p = 1.0 / (1.0 + std::exp(-z));
            }
            const bool spike = draw(key, image_index, t, 3, neuron, p);
            if (hook) ws.spikes3[neuron] = spike ? 1 : 0;
            if (spike) ++counts[static_cast<std::size_t>(k)];
        }
        if (hook) (*hook)({3, &hw_->dense, &ws.pool2, &ws.currents3, &ws.spikes3});
        if (step_counts) (*step_counts)[static_cast<std::size_t>(t)] = counts;
    }

    if (saturation_events) *saturation_events += sat;
    return counts;
}

RunResult SnnRunner::run(const Dataset& data, std::size_t first_n) const {
    const std::size_t n =
        first_n == 0 ? (cfg_.n_images == 0 ? data.count : std::min(cfg_.n_images, data.count))
                     : std::min(first_n, data.count);
    RunResult result;
    result.n_images = n;
    result.timesteps = cfg_.T_N;
    result.per_step_correct.assign(static_cast<std::size_t>(cfg_.T_N), 0);
    result.predictions.assign(n, -1);
    result.final_counts.assign(n, {});
    if (n == 0) return result;

    std::atomic<long> saturation{0};
    std::vector<std::atomic<long>> step_correct(static_cast<std::size_t>(cfg_.T_N));
    for (auto& a : step_correct) a.store(0, std::memory_order_relaxed);

    parallel_for(0, n, cfg_.threads, [&](std::size_t i) {
        thread_local std::vector<std::array<long, 10>> step_counts;
        long sat = 0;
        const auto counts = run_single(data.image(i), i, &sat, nullptr, &step_counts);
        result.final_counts[i] = counts;
        result.predictions[i] = classify(counts);
        const int label = data.labels[i];
        for (long t = 0; t < cfg_.T_N; ++t) {
            if (classify(step_counts[static_cast<std::size_t>(t)]) == label) {
                step_correct[static_cast<std::size_t>(t)].fetch_add(1, std::memory_order_relaxed);
            }
        }
        saturation.fetch_add(sat, std::memory_order_relaxed);
    });

    for (long t = 0; t < cfg_.T_N; ++t) {
        result.per_step_correct[static_cast<std::size_t>(t)] =
            step_correct[static_cast<std::size_t>(t)].load();
    }
    result.saturation_events = saturation.load();
    return result;
}

void write_accuracy_csv(const RunResult& result, std::ostream& out) {
    out << "timestep,accuracy\n";
    const auto acc = result.accuracy_curve();
    for (std::size_t t = 0; t < acc.size(); ++t) {
        out << (t + 1) << ',' << format_g9(acc[t]) << "\n";
    }
}

void write_predictions_csv(const RunResult& result, const Dataset& data, std::ostream& out) {
    out << "image_index,label,prediction,spike_counts_0,spike_counts_1,spike_counts_2,"
           "spike_counts_3,spike_counts_4,spike_counts_5,spike_counts_6,spike_counts_7,"
           "spike_counts_8,spike_counts_9\n";
    for (std::size_t i = 0; i < result.predictions.size(); ++i) {
        out << i << ',' << static_cast<int>(data.labels[i]) << ',' << result.predictions[i];
        for (long c : result.final_counts[i]) out << ',' << c;
        out << "\n";
    }
}

}  // namespace mtjsnn
