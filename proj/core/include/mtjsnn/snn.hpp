#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "mtjsnn/crossbar.hpp"
#include "mtjsnn/mnist.hpp"
#include "mtjsnn/network.hpp"
#include "mtjsnn/rng.hpp"
#include "mtjsnn/switch_curve.hpp"

namespace mtjsnn {

enum class RunMode { ideal, hardware };

struct RunConfig {
    long T_N = 50;
    RunMode mode = RunMode::ideal;
    double T_w = 0.5e-9;  // hardware mode; must match the loaded curve
    double V_o = 1.0;
    double sigma_g = 0.0, sigma_bias = 0.0;
    double T_K_run = 300.0;
    std::uint64_t master_seed = 1;
    std::size_t n_images = 0;  // 0 = whole set
    int threads = 0;
    SwitchProbability::Mode prob_mode = SwitchProbability::Mode::raw_curve;

    void validate() const;  // T_N >= 1
    // hardware mode requires a curve characterized at (T_w, T_K_run)
    void validate_against(const SwitchCurve& curve) const;
};

// Per-time-step Bernoulli primitives. The neuron is memoryless: the spike
// probability depends only on the instantaneous weighted input.
int encode_poisson(double pixel, rng::Stream& stream);  // throws if pixel outside [0,1]
int fire_ideal(double preactivation, rng::Stream& stream);
int fire_hardware(const Column& col, const double* activations, const SwitchProbability& prob,
                  double v_o, rng::Stream& stream, long* saturation_events = nullptr);

// 2x2 non-overlapping mean; throws on odd plane dimensions.
void pool_average(const double* in, int maps, int in_size, double* out);

// Argmax of cumulative counts, ties broken by lowest index.
int classify(const std::array<long, 10>& counts);

// Data handed to a per-layer observer during a hardware run (used by the
// energy model). `inputs` is the layer's input activation plane in the
// layout consumed by the layer; `currents` and `spikes` are per column.
struct LayerStepData {
    int layer_id = 0;  // 1=conv1, 2=conv2, 3=dense
    const LayerInstance* layer = nullptr;
    const std::vector<double>* inputs = nullptr;
    const std::vector<double>* currents = nullptr;
    const std::vector<std::uint8_t>* spikes = nullptr;
};
using LayerHook = std::function<void(const LayerStepData&)>;

struct RunResult {
    std::size_t n_images = 0;
    long timesteps = 0;
    std::vector<long> per_step_correct;            // [T_N]
    std::vector<int> predictions;                  // final, per image
    std::vector<std::array<long, 10>> final_counts;
    long saturation_events = 0;

    double final_accuracy() const;
    std::vector<double> accuracy_curve() const;  // cumulative-count accuracy per step
};

class SnnRunner {
public:
    // Ideal mode: probabilistic neurons firing at sigmoid(preactivation).
    SnnRunner(const NetworkModel& model, const RunConfig& cfg);
    // Hardware mode: crossbar currents + MTJ switching probability lookup.
    SnnRunner(const HardwareInstance& hw, const SwitchProbability& prob, const RunConfig& cfg);

    // Evaluates the first n images (labels known) in parallel.
    RunResult run(const Dataset& data, std::size_t first_n = 0) const;

    // One image; optional per-(step,layer) hook (hardware mode only) and
    // per-step cumulative counts. Deterministic in (master_seed, image_index).
    std::array<long, 10> run_single(const float* image, std::size_t image_index,
                                    long* saturation_events = nullptr,
                                    const LayerHook* hook = nullptr,
                                    std::vector<std::array<long, 10>>* step_counts = nullptr) const;

    const RunConfig& config() const { return cfg_; }

private:
    const NetworkModel* model_ = nullptr;
    const HardwareInstance* hw_ = nullptr;
    SwitchProbability prob_;
    RunConfig cfg_;
};

// `timestep,accuracy` rows.
void write_accuracy_csv(const RunResult& result, std::ostream& out);
// `image_index,label,prediction,spike_counts_0..9` rows.
void write_predictions_csv(const RunResult& result, const Dataset& data, std::ostream& out);

}  // namespace mtjsnn
