#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mtjsnn/mnist.hpp"

namespace mtjsnn {

// 28x28-6c5-2s-12c5-2s-10o with sigmoid activations on conv and dense
// outputs; the 2x2 subsampling layers are pure averages.

struct ConvLayer {
    int out_maps = 0, in_maps = 0, k = 5;
    std::vector<double> w;  // [out][in][ky][kx]
    std::vector<double> b;  // [out]

    double kernel(int o, int i, int ky, int kx) const {
        return w[((o * in_maps + i) * k + ky) * k + kx];
    }
};

struct DenseLayer {
    int out = 0, in = 0;
    std::vector<double> w;  // [out][in]
    std::vector<double> b;  // [out]
};

struct NetworkModel {
    ConvLayer conv1;  // 6 maps, 5x5, from 1 input map
    ConvLayer conv2;  // 12 maps, 5x5, from 6 maps
    DenseLayer fc;    // 10 x 192

    static NetworkModel architecture();  // canonical shapes, zero weights
    void validate() const;               // throws on shape-chain violation or non-finite values
    bool weights_within(double bound) const;
};

// Layer plane sizes of the fixed chain.
inline constexpr int kConv1Size = 24, kPool1Size = 12, kConv2Size = 8, kPool2Size = 4;
inline constexpr int kFlatSize = 12 * kPool2Size * kPool2Size;  // 192, map-major

// Per-example forward workspace (reused across calls).
struct Activations {
    std::vector<double> conv1_a;  // 6*24*24
    std::vector<double> pool1;    // 6*12*12
    std::vector<double> conv2_a;  // 12*8*8
    std::vector<double> pool2;    // 192
    std::vector<double> out;      // 10

    Activations();
};

void ann_forward(const NetworkModel& model, const float* image, Activations& act);
int ann_predict(const NetworkModel& model, const float* image, Activations& act);
double ann_accuracy(const NetworkModel& model, const Dataset& data, std::size_t first_n = 0,
                    int threads = 0);

struct Gradients {
    std::vector<double> conv1_w, conv1_b, conv2_w, conv2_b, fc_w, fc_b;

    explicit Gradients(const NetworkModel& model);
    void clear();
    void add(const Gradients& o);
};

// Forward + backprop of the squared error against a one-hot target.
// Accumulates into grad; returns the example loss 1/2 sum (y-t)^2.
double ann_backward(const NetworkModel& model, const float* image, int label, Activations& act,
                    Gradients& grad);

struct TrainHyper {
    double lr = 1.0;
    int batch = 50;
    int epochs = 20;
    std::uint64_t seed = 1;
    int threads = 0;
};

struct TrainResult {
    std::vector<double> epoch_loss;  // mean per-example loss per epoch
};

// Mini-batch SGD. Deterministic for a fixed seed: shuffling and init come
// from counter-based streams and per-example gradients are reduced in
// index order regardless of thread count. Throws if the loss goes NaN.
TrainResult train(NetworkModel& model, const Dataset& data, const TrainHyper& hyper);

void init_weights(NetworkModel& model, std::uint64_t seed);

struct QuantizeSpec {
    double w_max = 3.0;
    int bits = 4;
    double g_ratio = 10.0;
};

struct Codebook {
    std::vector<double> levels;  // 16 magnitudes from w_max/g_ratio to w_max
    double zero_threshold = 0.0; // below this magnitude weights snap to 0 (OFF)
};

Codebook make_codebook(const QuantizeSpec& spec);

// Clips weights and biases to [-w_max, w_max]; snaps weight magnitudes to
// the codebook (biases stay continuous: they map to programmable bias
// currents, not crossbar conductances).
NetworkModel clip_and_quantize(const NetworkModel& model, const QuantizeSpec& spec = {},
                               Codebook* codebook_out = nullptr);

// Text format, line 1 `MTJSNN-WEIGHTS v1`; see README for the layout.
void save_model(const NetworkModel& model, std::ostream& out);
void save_model(const NetworkModel& model, const std::string& path);
NetworkModel load_model(std::istream& in);
NetworkModel load_model(const std::string& path);

}  // namespace mtjsnn
