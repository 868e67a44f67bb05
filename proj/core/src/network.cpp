#include "mtjsnn/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mtjsnn/parallel.hpp"
#include "mtjsnn/rng.hpp"
#include "mtjsnn/text_io.hpp"

namespace mtjsnn {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

constexpr int kImg = 28;
constexpr int kK = 5;

}  // namespace

NetworkModel NetworkModel::architecture() {
    NetworkModel m;
    m.conv1.out_maps = 6;
    m.conv1.in_maps = 1;
    m.conv1.k = kK;
    m.conv1.w.assign(6 * 1 * kK * kK, 0.0);
    m.conv1.b.assign(6, 0.0);
    m.conv2.out_maps = 12;
    m.conv2.in_maps = 6;
    m.conv2.k = kK;
    m.conv2.w.assign(12 * 6 * kK * kK, 0.0);
    m.conv2.b.assign(12, 0.0);
    m.fc.out = 10;
    m.fc.in = kFlatSize;
    m.fc.w.assign(10 * kFlatSize, 0.0);
    m.fc.b.assign(10, 0.0);
    return m;
}

void NetworkModel::validate() const {
    auto fail = [](const std::string& what) { throw std::runtime_error("NetworkModel: " + what); };
    if (conv1.out_maps != 6 || conv1.in_maps != 1 || conv1.k != kK ||
        conv1.w.size() != 6u * kK * kK || conv1.b.size() != 6u) {
        fail("first conv layer must be 6 maps of 5x5 over 1 input map");
    }
    if (conv2.out_maps != 12 || conv2.in_maps != 6 || conv2.k != kK ||
        conv2.w.size() != 12u * 6u * kK * kK || conv2.b.size() != 12u) {
        fail("second conv layer must be 12 maps of 5x5 over 6 input maps");
    }
    if (fc.out != 10 || fc.in != kFlatSize || fc.w.size() != 10u * kFlatSize || fc.b.size() != 10u) {
        fail("dense layer must be 10 x 192");
    }
    for (const auto* vec : {&conv1.w, &conv1.b, &conv2.w, &conv2.b, &fc.w, &fc.b}) {
        for (double v : *vec) {
            if (!std::isfinite(v)) fail("non-finite parameter value");
        }
    }
}

bool NetworkModel::weights_within(double bound) const {
    for (const auto* vec : {&conv1.w, &conv1.b, &conv2.w, &conv2.b, &fc.w, &fc.b}) {
        for (double v : *vec) {
            if (std::abs(v) > bound) return false;
        }
    }
    return true;
}

Activations::Activations()
    : conv1_a(6 * kConv1Size * kConv1Size),
      pool1(6 * kPool1Size * kPool1Size),
      conv2_a(12 * kConv2Size * kConv2Size),
      pool2(kFlatSize),
      out(10) {}

namespace {

// valid 5x5 correlation + sigmoid over one input plane set
template <typename In>
void conv_forward(const ConvLayer& layer, const In* input, int in_size, double* out_a) {
    const int out_size = in_size - kK + 1;
    for (int o = 0; o < layer.out_maps; ++o) {
        double* dst = out_a + o * out_size * out_size;
        for (int y = 0; y < out_size; ++y) {
            for (int x = 0; x < out_size; ++x) {
                double z = layer.b[o];
                for (int i = 0; i < layer.in_maps; ++i) {
                    const In* plane = input + i * in_size * in_size;
                    const double* ker = layer.w.data() + (o * layer.in_maps + i) * kK * kK;
                    for (int ky = 0; ky < kK; ++ky) {
                        const In* row = plane + (y + ky) * in_size + x;
                        const double* krow = ker + ky * kK;
                        for (int kx = 0; kx < kK; ++kx) z += krow[kx] * row[kx];
                    }
                }
                dst[y * out_size + x] = sigmoid(z);
            }
        }
    }
}

void pool_mean(const double* in, int maps, int in_size, double* out) {
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

}  // namespace

void ann_forward(const NetworkModel& model, const float* image, Activations& act) {
    conv_forward(model.conv1, image, kImg, act.conv1_a.data());
    pool_mean(act.conv1_a.data(), 6, kConv1Size, act.pool1.data());
    conv_forward(model.conv2, act.pool1.data(), kPool1Size, act.conv2_a.data());
    pool_mean(act.conv2_a.data(), 12, kConv2Size, act.pool2.data());
    for (int k = 0; k < 10; ++k) {
        double z = model.fc.b[k];
        const double* row = model.fc.w.data() + k * kFlatSize;
        for (int j = 0; j < kFlatSize; ++j) z += row[j] * act.pool2[j];
        act.out[k] = sigmoid(z);
    }
}

int ann_predict(const NetworkModel& model, const float* image, Activations& act) {
    ann_forward(model, image, act);
    int best = 0;
    for (int k = 1; k < 10; ++k) {
        if (act.out[k] > act.out[best]) best = k;
    }
    return best;
}

double ann_accuracy(const NetworkModel& model, const Dataset& data, std::size_t first_n,
                    int threads) {
    const std::size_t n = first_n == 0 ? data.count : std::min(first_n, data.count);
    if (n == 0) return 0.0;
    std::vector<std::uint8_t> correct(n, 0);
    parallel_for(0, n, threads, [&](std::size_t i) {
        thread_local Activations act;
        correct[i] = ann_predict(model, data.image(i), act) == data.labels[i] ? 1 : 0;
    });
    std::size_t hits = 0;
    for (auto c : correct) hits += c;
    return static_cast<double>(hits) / static_cast<double>(n);
}

Gradients::Gradients(const NetworkModel& model)
    : conv1_w(model.conv1.w.size(), 0.0),
      conv1_b(model.conv1.b.size(), 0.0),
      conv2_w(model.conv2.w.size(), 0.0),
      conv2_b(model.conv2.b.size(), 0.0),
      fc_w(model.fc.w.size(), 0.0),
      fc_b(model.fc.b.size(), 0.0) {}

void Gradients::clear() {
    for (auto* vec : {&conv1_w, &conv1_b, &conv2_w, &conv2_b, &fc_w, &fc_b}) {
        std::fill(vec->begin(), vec->end(), 0.0);
    }
}

void Gradients::add(const Gradients& o) {
    auto axpy = [](std::vector<double>& dst, const std::vector<double>& src) {
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    };
    axpy(conv1_w, o.conv1_w);
    axpy(conv1_b, o.conv1_b);
    axpy(conv2_w, o.conv2_w);
    axpy(conv2_b, o.conv2_b);
    axpy(fc_w, o.fc_w);
    axpy(fc_b, o.fc_b);
}

double ann_backward(const NetworkModel& model, const float* image, int label, Activations& act,
                    Gradients& grad) {
    ann_forward(model, image, act);

    thread_local std::vector<double> delta_out(10);
    thread_local std::vector<double> dpool2(kFlatSize);
    thread_local std::vector<double> delta2(12 * kConv2Size * kConv2Size);
    thread_local std::vector<double> dpool1(6 * kPool1Size * kPool1Size);
    thread_local std::vector<double> delta1(6 * kConv1Size * kConv1Size);

    double loss = 0.0;
    for (int k = 0; k < 10; ++k) {
        const double t = k == label ? 1.0 : 0.0;
        const double e = act.out[k] - t;
        loss += 0.5 * e * e;
        delta_out[k] = e * act.out[k] * (1.0 - act.out[k]);
    }

    // dense
    std::fill(dpool2.begin(), dpool2.end(), 0.0);
    for (int k = 0; k < 10; ++k) {
        const double d = delta_out[k];
        const double* row = model.fc.w.data() + k * kFlatSize;
        double* grow = grad.fc_w.data() + k * kFlatSize;
        for (int j = 0; j < kFlatSize; ++j) {
            grow[j] += d * act.pool2[j];
            dpool2[j] += d * row[j];
        }
        grad.fc_b[k] += d;
    }

    // pool2 upsample + sigmoid' at conv2
    for (int m = 0; m < 12; ++m) {
        for (int y = 0; y < kConv2Size; ++y) {
            for (int x = 0; x < kConv2Size; ++x) {
                const double up =
                    0.25 * dpool2[(m * kPool2Size + y / 2) * kPool2Size + x / 2];
                const double a = act.conv2_a[(m * kConv2Size + y) * kConv2Size + x];
                delta2[(m * kConv2Size + y) * kConv2Size + x] = up * a * (1.0 - a);
            }
        }
    }

    // conv2 weight/bias grads and input deltas
    std::fill(dpool1.begin(), dpool1.end(), 0.0);
    for (int o = 0; o < 12; ++o) {
        double bsum = 0.0;
        for (int y = 0; y < kConv2Size; ++y) {
            for (int x = 0; x < kConv2Size; ++x) {
                const double d = delta2[(o * kConv2Size + y) * kConv2Size + x];
                bsum += d;
                for (int i = 0; i < 6; ++i) {
                    const double* plane = act.pool1.data() + i * kPool1Size * kPool1Size;
                    const double* ker = model.conv2.w.data() + (o * 6 + i) * kK * kK;
                    double* gker = grad.conv2_w.data() + (o * 6 + i) * kK * kK;
                    double* dplane = dpool1.data() + i * kPool1Size * kPool1Size;
                    for (int ky = 0; ky < kK; ++ky) {
                        const double* prow = plane + (y + ky) * kPool1Size + x;
                        double* drow = dplane + (y + ky) * kPool1Size + x;
                        const double* krow = ker + ky * kK;
                        double* grow = gker + ky * kK;
                        for (int kx = 0; kx < kK; ++kx) {
                            grow[kx] += d * prow[kx];
                            drow[kx] += d * krow[kx];
                        }
                    }
                }
            }
        }
        grad.conv2_b[o] += bsum;
    }

    // pool1 upsample + sigmoid' at conv1
    for (int m = 0; m < 6; ++m) {
        for (int y = 0; y < kConv1Size; ++y) {
            for (int x = 0; x < kConv1Size; ++x) {
                const double up =
                    0.25 * dpool1[(m * kPool1Size + y / 2) * kPool1Size + x / 2];
                const double a = act.conv1_a[(m * kConv1Size + y) * kConv1Size + x];
                delta1[(m * kConv1Size + y) * kConv1Size + x] = up * a * (1.0 - a);
            }
        }
    }

    // conv1 grads
    for (int o = 0; o < 6; ++o) {
        double bsum = 0.0;
        double* gker = grad.conv1_w.data() + o * kK * kK;
        for (int y = 0; y < kConv1Size; ++y) {
            for (int x = 0; x < kConv1Size; ++x) {
                const double d = delta1[(o * kConv1Size + y) * kConv1Size + x];
                bsum += d;
                for (int ky = 0; ky < kK; ++ky) {
                    const float* irow = image + (y + ky) * kImg + x;
                    double* grow = gker + ky * kK;
                    for (int kx = 0; kx < kK; ++kx) grow[kx] += d * irow[kx];
                }
            }
        }
        grad.conv1_b[o] += bsum;
    }

    return loss;
}

void init_weights(NetworkModel& model, std::uint64_t seed) {
    const std::uint64_t key = seed ^ rng::TAG_TRAIN;
    auto fill = [&](std::vector<double>& w, double fan_in, std::uint64_t stream_id) {
        rng::Stream stream(key, stream_id);
        const double bound = 0.5 / std::sqrt(fan_in);
        for (double& v : w) v = bound * (2.0 * stream.uniform01() - 1.0);
    };
    fill(model.conv1.w, kK * kK, 1);
    fill(model.conv2.w, 6.0 * kK * kK, 2);
    fill(model.fc.w, kFlatSize, 3);
    std::fill(model.conv1.b.begin(), model.conv1.b.end(), 0.0);
    std::fill(model.conv2.b.begin(), model.conv2.b.end(), 0.0);
    std::fill(model.fc.b.begin(), model.fc.b.end(), 0.0);
}

TrainResult train(NetworkModel& model, const Dataset& data, const TrainHyper& hyper) {
    if (hyper.lr <= 0.0 || hyper.batch <= 0 || hyper.epochs <= 0) {
        throw std::invalid_argument("train: hyperparameters must be positive");
    }
    if (data.count == 0) throw std::invalid_argument("train: empty dataset");

    model = NetworkModel::architecture();
    init_weights(model, hyper.seed);

    const std::size_t n = data.count;
    std::vector<std::uint32_t> order(n);
    std::vector<Gradients> slots(static_cast<std::size_t>(hyper.batch), Gradients(model));
    std::vector<double> slot_loss(static_cast<std::size_t>(hyper.batch), 0.0);
    Gradients total(model);

    TrainResult result;
    result.epoch_loss.reserve(static_cast<std::size_t>(hyper.epochs));

    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::uint32_t>(i);
        rng::Stream shuffle(hyper.seed ^ rng::TAG_TRAIN, 1000 + static_cast<std::uint64_t>(epoch));
        for (std::size_t i = n - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(shuffle.uniform01() * (i + 1));
            std::swap(order[i], order[std::min(j, i)]);
        }

        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n; start += hyper.batch) {
            const std::size_t m = std::min<std::size_t>(hyper.batch, n - start);
            parallel_for(0, m, hyper.threads, [&](std::size_t s) {
                thread_local Activations act;
                slots[s].clear();
                const std::uint32_t idx = order[start + s];
                slot_loss[s] =
                    ann_backward(model, data.image(idx), data.labels[idx], act, slots[s]);
            });
            total.clear();
            for (std::size_t s = 0; s < m; ++s) {
                total.add(slots[s]);
                epoch_loss += slot_loss[s];
            }
            const double scale = hyper.lr / static_cast<double>(m);
            auto update = [scale](std::vector<double>& w, const std::vector<double>& g) {
                for (std::size_t i = 0; i < w.size(); ++i) w[i] -= scale * g[i];
            };
            update(model.conv1.w, total.conv1_w);
            update(model.conv1.b, total.conv1_b);
            update(model.conv2.w, total.conv2_w);
            update(model.conv2.b, total.conv2_b);
            update(model.fc.w, total.fc_w);
            update(model.fc.b, total.fc_b);
        }
        epoch_loss /= static_cast<double>(n);
        if (!std::isfinite(epoch_loss)) {
            throw std::runtime_error("train: loss is not finite; reduce train.lr");
        }
        result.epoch_loss.push_back(epoch_loss);
    }
    return result;
}

Codebook make_codebook(const QuantizeSpec& spec) {
    if (spec.bits < 1 || spec.w_max <= 0.0 || spec.g_ratio <= 1.0) {
        throw std::invalid_argument("make_codebook: bad spec");
    }
    Codebook cb;
    const int n = 1 << spec.bits;
    const double w_min = spec.w_max / spec.g_ratio;
    cb.levels.resize(n);
    for (int i = 0; i < n; ++i) {
        cb.levels[i] = w_min + (spec.w_max - w_min) * static_cast<double>(i) / (n - 1);
    }
    cb.zero_threshold = spec.w_max / (2.0 * spec.g_ratio);
    return cb;
}

namespace {

double snap(double w, const QuantizeSpec& spec, const Codebook& cb) {
    const double c = std::clamp(w, -spec.w_max, spec.w_max);
    const double mag = std::abs(c);
    if (mag < cb.zero_threshold) return 0.0;
    const double w_min = cb.levels.front();
    const double step = cb.levels[1] - cb.levels[0];
    const int n = static_cast<int>(cb.levels.size());
    const int idx = std::clamp(static_cast<int>(std::lround((mag - w_min) / step)), 0, n - 1);
    return std::copysign(cb.levels[static_cast<std::size_t>(idx)], c);
}

}  // namespace

NetworkModel clip_and_quantize(const NetworkModel& model, const QuantizeSpec& spec,
                               Codebook* codebook_out) {
    const Codebook cb = make_codebook(spec);
    if (codebook_out) *codebook_out = cb;
    NetworkModel q = model;
    for (auto* vec : {&q.conv1.w, &q.conv2.w, &q.fc.w}) {
        for (double& w : *vec) w = snap(w, spec, cb);
    }
    for (auto* vec : {&q.conv1.b, &q.conv2.b, &q.fc.b}) {
        for (double& b : *vec) b = std::clamp(b, -spec.w_max, spec.w_max);
    }
    return q;
}

namespace {

void write_values(std::ostream& out, const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        out << format_g9(values[i]);
        out << ((i % 8 == 7 || i + 1 == values.size()) ? '\n' : ' ');
    }
}

}  // namespace

void save_model(const NetworkModel& model, std::ostream& out) {
    model.validate();
    out << "MTJSNN-WEIGHTS v1\n";
    out << "conv 6 1 5 5\n";
    write_values(out, model.conv1.w);
    out << "bias 6\n";
    write_values(out, model.conv1.b);
    out << "pool 2 2\n";
    out << "conv 12 6 5 5\n";
    write_values(out, model.conv2.w);
    out << "bias 12\n";
    write_values(out, model.conv2.b);
    out << "pool 2 2\n";
    out << "dense 10 192\n";
    write_values(out, model.fc.w);
    out << "bias 10\n";
    write_values(out, model.fc.b);
}

void save_model(const NetworkModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_model: cannot open " + path);
    save_model(model, out);
    if (!out.good()) throw std::runtime_error("save_model: write failed for " + path);
}

namespace {

class TokenReader {
public:
    explicit TokenReader(std::istream& in) : in_(in) {}

    std::string next(const std::string& expectation) {
        std::string tok;
        if (!(in_ >> tok)) {
            throw std::runtime_error("load_model: truncated file while reading " + expectation);
        }
        return tok;
    }

    void expect(const std::string& literal) {
        const std::string tok = next("'" + literal + "'");
        if (tok != literal) {
            throw std::runtime_error("load_model: expected '" + literal + "', got '" + tok + "'");
        }
    }

    long expect_int(const std::string& what) { return parse_int(next(what), "load_model " + what); }

    void expect_shape(const std::string& keyword, const std::vector<long>& dims,
                      const std::string& what) {
        expect(keyword);
        for (long d : dims) {
            const long got = expect_int(what);
            if (got != d) {
                throw std::runtime_error("load_model: shape mismatch in " + what + ": expected " +
                                         std::to_string(d) + ", got " + std::to_string(got));
            }
        }
    }

    void read_values(std::vector<double>& dst, const std::string& what) {
        for (double& v : dst) {
            v = parse_double(next(what), "load_model " + what);
            if (!std::isfinite(v)) {
                throw std::runtime_error("load_model: non-finite value in " + what);
            }
        }
    }

private:
    std::istream& in_;
};

}  // namespace

NetworkModel load_model(std::istream& in) {
    std::string magic;
    if (!std::getline(in, magic)) throw std::runtime_error("load_model: empty file");
    if (!magic.empty() && magic.back() == '\r') magic.pop_back();
    if (magic != "MTJSNN-WEIGHTS v1") {
        throw std::runtime_error("load_model: unsupported format/version '" + magic + "'");
    }

    NetworkModel model = NetworkModel::architecture();
    TokenReader tok(in);
    tok.expect_shape("conv", {6, 1, 5, 5}, "conv1 header");
    tok.read_values(model.conv1.w, "conv1 weights");
    tok.expect_shape("bias", {6}, "conv1 bias header");
    tok.read_values(model.conv1.b, "conv1 bias");
    tok.expect_shape("pool", {2, 2}, "pool1 header");
    tok.expect_shape("conv", {12, 6, 5, 5}, "conv2 header");
    tok.read_values(model.conv2.w, "conv2 weights");
    tok.expect_shape("bias", {12}, "conv2 bias header");
    tok.read_values(model.conv2.b, "conv2 bias");
    tok.expect_shape("pool", {2, 2}, "pool2 header");
    tok.expect_shape("dense", {10, 192}, "dense header");
    tok.read_values(model.fc.w, "dense weights");
    tok.expect_shape("bias", {10}, "dense bias header");
    tok.read_values(model.fc.b, "dense bias");
    model.validate();
    return model;
}

NetworkModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_model: cannot open " + path);
    return load_model(in);
}

}  // namespace mtjsnn
