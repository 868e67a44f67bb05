#include "mtjsnn/crossbar.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "mtjsnn/rng.hpp"
#include "mtjsnn/text_io.hpp"

namespace mtjsnn {

CrossbarParams CrossbarParams::from_curve(const SwitchCurve& curve, double v_o, double r_hm_ohm) {
    if (std::isnan(curve.I_o) || curve.I_o <= 0.0) {
        throw std::runtime_error("CrossbarParams: curve has no fitted I_o");
    }
    CrossbarParams p;
    p.V_o = v_o;
    p.I_o = curve.I_o;
    p.G_o = curve.I_o / v_o;
    p.G_s = 1.0 / r_hm_ohm;
    p.validate();
    return p;
}

void CrossbarParams::validate() const {
    if (!(V_o > 0.0) || !(G_o > 0.0) || !(G_s > 0.0) || !(I_o > 0.0)) {
        throw std::runtime_error("CrossbarParams: all fields must be positive");
    }
    if (std::abs(I_o - G_o * V_o) > 1e-9 * I_o) {
        throw std::runtime_error("CrossbarParams: calibration identity I_o = G_o*V_o violated");
    }
}

void Column::rebuild(double g_s) {
    const std::size_t n = g_plus.size();
    g_diff.resize(n);
    g_sum.resize(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        g_diff[i] = g_plus[i] - g_minus[i];
        g_sum[i] = g_plus[i] + g_minus[i];
        total += g_sum[i];
    }
    gamma = total / g_s;
}

namespace {

Column make_column(const double* weights, int n_rows, double bias, const CrossbarParams& p,
                   double i_bias) {
    const double g_max = 3.0 * p.G_o;
    const double g_off = g_max / 10.0;
    Column col;
    col.g_plus.resize(n_rows);
    col.g_minus.resize(n_rows);
    for (int i = 0; i < n_rows; ++i) {
        const double w = weights[i];
        const double g_w = std::abs(w) * p.G_o;
        if (g_w > g_max * (1.0 + 1e-12)) {
            throw std::runtime_error("map_weights: |w|*G_o exceeds G_max; run clip_and_quantize");
        }
        if (w > 0.0) {
            col.g_plus[i] = g_w;
            col.g_minus[i] = g_off;
        } else if (w < 0.0) {
            col.g_plus[i] = g_off;
            col.g_minus[i] = g_w;
        } else {
            col.g_plus[i] = g_off;
            col.g_minus[i] = g_off;
        }
    }
    col.i_bias_col = i_bias + bias * p.I_o;
    col.rebuild(p.G_s);
    return col;
}

LayerInstance map_conv(const ConvLayer& layer, int in_size, const CrossbarParams& p,
                       double i_bias) {
    LayerInstance li;
    li.kind = LayerKind::conv;
    li.out_maps = layer.out_maps;
    li.in_maps = layer.in_maps;
    li.k = layer.k;
    li.in_size = in_size;
    li.out_size = in_size - layer.k + 1;
    li.in_count = layer.in_maps * layer.k * layer.k;
    li.out_count = layer.out_maps * li.out_size * li.out_size;
    li.columns.reserve(static_cast<std::size_t>(li.out_count));
    for (int m = 0; m < layer.out_maps; ++m) {
        const Column nominal = make_column(layer.w.data() + m * li.in_count, li.in_count,
                                           layer.b[static_cast<std::size_t>(m)], p, i_bias);
        for (int pos = 0; pos < li.out_size * li.out_size; ++pos) {
            li.columns.push_back(nominal);
        }
    }
    return li;
}

LayerInstance map_dense(const DenseLayer& layer, const CrossbarParams& p, double i_bias) {
    LayerInstance li;
    li.kind = LayerKind::dense;
    li.in_count = layer.in;
    li.out_count = layer.out;
    li.columns.reserve(static_cast<std::size_t>(layer.out));
    for (int m = 0; m < layer.out; ++m) {
        li.columns.push_back(make_column(layer.w.data() + m * layer.in, layer.in,
                                         layer.b[static_cast<std::size_t>(m)], p, i_bias));
    }
    return li;
}

}  // namespace

HardwareInstance map_weights(const NetworkModel& quantized, const CrossbarParams& params,
                             double i_bias) {
    quantized.validate();
    params.validate();
    if (!quantized.weights_within(3.0)) {
        throw std::runtime_error("map_weights: weights exceed the clip bound; quantize first");
    }
    HardwareInstance hw;
    hw.params = params;
    hw.I_bias = i_bias;
    hw.conv1 = map_conv(quantized.conv1, 28, params, i_bias);
    hw.conv2 = map_conv(quantized.conv2, 12, params, i_bias);
    hw.dense = map_dense(quantized.fc, params, i_bias);
    return hw;
}

double column_current(const Column& col, const double* activations, double v_o) {
    double acc = 0.0;
    const std::size_t n = col.g_diff.size();
    for (std::size_t i = 0; i < n; ++i) acc += col.g_diff[i] * activations[i];
    return (acc * v_o + col.i_bias_col) / (1.0 + col.gamma);
}

namespace {

void vary_layer(LayerInstance& layer, int layer_id, double sigma_g, double sigma_bias,
                std::uint64_t key, double g_s) {
    for (std::size_t c = 0; c < layer.columns.size(); ++c) {
        rng::Stream stream(key, (static_cast<std::uint64_t>(layer_id) << 40) | c);
        Column& col = layer.columns[c];
        col.i_bias_col *= 1.0 + sigma_bias * stream.gaussian();
        for (std::size_t i = 0; i < col.g_plus.size(); ++i) {
            col.g_plus[i] *= std::max(1.0 + sigma_g * stream.gaussian(), 1e-6);
            col.g_minus[i] *= std::max(1.0 + sigma_g * stream.gaussian(), 1e-6);
        }
        col.rebuild(g_s);
    }
}

}  // namespace

HardwareInstance apply_variation(const HardwareInstance& instance, double sigma_g,
                                 double sigma_bias, std::uint64_t seed) {
    if (sigma_g < 0.0 || sigma_bias < 0.0) {
        throw std::invalid_argument("apply_variation: sigma must be >= 0");
    }
    HardwareInstance out = instance;
    out.sigma_g = sigma_g;
    out.sigma_bias = sigma_bias;
    out.variation_seed = seed;
    if (sigma_g == 0.0 && sigma_bias == 0.0) return out;

    const std::uint64_t key = seed ^ rng::TAG_VARIATION;
    vary_layer(out.conv1, 1, sigma_g, sigma_bias, key, instance.params.G_s);
    vary_layer(out.conv2, 2, sigma_g, sigma_bias, key, instance.params.G_s);
    vary_layer(out.dense, 3, sigma_g, sigma_bias, key, instance.params.G_s);
    return out;
}

void write_instance_summary(const HardwareInstance& instance, std::ostream& out) {
    out << "layer,column,gamma,i_bias_uA\n";
    const struct {
        const char* name;
        const LayerInstance* layer;
    } layers[] = {{"conv1", &instance.conv1}, {"conv2", &instance.conv2}, {"dense", &instance.dense}};
    for (const auto& entry : layers) {
        for (std::size_t c = 0; c < entry.layer->columns.size(); ++c) {
            const Column& col = entry.layer->columns[c];
            out << entry.name << ',' << c << ',' << format_g9(col.gamma) << ','
                << format_g9(col.i_bias_col * 1e6) << "\n";
        }
    }
}

}  // namespace mtjsnn
