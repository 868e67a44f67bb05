#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "mtjsnn/network.hpp"
#include "mtjsnn/switch_curve.hpp"

namespace mtjsnn {

// Electrical operating point of the synaptic array. The calibration
// identity I_o = G_o·V_o ties the conductance scale to the dispersion of
// the neuron's switching characteristic.
struct CrossbarParams {
    double V_o = 1.0;   // row spike voltage [V]
    double G_o = 0.0;   // unit-weight conductance [S]
    double G_s = 0.0;   // neuron write-path conductance, 1/R_HM [S]
    double I_o = 0.0;   // current scale [A]

    static CrossbarParams from_curve(const SwitchCurve& curve, double v_o, double r_hm_ohm);
    void validate() const;
};

// One output neuron's column: bipolar conductance pair per input row plus
// the programmable bias-current row.
struct Column {
    std::vector<double> g_plus;   // [S]
    std::vector<double> g_minus;  // [S]
    double i_bias_col = 0.0;      // [A]
    double gamma = 0.0;           // sum(G+ + G-)/G_s

    // caches rebuilt whenever conductances change
    std::vector<double> g_diff;
    std::vector<double> g_sum;
    void rebuild(double g_s);
};

enum class LayerKind { conv, dense };

struct LayerInstance {
    LayerKind kind = LayerKind::conv;
    int out_maps = 0, in_maps = 0, k = 0;  // conv geometry
    int in_size = 0, out_size = 0;
    int out_count = 0, in_count = 0;  // dense geometry; for conv: columns / rows per column
    std::vector<Column> columns;      // conv order: [map][y][x]
};

// One Monte Carlo "chip": per-column conductances and bias currents after
// variation injection. Immutable during runs.
struct HardwareInstance {
    CrossbarParams params;
    double I_bias = 0.0;  // device bias current the columns were built with [A]
    LayerInstance conv1, conv2, dense;
    double sigma_g = 0.0, sigma_bias = 0.0;
    std::uint64_t variation_seed = 0;
};

// Maps quantized weights onto bipolar conductance pairs:
//   w > 0: G+ = w·G_o, G- = G_off;  w < 0 mirrored;  w = 0: both OFF,
// with G_off = G_max/ratio = 3·G_o/10 (a leakage path, not zero).
// Column bias current is I_bias + b_j·I_o. Each convolution output neuron
// gets a column of its own; kernel weights repeat across positions.
HardwareInstance map_weights(const NetworkModel& quantized, const CrossbarParams& params,
                             double i_bias);

// Net synaptic current of Eq. form (sum of signed row currents plus the
// bias row, divided by 1 + gamma). `activations` is the column's gathered
// row input in [0,1].
double column_current(const Column& col, const double* activations, double v_o);

// Multiplies every conductance by an independent (1 + N(0, sigma_g))
// (clamped positive) and every column bias by (1 + N(0, sigma_bias));
// draws are fixed once per instance and reused across images/time-steps.
HardwareInstance apply_variation(const HardwareInstance& instance, double sigma_g,
                                 double sigma_bias, std::uint64_t seed);

// Audit dump: layer,column,gamma,i_bias_uA
void write_instance_summary(const HardwareInstance& instance, std::ostream& out);

}  // namespace mtjsnn
