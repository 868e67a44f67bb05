#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "mtjsnn/snn.hpp"

namespace mtjsnn {

// Digital CMOS baseline energy per image classification; a reporting
// constant, never recomputed.
inline constexpr double kCmosBaselineEnergyJ = 391e-9;

// Expected firing rate of a probabilistic sigmoid neuron fed a rate-coded
// input of intensity i through a weight w:
//   1/2 + (i/2)·(1 - e^-w)/(1 + e^-w)
// The straight chord from (0, 1/2) to (1, sigmoid(w)).
double chord_value(double w, double i);

struct ErrorGrid {
    std::vector<double> w_values;
    std::vector<double> i_values;
    std::vector<double> error;  // [w][i] row-major
    double max_error = 0.0;
    double max_w = 0.0, max_i = 0.0;
};

// |sigmoid(w·i) - chord_value(w, i)| over the grid, i in [0,1].
ErrorGrid approx_error_grid(double w_lo, double w_hi, int n_w, int n_i);

// Dense scan over i in [0,1] at one w.
double max_chord_error(double w, int n_i = 20001);

// `w,i,error` rows.
void write_error_grid_csv(const ErrorGrid& grid, std::ostream& out);

struct VariationReport {
    double sigma_g = 0.0, sigma_bias = 0.0;
    double t_w = 0.0;
    int n_instances = 0;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
    std::vector<double> accuracies;  // per instance, at the end of cfg.T_N steps

    void validate() const;
};

// Runs n_instances independently varied chips over the image subset and
// records the end-of-run accuracy of each. Instance k's variation seed is
// derived from cfg.master_seed and k.
VariationReport variation_sweep(const HardwareInstance& nominal, const SwitchProbability& prob,
                                const RunConfig& cfg, double sigma_g, double sigma_bias,
                                int n_instances, const Dataset& data, std::size_t subset);

// `sigma_g,sigma_bias,t_w_ns,instance,accuracy` rows (append-friendly).
void write_variation_csv(const VariationReport& report, std::ostream& out,
                         bool with_header = true);

struct EnergyParams {
    double r_hm = 400.0;     // heavy-metal write path [Ohm]
    double r_p = 10e3;       // device resistance, P state [Ohm]
    double r_ap = 20e3;      // device resistance, AP state; reference MTJ is fixed AP [Ohm]
    double v_read = 1.0;     // [V]
    double v_o = 1.0;        // row spike voltage [V]
    double t_w = 0.5e-9;     // write cycle [s]
    double t_read = 0.5e-9;  // [s]
    double t_reset = 0.5e-9; // [s]
    double i_reset = 0.0;    // reset current magnitude [A]
};

struct EnergyBreakdown {
    double e_crossbar_write = 0.0;
    double e_neuron_write = 0.0;
    double e_read = 0.0;
    double e_reset = 0.0;
    long timesteps = 0;

    double total() const { return e_crossbar_write + e_neuron_write + e_read + e_reset; }
};

// Folds one run's per-step layer data into the four energy components:
//   crossbar write: sum over rows of (a_i·V_o)^2 · (G+ + G-) · T_w
//                   (neuron input node approximated at 0 V)
//   neuron write:   I_j^2 · R_HM · T_w per column
//   read:           V_read^2/(R_dev + R_ref) · T_read per column
//   reset:          I_reset^2 · R_HM · T_reset per spiking column
class EnergyAccumulator {
public:
    explicit EnergyAccumulator(const EnergyParams& params) : params_(params) {}

    void on_layer(const LayerStepData& data);
    void end_step() { ++steps_; }

    // Per-image breakdown; throws if no steps were recorded (missing trace).
    EnergyBreakdown per_image(double image_count = 1.0) const;

private:
    EnergyParams params_;
    EnergyBreakdown acc_;
    long steps_ = 0;
};

// Runs n_images through the hardware runner with energy accounting and
// returns the mean per-image breakdown.
EnergyBreakdown measure_energy(const HardwareInstance& hw, const SwitchProbability& prob,
                               const RunConfig& cfg, const EnergyParams& params,
                               const Dataset& data, std::size_t n_images);

// `component,joules` rows; carries the CMOS baseline constant verbatim.
void write_energy_csv(const EnergyBreakdown& breakdown, std::ostream& out);

}  // namespace mtjsnn
