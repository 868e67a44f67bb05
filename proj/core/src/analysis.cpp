#include "mtjsnn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "mtjsnn/text_io.hpp"

namespace mtjsnn {

double chord_value(double w, double i) {
    const double e = std::exp(-w);
    return 0.5 + 0.5 * i * (1.0 - e) / (1.0 + e);
}

namespace {
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace

ErrorGrid approx_error_grid(double w_lo, double w_hi, int n_w, int n_i) {
    if (n_w < 1 || n_i < 2) throw std::invalid_argument("approx_error_grid: bad resolution");
    ErrorGrid grid;
    grid.w_values.resize(static_cast<std::size_t>(n_w));
    grid.i_values.resize(static_cast<std::size_t>(n_i));
    for (int a = 0; a < n_w; ++a) {
        grid.w_values[a] = n_w == 1 ? w_lo : w_lo + (w_hi - w_lo) * a / (n_w - 1);
    }
    for (int b = 0; b < n_i; ++b) {
        grid.i_values[b] = static_cast<double>(b) / (n_i - 1);
    }
    grid.error.resize(static_cast<std::size_t>(n_w) * n_i);
    for (int a = 0; a < n_w; ++a) {
        const double w = grid.w_values[a];
        for (int b = 0; b < n_i; ++b) {
            const double i = grid.i_values[b];
            const double err = std::abs(sigmoid(w * i) - chord_value(w, i));
            grid.error[static_cast<std::size_t>(a) * n_i + b] = err;
            if (err > grid.max_error) {
                grid.max_error = err;
                grid.max_w = w;
                grid.max_i = i;
            }
        }
    }
    return grid;
}

double max_chord_error(double w, int n_i) {
    double max_err = 0.0;
    for (int b = 0; b < n_i; ++b) {
        const double i = static_cast<double>(b) / (n_i - 1);
        max_err = std::max(max_err, std::abs(sigmoid(w * i) - chord_value(w, i)));
    }
    return max_err;
}

void write_error_grid_csv(const ErrorGrid& grid, std::ostream& out) {
    out << "w,i,error\n";
    for (std::size_t a = 0; a < grid.w_values.size(); ++a) {
        for (std::size_t b = 0; b < grid.i_values.size(); ++b) {
            out << format_g9(grid.w_values[a]) << ',' << format_g9(grid.i_values[b]) << ','
                << format_g9(grid.error[a * grid.i_values.size() + b]) << "\n";
        }
    }
}

void VariationReport::validate() const {
    if (n_instances < 2) throw std::runtime_error("VariationReport: need >= 2 instances for std");
    const auto [lo, hi] = std::minmax_element(accuracies.begin(), accuracies.end());
    if (mean_accuracy < *lo - 1e-12 || mean_accuracy > *hi + 1e-12) {
        throw std::runtime_error("VariationReport: mean outside instance range");
    }
}

VariationReport variation_sweep(const HardwareInstance& nominal, const SwitchProbability& prob,
                                const RunConfig& cfg, double sigma_g, double sigma_bias,
                                int n_instances, const Dataset& data, std::size_t subset) {
    if (n_instances < 1) throw std::invalid_argument("variation_sweep: n_instances < 1");
    VariationReport report;
    report.sigma_g = sigma_g;
    report.sigma_bias = sigma_bias;
    report.t_w = cfg.T_w;
    report.n_instances = n_instances;
    report.accuracies.reserve(static_cast<std::size_t>(n_instances));

    for (int k = 0; k < n_instances; ++k) {
        const std::uint64_t chip_seed =
            cfg.master_seed + 0x51B5ull * static_cast<std::uint64_t>(k + 1);
        const HardwareInstance chip = apply_variation(nominal, sigma_g, sigma_bias, chip_seed);
        RunConfig run_cfg = cfg;
        run_cfg.mode = RunMode::hardware;
        SnnRunner runner(chip, prob, run_cfg);
        const RunResult result = runner.run(data, subset);
        report.accuracies.push_back(result.final_accuracy());
    }

    double sum = 0.0;
    for (double a : report.accuracies) sum += a;
    report.mean_accuracy = sum / static_cast<double>(n_instances);
    double var = 0.0;
    for (double a : report.accuracies) {
        var += (a - report.mean_accuracy) * (a - report.mean_accuracy);
    }
    report.std_accuracy =
        n_instances > 1 ? std::sqrt(var / static_cast<double>(n_instances - 1)) : 0.0;
    return report;
}

void write_variation_csv(const VariationReport& report, std::ostream& out, bool with_header) {
    if (with_header) out << "sigma_g,sigma_bias,t_w_ns,instance,accuracy\n";
    for (std::size_t k = 0; k < report.accuracies.size(); ++k) {
        out << format_g9(report.sigma_g) << ',' << format_g9(report.sigma_bias) << ','
            << format_g9(report.t_w * 1e9) << ',' << k << ',' << format_g9(report.accuracies[k])
            << "\n";
    }
}

void EnergyAccumulator::on_layer(const LayerStepData& data) {
    const LayerInstance& layer = *data.layer;
    const std::vector<double>& inputs = *data.inputs;
    const std::vector<double>& currents = *data.currents;
    const std::vector<std::uint8_t>& spikes = *data.spikes;

    double cross = 0.0;
    if (layer.kind == LayerKind::dense) {
        for (const Column& col : layer.columns) {
            for (std::size_t i = 0; i < col.g_sum.size(); ++i) {
                const double a = inputs[i];
                cross += a * a * col.g_sum[i];
            }
        }
    } else {
        const int os = layer.out_size;
        for (int y = 0; y < os; ++y) {
            for (int x = 0; x < os; ++x) {
                for (int m = 0; m < layer.out_maps; ++m) {
                    const Column& col =
                        layer.columns[static_cast<std::size_t>((m * os + y) * os + x)];
                    std::size_t r = 0;
                    for (int i = 0; i < layer.in_maps; ++i) {
                        const double* plane = inputs.data() + i * layer.in_size * layer.in_size;
                        for (int ky = 0; ky < layer.k; ++ky) {
                            const double* row = plane + (y + ky) * layer.in_size + x;
                            for (int kx = 0; kx < layer.k; ++kx, ++r) {
                                cross += row[kx] * row[kx] * col.g_sum[r];
                            }
                        }
                    }
                }
            }
        }
    }
    acc_.e_crossbar_write += cross * params_.v_o * params_.v_o * params_.t_w;

    double i2 = 0.0;
    long n_spikes = 0;
    double read_g = 0.0;
    for (std::size_t c = 0; c < layer.columns.size(); ++c) {
        i2 += currents[c] * currents[c];
        n_spikes += spikes[c];
        const double r_dev = spikes[c] ? params_.r_p : params_.r_ap;
        read_g += 1.0 / (r_dev + params_.r_ap);
    }
    acc_.e_neuron_write += i2 * params_.r_hm * params_.t_w;
    acc_.e_read += params_.v_read * params_.v_read * read_g * params_.t_read;
    acc_.e_reset += static_cast<double>(n_spikes) * params_.i_reset * params_.i_reset *
                    params_.r_hm * params_.t_reset;
}

EnergyBreakdown EnergyAccumulator::per_image(double image_count) const {
    if (steps_ == 0) {
        throw std::runtime_error("EnergyAccumulator: no trace recorded");
    }
    EnergyBreakdown out = acc_;
    const double scale = 1.0 / image_count;
    out.e_crossbar_write *= scale;
    out.e_neuron_write *= scale;
    out.e_read *= scale;
    out.e_reset *= scale;
    out.timesteps = static_cast<long>(static_cast<double>(steps_) * scale + 0.5);
    return out;
}

EnergyBreakdown measure_energy(const HardwareInstance& hw, const SwitchProbability& prob,
                               const RunConfig& cfg, const EnergyParams& params,
                               const Dataset& data, std::size_t n_images) {
    const std::size_t n = std::min(n_images, data.count);
    if (n == 0) throw std::invalid_argument("measure_energy: no images");
    RunConfig run_cfg = cfg;
    run_cfg.mode = RunMode::hardware;
    SnnRunner runner(hw, prob, run_cfg);

    EnergyAccumulator acc(params);
    int layers_seen = 0;
    LayerHook hook = [&](const LayerStepData& d) {
        acc.on_layer(d);
        if (++layers_seen == 3) {
            acc.end_step();
            layers_seen = 0;
        }
    };
    for (std::size_t i = 0; i < n; ++i) {
        long sat = 0;
        runner.run_single(data.image(i), i, &sat, &hook);
    }
    return acc.per_image(static_cast<double>(n));
}

void write_energy_csv(const EnergyBreakdown& breakdown, std::ostream& out) {
    out << "# timesteps=" << breakdown.timesteps << "\n";
    out << "component,joules\n";
    out << "crossbar_write," << format_g9(breakdown.e_crossbar_write) << "\n";
    out << "neuron_write," << format_g9(breakdown.e_neuron_write) << "\n";
    out << "read," << format_g9(breakdown.e_read) << "\n";
    out << "reset," << format_g9(breakdown.e_reset) << "\n";
    out << "total_per_image," << format_g9(breakdown.total()) << "\n";
    out << "cmos_baseline_total," << format_g9(kCmosBaselineEnergyJ) << "\n";
}

}  // namespace mtjsnn
