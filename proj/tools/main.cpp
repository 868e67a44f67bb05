// Command-line front end: characterization, training, conversion, spiking
// runs, variation sweeps and energy reports, all driven by a flat
// `key = value` config file. Exit codes: 0 success, 1 usage error,
// 2 runtime/invariant failure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "mtjsnn/analysis.hpp"
#include "mtjsnn/characterize.hpp"
#include "mtjsnn/config.hpp"
#include "mtjsnn/crossbar.hpp"
#include "mtjsnn/llg.hpp"
#include "mtjsnn/mnist.hpp"
#include "mtjsnn/network.hpp"
#include "mtjsnn/snn.hpp"
#include "mtjsnn/text_io.hpp"

namespace fs = std::filesystem;
using namespace mtjsnn;

namespace {

struct GlobalFlags {
    std::string config_path;
    std::string out_dir;
    long long seed = -1;
    int threads = -1;
};

Config assemble_config(const GlobalFlags& flags, const char* seed_key) {
    Config cfg;
    if (!flags.config_path.empty()) cfg.load_file(flags.config_path);
    if (!flags.out_dir.empty()) cfg.set("paths.outdir", flags.out_dir);
    if (flags.seed >= 0 && seed_key) cfg.set(seed_key, std::to_string(flags.seed));
    if (flags.threads >= 0) cfg.set("threads", std::to_string(flags.threads));
    return cfg;
}

fs::path out_file(const Config& cfg, const std::string& name) {
    const fs::path dir(cfg.get_string("paths.outdir"));
    fs::create_directories(dir);
    return dir / name;
}

std::string registry_help() {
    std::ostringstream out;
    out << "Config keys (key = value per line, '#' comments):\n";
    for (const auto& spec : Config::registry()) {
        out << "  " << spec.key;
        for (std::size_t i = spec.key.size(); i < 26; ++i) out << ' ';
        out << spec.doc;
        if (!spec.default_value.empty()) out << " (default: " << spec.default_value << ")";
        out << "\n";
    }
    return out.str();
}

FieldModel field_model_for(const Config& cfg, const DeviceParams& params) {
    return FieldModel::calibrate(params, cfg.get_double("device.n_z"));
}

Dataset load_dataset(const Config& cfg) {
    const std::string images = cfg.require_path("paths.mnist_images");
    const std::string labels = cfg.require_path("paths.mnist_labels");
    return load_mnist(images, labels);
}

struct HardwareSetup {
    SwitchCurve curve;      // probability source
    SwitchCurve cal;        // calibration source (I_bias, I_o); usually == curve
    CrossbarParams params;
    HardwareInstance instance;
    SwitchProbability prob;
    RunConfig run_cfg;
};

HardwareSetup hardware_setup(const Config& cfg, const NetworkModel& model) {
    HardwareSetup hs;
    const std::string curve_path = cfg.get_string("paths.curve");
    if (!fs::exists(curve_path)) {
        throw std::runtime_error("run: switching curve '" + curve_path +
                                 "' not found; characterize first");
    }
    hs.curve = load_curve(curve_path);
    const std::string cal_path = cfg.get_string("paths.curve_cal");
    if (cal_path.empty()) {
        hs.cal = hs.curve;
    } else {
        if (!fs::exists(cal_path)) {
            throw std::runtime_error("run: calibration curve '" + cal_path +
                                     "' not found; characterize first");
        }
        hs.cal = load_curve(cal_path);
        if (std::abs(hs.cal.T_w - hs.curve.T_w) > 1e-6 * hs.curve.T_w) {
            throw std::runtime_error("run: calibration curve T_w differs from the probability curve");
        }
    }
    if (std::isnan(hs.cal.I_bias) || std::isnan(hs.cal.I_o)) {
        throw std::runtime_error("run: curve lacks solved I_bias/I_o; characterize first");
    }

    hs.run_cfg = cfg.run_config();
    hs.run_cfg.T_w = hs.curve.T_w;
    hs.run_cfg.T_K_run = hs.curve.T_K;
    hs.run_cfg.validate_against(hs.curve);

    hs.params = CrossbarParams::from_curve(hs.cal, cfg.get_double("xbar.v_o"),
                                           cfg.get_double("xbar.r_hm_ohm"));
    const NetworkModel quantized = clip_and_quantize(model);
    hs.instance = map_weights(quantized, hs.params, hs.cal.I_bias);
    if (hs.run_cfg.sigma_g > 0.0 || hs.run_cfg.sigma_bias > 0.0) {
        hs.instance = apply_variation(hs.instance, hs.run_cfg.sigma_g, hs.run_cfg.sigma_bias,
                                      hs.run_cfg.master_seed);
    }
    hs.prob = SwitchProbability(hs.curve, hs.run_cfg.prob_mode);
    return hs;
}

int cmd_characterize(const GlobalFlags& flags) {
    const Config cfg = assemble_config(flags, "char.seed");
    const DeviceParams params = cfg.device_params(cfg.get_double("char.temp_k"));
    const FieldModel fields = field_model_for(cfg, params);
    const CurveEstimator estimator(params, fields, cfg.characterize_options());

    SwitchCurve curve = estimator.characterize();
    const SigmoidFit fit = fit_sigmoid(curve);
    save_curve(curve, cfg.get_string("paths.curve"));

    std::printf("characterized T_w=%g ns, T=%g K: %zu points\n", curve.T_w * 1e9, curve.T_K,
                curve.points.size());
    std::printf("  i_bias = %.4f uA\n", curve.I_bias * 1e6);
    std::printf("  i_o    = %.4f uA (sigmoid fit RMSE %.4f)\n", curve.I_o * 1e6, fit.rmse);
    if (fit.poor_fit) {
        std::fprintf(stderr, "warning: poor sigmoid fit (RMSE %.4f > 0.08)\n", fit.rmse);
    }
    std::printf("  i_reset = %.4f uA\n", curve.I_reset * 1e6);
    std::printf("wrote %s\n", cfg.get_string("paths.curve").c_str());
    return 0;
}

int cmd_train(const GlobalFlags& flags) {
    const Config cfg = assemble_config(flags, "train.seed");
    const Dataset train_set = load_dataset(cfg);
    NetworkModel model;
    const TrainHyper hyper = cfg.train_hyper();
    const TrainResult result = train(model, train_set, hyper);
    for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
        std::printf("epoch %2zu: loss %.6f\n", e + 1, result.epoch_loss[e]);
    }
    save_model(model, cfg.get_string("paths.model"));
    std::printf("wrote %s\n", cfg.get_string("paths.model").c_str());

    if (!cfg.get_string("paths.test_images").empty()) {
        const Dataset test_set = load_mnist(cfg.get_string("paths.test_images"),
                                            cfg.require_path("paths.test_labels"));
        const double acc = ann_accuracy(model, test_set, 0, cfg.threads());
        const double qacc = ann_accuracy(clip_and_quantize(model), test_set, 0, cfg.threads());
        std::printf("test accuracy: %.4f (continuous), %.4f (4-bit quantized)\n", acc, qacc);
    }
    return 0;
}

int cmd_run(const GlobalFlags& flags) {
    const Config cfg = assemble_config(flags, "run.master_seed");
    const NetworkModel model = load_model(cfg.get_string("paths.model"));
    const Dataset data = load_dataset(cfg);

    RunResult result;
    if (cfg.get_string("run.mode") == "hardware") {
        const HardwareSetup hs = hardware_setup(cfg, model);
        {
            std::ofstream summary(out_file(cfg, "instance_summary.csv"));
            write_instance_summary(hs.instance, summary);
        }
        result = SnnRunner(hs.instance, hs.prob, hs.run_cfg).run(data);
        if (result.saturation_events > 0) {
            std::printf("saturation events (clamped curve lookups): %ld\n",
                        result.saturation_events);
        }
    } else {
        result = SnnRunner(model, cfg.run_config()).run(data);
    }

    {
        std::ofstream acc(out_file(cfg, "accuracy.csv"));
        write_accuracy_csv(result, acc);
    }
    {
        std::ofstream pred(out_file(cfg, "predictions.csv"));
        write_predictions_csv(result, data, pred);
    }
    std::printf("accuracy after %ld time-steps over %zu images: %.4f\n", result.timesteps,
                result.n_images, result.final_accuracy());
    return 0;
}

int cmd_sweep(const GlobalFlags& flags) {
    const Config cfg = assemble_config(flags, "run.master_seed");
    const NetworkModel model = load_model(cfg.get_string("paths.model"));
    const Dataset data = load_dataset(cfg);
    const HardwareSetup hs = hardware_setup(cfg, model);

    const auto sigmas_g = parse_double_list(cfg.get_string("sweep.sigma_g_list"),
                                            "config: sweep.sigma_g_list");
    const auto sigmas_b = parse_double_list(cfg.get_string("sweep.sigma_bias_list"),
                                            "config: sweep.sigma_bias_list");
    const int n_instances = static_cast<int>(cfg.get_int("sweep.n_instances"));
    const auto subset = static_cast<std::size_t>(cfg.get_int("sweep.subset_images"));

    std::ofstream csv(out_file(cfg, "variation.csv"));
    bool header = true;
    for (const double sg : sigmas_g) {
        for (const double sb : sigmas_b) {
            const VariationReport report =
                variation_sweep(hs.instance, hs.prob, hs.run_cfg, sg, sb, n_instances, data, subset);
            write_variation_csv(report, csv, header);
            header = false;
            std::printf("sigma_g=%g sigma_bias=%g: mean accuracy %.4f (std %.4f, %d chips)\n", sg,
                        sb, report.mean_accuracy, report.std_accuracy, report.n_instances);
        }
    }
    return 0;
}

int cmd_energy(const GlobalFlags& flags) {
    const Config cfg = assemble_config(flags, "run.master_seed");
    const NetworkModel model = load_model(cfg.get_string("paths.model"));
    const Dataset data = load_dataset(cfg);
    const HardwareSetup hs = hardware_setup(cfg, model);

    if (std::isnan(hs.cal.I_reset)) {
        throw std::runtime_error("energy: curve lacks a solved reset current; characterize first");
    }
    EnergyParams ep;
    ep.r_hm = cfg.get_double("xbar.r_hm_ohm");
    ep.r_p = cfg.get_double("energy.r_p_ohm");
    ep.r_ap = cfg.get_double("energy.r_ap_ohm");
    ep.v_read = cfg.get_double("device.v_read_v");
    ep.v_o = cfg.get_double("xbar.v_o");
    ep.t_w = hs.curve.T_w;
    const double t_read = cfg.get_double("energy.t_read_ns");
    const double t_reset = cfg.get_double("energy.t_reset_ns");
    ep.t_read = t_read > 0.0 ? t_read * 1e-9 : hs.curve.T_w;
    ep.t_reset = t_reset > 0.0 ? t_reset * 1e-9 : hs.curve.T_w;
    ep.i_reset = hs.cal.I_reset;

    const auto n_images = static_cast<std::size_t>(cfg.get_int("energy.n_images"));
    const EnergyBreakdown breakdown =
        measure_energy(hs.instance, hs.prob, hs.run_cfg, ep, data, n_images);

    std::ofstream csv(out_file(cfg, "energy.csv"));
    write_energy_csv(breakdown, csv);

    std::printf("per-image energy over %ld time-steps (mean of %zu images):\n",
                breakdown.timesteps, n_images);
    std::printf("  crossbar write: %.4g nJ\n", breakdown.e_crossbar_write * 1e9);
    std::printf("  neuron write:   %.4g nJ\n", breakdown.e_neuron_write * 1e9);
    std::printf("  read:           %.4g nJ\n", breakdown.e_read * 1e9);
    std::printf("  reset:          %.4g nJ\n", breakdown.e_reset * 1e9);
    std::printf("  total:          %.4g nJ (digital CMOS baseline: %.4g nJ)\n",
                breakdown.total() * 1e9, kCmosBaselineEnergyJ * 1e9);
    return 0;
}

int cmd_error_grid(const GlobalFlags& flags) {
    const Config cfg = assemble_config(flags, nullptr);
    const ErrorGrid grid = approx_error_grid(-3.0, 3.0, 61, 101);
    std::ofstream csv(out_file(cfg, "error_grid.csv"));
    write_error_grid_csv(grid, csv);
    std::printf("max |sigmoid(w*i) - chord| = %.6f at w=%.3f, i=%.3f\n", grid.max_error,
                grid.max_w, grid.max_i);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Device-circuit-algorithm co-simulation of MTJ-based probabilistic spiking "
                 "networks"};
    app.require_subcommand(1);
    app.fallthrough();
    app.footer(registry_help());

    GlobalFlags flags;
    app.add_option("--config", flags.config_path, "configuration file (key = value lines)");
    app.add_option("--out", flags.out_dir, "output directory (overrides paths.outdir)");
    app.add_option("--seed", flags.seed, "override the active command's seed");
    app.add_option("--threads", flags.threads, "worker cap (overrides threads)");

    app.add_subcommand("characterize",
                       "Monte Carlo P_switch(I) curve, bias/I_o/reset solve, curve file");
    app.add_subcommand("train", "train the sigmoid CNN on MNIST and write the model file");
    app.add_subcommand("run", "spiking inference (ideal or hardware mode); accuracy CSVs");
    app.add_subcommand("sweep", "Monte Carlo variation study over sigma lists; variation CSV");
    app.add_subcommand("energy", "per-image energy breakdown; energy CSV");
    app.add_subcommand("error-grid", "ANN-vs-converted-output error field; error-grid CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        if (name == "characterize") return cmd_characterize(flags);
        if (name == "train") return cmd_train(flags);
        if (name == "run") return cmd_run(flags);
        if (name == "sweep") return cmd_sweep(flags);
        if (name == "energy") return cmd_energy(flags);
        if (name == "error-grid") return cmd_error_grid(flags);
        std::fprintf(stderr, "error: unknown command '%s'\n", name.c_str());
        return 1;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
