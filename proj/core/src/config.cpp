#include "mtjsnn/config.hpp"

#include <fstream>
#include <sstream>

#include "mtjsnn/text_io.hpp"

namespace mtjsnn {

const std::vector<Config::KeySpec>& Config::registry() {
    static const std::vector<KeySpec> keys = {
        {"device.fl_major_nm", Type::Double, "100", "free-layer major axis [nm]"},
        {"device.fl_minor_nm", Type::Double, "40", "free-layer minor axis [nm]"},
        {"device.fl_thickness_nm", Type::Double, "1.2", "free-layer thickness [nm]"},
        {"device.hm_thickness_nm", Type::Double, "2", "heavy-metal thickness [nm]"},
        {"device.m_s_ka_per_m", Type::Double, "1000", "saturation magnetization [kA/m]"},
        {"device.theta_sh", Type::Double, "0.3", "spin-Hall angle [dimensionless, (0,1)]"},
        {"device.alpha", Type::Double, "0.0122", "Gilbert damping [dimensionless, (0,1)]"},
        {"device.e_b_kbt", Type::Double, "20", "energy barrier [units of k_B·300 K]"},
        {"device.rho_hm_uohm_cm", Type::Double, "200", "heavy-metal resistivity [uOhm·cm]"},
        {"device.v_read_v", Type::Double, "1", "read voltage [V]"},
        {"device.n_z", Type::Double, "0.94", "out-of-plane demag factor [dimensionless]"},

        {"char.grid_points", Type::Int, "41", "current-grid size [count]"},
        {"char.n_trials", Type::Int, "2000", "switching trials per grid point [count]"},
        {"char.t_w_ns", Type::Double, "0.5", "write pulse width [ns]"},
        {"char.temp_k", Type::Double, "300", "device temperature [K]"},
        {"char.seed", Type::Int, "1", "characterization seed [integer]"},
        {"char.dt_ps", Type::Double, "0.1", "integrator step [ps]"},
        {"char.relax_ns", Type::Double, "2", "post-pulse relaxation [ns]"},

        {"train.lr", Type::Double, "1", "learning rate [dimensionless]"},
        {"train.batch", Type::Int, "50", "mini-batch size [count]"},
        {"train.epochs", Type::Int, "20", "training epochs [count]"},
        {"train.seed", Type::Int, "1", "training seed [integer]"},

        {"xbar.v_o", Type::Double, "1", "row spike voltage [V]"},
        {"xbar.r_hm_ohm", Type::Double, "400", "neuron write-path resistance [Ohm]"},

        {"run.mode", Type::String, "ideal", "neuron model: ideal | hardware"},
        {"run.timesteps", Type::Int, "50", "spiking time-steps [count]"},
        {"run.n_images", Type::Int, "0", "images to evaluate, 0 = all [count]"},
        {"run.master_seed", Type::Int, "1", "run seed [integer]"},
        {"run.sigma_g", Type::Double, "0", "conductance variation sigma [fraction]"},
        {"run.sigma_bias", Type::Double, "0", "bias-current variation sigma [fraction]"},
        {"run.prob", Type::String, "raw", "probability source: raw | sigmoid"},

        {"sweep.n_instances", Type::Int, "50", "Monte Carlo chips per sigma pair [count]"},
        {"sweep.sigma_g_list", Type::String, "0.2", "comma list of sigma_g values [fraction]"},
        {"sweep.sigma_bias_list", Type::String, "0", "comma list of sigma_bias values [fraction]"},
        {"sweep.subset_images", Type::Int, "1000", "test-subset size per instance [count]"},

        {"energy.r_p_ohm", Type::Double, "10000", "device P-state resistance [Ohm]"},
        {"energy.r_ap_ohm", Type::Double, "20000", "device/reference AP resistance [Ohm]"},
        {"energy.t_read_ns", Type::Double, "0", "read cycle, 0 = curve T_w [ns]"},
        {"energy.t_reset_ns", Type::Double, "0", "reset cycle, 0 = curve T_w [ns]"},
        {"energy.n_images", Type::Int, "10", "images averaged in the energy report [count]"},

        {"paths.mnist_images", Type::String, "", "IDX image file for the active command"},
        {"paths.mnist_labels", Type::String, "", "IDX label file for the active command"},
        {"paths.test_images", Type::String, "", "optional IDX test images (train evaluation)"},
        {"paths.test_labels", Type::String, "", "optional IDX test labels (train evaluation)"},
        {"paths.model", Type::String, "model.txt", "model file"},
        {"paths.curve", Type::String, "curve.txt", "switching-curve cache file"},
        {"paths.curve_cal", Type::String, "", "calibration curve; empty = paths.curve"},
        {"paths.outdir", Type::String, ".", "output directory for CSV artifacts"},

        {"threads", Type::Int, "0", "worker cap, 0 = hardware concurrency [count]"},
    };
    return keys;
}

Config::Config() {
    for (const auto& spec : registry()) values_[spec.key] = spec.default_value;
}

const Config::KeySpec& Config::spec_for(const std::string& key) const {
    for (const auto& spec : registry()) {
        if (spec.key == key) return spec;
    }
    throw ConfigError("config: unknown key '" + key + "'");
}

void Config::validate_value(const KeySpec& spec, const std::string& value) const {
    const std::string ctx = "config: " + spec.key;
    switch (spec.type) {
        case Type::Double: {
            const double v = parse_double(value, ctx);
            const std::string& k = spec.key;
            if ((k == "device.theta_sh" || k == "device.alpha") && !(v > 0.0 && v < 1.0)) {
                throw ConfigError(ctx + ": must be in (0,1)");
            }
            if ((k == "run.sigma_g" || k == "run.sigma_bias") && v < 0.0) {
                throw ConfigError(ctx + ": must be >= 0");
            }
            break;
        }
        case Type::Int:
            (void)parse_int(value, ctx);
            break;
        case Type::String:
            if (spec.key == "run.mode" && value != "ideal" && value != "hardware") {
                throw ConfigError(ctx + ": must be 'ideal' or 'hardware'");
            }
            if (spec.key == "run.prob" && value != "raw" && value != "sigmoid") {
                throw ConfigError(ctx + ": must be 'raw' or 'sigmoid'");
            }
            break;
    }
}

void Config::set(const std::string& key, const std::string& value) {
    const KeySpec& spec = spec_for(key);
    try {
        validate_value(spec, value);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    values_[key] = value;
}

void Config::parse_line(const std::string& line, int line_no, const std::string& origin) {
    std::string_view sv = trim(line);
    if (sv.empty() || sv.front() == '#') return;
    const auto eq = sv.find('=');
    if (eq == std::string_view::npos) {
        throw ConfigError("config: " + origin + ":" + std::to_string(line_no) +
                          ": expected 'key = value'");
    }
    const std::string key(trim(sv.substr(0, eq)));
    const std::string value(trim(sv.substr(eq + 1)));
    try {
        set(key, value);
    } catch (const ConfigError& e) {
        throw ConfigError(std::string(e.what()) + " (" + origin + ":" + std::to_string(line_no) +
                          ")");
    }
}

void Config::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        parse_line(line, line_no, path);
    }
}

double Config::get_double(const std::string& key) const {
    const KeySpec& spec = spec_for(key);
    return parse_double(values_.at(spec.key), "config: " + key);
}

long Config::get_int(const std::string& key) const {
    const KeySpec& spec = spec_for(key);
    return static_cast<long>(parse_int(values_.at(spec.key), "config: " + key));
}

const std::string& Config::get_string(const std::string& key) const {
    return values_.at(spec_for(key).key);
}

DeviceParams Config::device_params(double temp_k) const {
    DeviceParams p;
    p.fl_major_axis = get_double("device.fl_major_nm") * 1e-9;
    p.fl_minor_axis = get_double("device.fl_minor_nm") * 1e-9;
    p.fl_thickness = get_double("device.fl_thickness_nm") * 1e-9;
    p.hm_thickness = get_double("device.hm_thickness_nm") * 1e-9;
    p.M_s = get_double("device.m_s_ka_per_m") * 1e3;
    p.theta_SH = get_double("device.theta_sh");
    p.alpha = get_double("device.alpha");
    p.E_B = get_double("device.e_b_kbt") * constants::k_B * constants::T_ref;
    p.rho_HM = get_double("device.rho_hm_uohm_cm") * 1e-8;
    p.T_K = temp_k;
    p.R_HM = get_double("xbar.r_hm_ohm");
    p.V_read = get_double("device.v_read_v");
    try {
        p.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: device.*: ") + e.what());
    }
    return p;
}

CharacterizeOptions Config::characterize_options() const {
    CharacterizeOptions opts;
    opts.t_w = get_double("char.t_w_ns") * 1e-9;
    opts.dt = get_double("char.dt_ps") * 1e-12;
    opts.relax_time = get_double("char.relax_ns") * 1e-9;
    opts.grid_points = static_cast<int>(get_int("char.grid_points"));
    opts.n_trials = get_int("char.n_trials");
    opts.seed = static_cast<std::uint64_t>(get_int("char.seed"));
    opts.threads = threads();
    return opts;
}

TrainHyper Config::train_hyper() const {
    TrainHyper h;
    h.lr = get_double("train.lr");
    h.batch = static_cast<int>(get_int("train.batch"));
    h.epochs = static_cast<int>(get_int("train.epochs"));
    h.seed = static_cast<std::uint64_t>(get_int("train.seed"));
    h.threads = threads();
    if (h.lr <= 0.0 || h.batch <= 0 || h.epochs <= 0) {
        throw ConfigError("config: train.*: lr, batch and epochs must be positive");
    }
    return h;
}

RunConfig Config::run_config() const {
    RunConfig cfg;
    cfg.T_N = get_int("run.timesteps");
    cfg.mode = get_string("run.mode") == "hardware" ? RunMode::hardware : RunMode::ideal;
    cfg.V_o = get_double("xbar.v_o");
    cfg.sigma_g = get_double("run.sigma_g");
    cfg.sigma_bias = get_double("run.sigma_bias");
    cfg.master_seed = static_cast<std::uint64_t>(get_int("run.master_seed"));
    cfg.n_images = static_cast<std::size_t>(get_int("run.n_images"));
    cfg.threads = threads();
    cfg.prob_mode = get_string("run.prob") == "sigmoid" ? SwitchProbability::Mode::sigmoid
                                                        : SwitchProbability::Mode::raw_curve;
    if (cfg.T_N < 1) throw ConfigError("config: run.timesteps: must be >= 1");
    return cfg;
}

const std::string& Config::require_path(const std::string& key) const {
    const std::string& value = get_string(key);
    if (value.empty()) throw ConfigError("config: " + key + ": required path is not set");
    return value;
}

int Config::threads() const { return static_cast<int>(get_int("threads")); }

std::vector<double> parse_double_list(const std::string& text, const std::string& context) {
    std::vector<double> out;
    std::string token;
    std::stringstream ss(text);
    while (std::getline(ss, token, ',')) {
        const auto t = trim(token);
        if (t.empty()) continue;
        out.push_back(parse_double(t, context));
    }
    if (out.empty()) throw std::runtime_error(context + ": empty list");
    return out;
}

}  // namespace mtjsnn
