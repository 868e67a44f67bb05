#include "mtjsnn/llg.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

namespace mtjsnn {

double thermal_field_sigma(const DeviceParams& params, double dt) {
    const double a = params.alpha / (1.0 + params.alpha * params.alpha);
    const double denom =
        constants::gamma_e * constants::mu_0 * params.M_s * params.volume() * dt;
    return std::sqrt(a * 2.0 * constants::k_B * params.T_K / denom);
}

Vec3 thermal_field_sample(const DeviceParams& params, double dt, rng::Stream& stream) {
    return thermal_field_sigma(params, dt) * stream.gaussian3();
}

Vec3 llg_rhs(const Vec3& m, const Vec3& h_eff, double i_s, const FieldModel& fields,
             const DeviceParams& params) {
    const Vec3 precession = -constants::gamma_e * m.cross(h_eff);
    // m x (I_s x m) = I_s - m (m·I_s) for unit m
    const Vec3 is_vec = i_s * fields.spin_polarization_axis;
    const Vec3 torque = (1.0 / (constants::q_e * params.spin_count())) *
                        (is_vec - m * m.dot(is_vec));
    const Vec3 g = precession + torque;
    return (g + params.alpha * m.cross(g)) * (1.0 / (1.0 + params.alpha * params.alpha));
}

namespace {

inline MagnetState heun_advance(const MagnetState& state, const FieldModel& fields,
                                const DeviceParams& params, double i_s, double dt,
                                const Vec3& thermal) {
    const Vec3 k1 =
        llg_rhs(state.m, effective_field(state.m, fields, params, thermal), i_s, fields, params);
    const Vec3 predictor = (state.m + dt * k1).normalized();
    const Vec3 k2 =
        llg_rhs(predictor, effective_field(predictor, fields, params, thermal), i_s, fields, params);
    MagnetState next;
    next.m = (state.m + (0.5 * dt) * (k1 + k2)).normalized();
    next.t = state.t + dt;
    if (!next.m.finite()) {
        throw IntegratorError("llg_step: state became non-finite (dt too large?)");
    }
    return next;
}

}  // namespace

MagnetState llg_step(const MagnetState& state, const FieldModel& fields, const DeviceParams& params,
                     double i_s, double dt, rng::Stream& stream) {
    return heun_advance(state, fields, params, i_s, dt,
                        thermal_field_sample(params, dt, stream));
}

MagnetState llg_step_deterministic(const MagnetState& state, const FieldModel& fields,
                                   const DeviceParams& params, double i_s, double dt) {
    return heun_advance(state, fields, params, i_s, dt, Vec3{});
}

TrialResult switching_trial(const DeviceParams& params, const FieldModel& fields,
                            const PulseSpec& pulse, rng::Stream& stream, int start_sign,
                            std::vector<TrajectorySample>* trajectory, int trajectory_stride) {
    pulse.validate();
    const double s = start_sign < 0 ? -1.0 : 1.0;

    // Thermal-equilibrium tilt of the starting well: each transverse mode
    // gets its equipartition variance. The in-plane mode dominates, so
    // <theta^2> = sigma_y^2 + sigma_z^2 ~ k_B T / (2 E_B).
    const double var_y = constants::k_B * params.T_K / (2.0 * params.E_B);
    const double stiffness_ratio = (fields.demag_N.z - fields.demag_N.x) /
                                   (fields.demag_N.y - fields.demag_N.x);
    const double m_y = std::sqrt(var_y) * stream.gaussian();
    const double m_z = std::sqrt(var_y / stiffness_ratio) * stream.gaussian();
    const double trans2 = std::min(m_y * m_y + m_z * m_z, 0.99);

    MagnetState state;
    state.m = Vec3{s * std::sqrt(1.0 - trans2), m_y, m_z}.normalized();
    state.t = 0.0;

    const double i_s = spin_current(params, pulse.I_q);
    const long pulse_steps = std::lround(pulse.T_w / pulse.dt);
    const long relax_steps = std::lround(pulse.relax_time / pulse.dt);

    long step_index = 0;
    auto record = [&]() {
        if (trajectory && step_index % trajectory_stride == 0) {
            trajectory->push_back({state.t, state.m});
        }
        ++step_index;
    };

    record();
    for (long i = 0; i < pulse_steps; ++i) {
        state = llg_step(state, fields, params, i_s, pulse.dt, stream);
        record();
    }
    for (long i = 0; i < relax_steps; ++i) {
        state = llg_step(state, fields, params, 0.0, pulse.dt, stream);
        record();
    }

    TrialResult result;
    result.final_state = state;
    result.switched = state.m.dot(fields.easy_axis) * s < 0.0;
    return result;
}

void write_trajectory_csv(const std::vector<TrajectorySample>& trajectory, std::ostream& out) {
    out << "t_s,mx,my,mz\n";
    char buf[32];
    auto put = [&](double v, char sep) {
        const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
        out.write(buf, res.ptr - buf);
        out.put(sep);
    };
    for (const auto& s : trajectory) {
        put(s.t, ',');
        put(s.m.x, ',');
        put(s.m.y, ',');
        put(s.m.z, '\n');
    }
}

}  // namespace mtjsnn
