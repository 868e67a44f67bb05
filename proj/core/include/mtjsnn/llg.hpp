#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mtjsnn/device.hpp"
#include "mtjsnn/rng.hpp"

namespace mtjsnn {

struct IntegratorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Standard deviation of each Cartesian component of the thermal field for
// one step of length dt:
//   sigma = sqrt( alpha/(1+alpha^2) · 2 k_B T_K / (gamma mu0 M_s V dt) )
double thermal_field_sigma(const DeviceParams& params, double dt);

Vec3 thermal_field_sample(const DeviceParams& params, double dt, rng::Stream& stream);

// Explicit dm/dt: the damping term is eliminated algebraically, so
// substituting the result back into the implicit equation
//   dm/dt = -gamma (m x H) + alpha (m x dm/dt) + 1/(q N_s) (m x I_s x m)
// leaves only rounding error. i_s is the signed spin-current magnitude;
// its direction is fields.spin_polarization_axis.
Vec3 llg_rhs(const Vec3& m, const Vec3& h_eff, double i_s, const FieldModel& fields,
             const DeviceParams& params);

// One stochastic Heun step: a single thermal sample is drawn and held for
// both the predictor and the corrector; both stages renormalize m.
// Throws IntegratorError if the state stops being finite (dt too large).
MagnetState llg_step(const MagnetState& state, const FieldModel& fields,
                     const DeviceParams& params, double i_s, double dt, rng::Stream& stream);

// Deterministic variant used by convergence checks: thermal field off.
MagnetState llg_step_deterministic(const MagnetState& state, const FieldModel& fields,
                                   const DeviceParams& params, double i_s, double dt);

struct TrialResult {
    bool switched = false;
    MagnetState final_state;
};

struct TrajectorySample {
    double t;
    Vec3 m;
};

// One switching attempt: start in the well opposite to the drive
// (start_sign = -1 is the AP state), tilted by one thermal-equilibrium
// draw of the two transverse modes; integrate T_w with the pulse current,
// then relax_time at zero current, thermal noise on throughout.
// switched = ended in the other well.
TrialResult switching_trial(const DeviceParams& params, const FieldModel& fields,
                            const PulseSpec& pulse, rng::Stream& stream, int start_sign = -1,
                            std::vector<TrajectorySample>* trajectory = nullptr,
                            int trajectory_stride = 1);

// CSV dump, header `t_s,mx,my,mz`.
void write_trajectory_csv(const std::vector<TrajectorySample>& trajectory, std::ostream& out);

}  // namespace mtjsnn
