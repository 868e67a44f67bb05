#pragma once

#include "mtjsnn/constants.hpp"
#include "mtjsnn/vec3.hpp"

namespace mtjsnn {

// Free-layer / heavy-metal stack parameters. Lengths in m, M_s in A/m,
// E_B in J, resistivity in Ohm·m.
struct DeviceParams {
    double fl_major_axis = 100e-9;
    double fl_minor_axis = 40e-9;
    double fl_thickness = 1.2e-9;
    double hm_thickness = 2e-9;
    double M_s = 1000e3;
    double theta_SH = 0.3;
    double alpha = 0.0122;
    double E_B = 20.0 * constants::k_B * constants::T_ref;
    double rho_HM = 200e-8;  // 200 uOhm·cm
    double T_K = 300.0;
    double R_HM = 400.0;  // write-path resistance; independent of geometry, see README
    double V_read = 1.0;

    double volume() const;       // elliptic-disk free layer [m^3]
    double area_mtj() const;     // pi/4 · major · minor [m^2]
    double area_hm() const;      // HM cross-section normal to charge flow [m^2]
    double spin_count() const;   // N_s = M_s·V / mu_B
    void validate() const;       // throws std::invalid_argument on violation
};

// Spin current injected into the free layer for a charge current through
// the heavy metal: I_s = theta_SH · (A_MTJ/A_HM) · I_q. Sign preserved.
double spin_current(const DeviceParams& params, double i_q);

struct MagnetState {
    Vec3 m{-1.0, 0.0, 0.0};
    double t = 0.0;
};

// Diagonal demagnetization tensor in the principal frame plus the fixed
// axes of the stack. Easy axis is the in-plane major axis (x), film
// normal is z, injected spins are polarized along ±x.
struct FieldModel {
    Vec3 demag_N{};
    Vec3 easy_axis{1.0, 0.0, 0.0};
    Vec3 spin_polarization_axis{1.0, 0.0, 0.0};

    // Demag factors are not free inputs: N_y - N_x is solved so the
    // in-plane shape-anisotropy barrier mu0·M_s^2·V·(N_y-N_x)/2 equals
    // params.E_B, with N_z fixed by the thin-film approximation.
    static FieldModel calibrate(const DeviceParams& params, double n_z = 0.94);

    double barrier(const DeviceParams& params) const;  // in-plane barrier [J]
    void validate(const DeviceParams& params) const;
};

// H_demag + supplied thermal sample, in A/m.
Vec3 effective_field(const Vec3& m, const FieldModel& fields, const DeviceParams& params,
                     const Vec3& thermal);

struct PulseSpec {
    double I_q = 0.0;         // signed charge current through the HM [A]
    double T_w = 0.5e-9;      // pulse width [s]
    double relax_time = 2e-9; // zero-current tail, noise stays on [s]
    double dt = 0.1e-12;      // integrator step [s]

    void validate() const;  // T_w > 0, dt > 0, dt <= T_w/50, relax >= 0
};

}  // namespace mtjsnn
