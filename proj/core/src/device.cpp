#include "mtjsnn/device.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mtjsnn {

namespace {
constexpr double kQuarterPi = std::numbers::pi / 4.0;
}

double DeviceParams::volume() const {
    return kQuarterPi * fl_major_axis * fl_minor_axis * fl_thickness;
}

double DeviceParams::area_mtj() const { return kQuarterPi * fl_major_axis * fl_minor_axis; }

// Write current flows along the minor axis so the spin-Hall polarization
// lands on the easy (major) axis; the conducting cross-section is then
// major axis x HM thickness. This also reproduces R_HM = rho·minor/A_HM
// = 400 Ohm from the Table-I resistivity.
double DeviceParams::area_hm() const { return fl_major_axis * hm_thickness; }

double DeviceParams::spin_count() const { return M_s * volume() / constants::mu_B; }

void DeviceParams::validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("DeviceParams: " + what); };
    if (!(fl_major_axis > fl_minor_axis) || !(fl_minor_axis > 0.0)) {
        fail("need fl_major_axis > fl_minor_axis > 0");
    }
    if (!(fl_thickness > 0.0) || !(hm_thickness > 0.0)) fail("thicknesses must be positive");
    if (!(M_s > 0.0)) fail("M_s must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must be in (0,1)");
    if (!(theta_SH > 0.0 && theta_SH < 1.0)) fail("theta_SH must be in (0,1)");
    if (!(E_B > 0.0)) fail("E_B must be positive");
    if (!(T_K > 0.0)) fail("T_K must be positive");
    if (!(rho_HM > 0.0) || !(R_HM > 0.0)) fail("resistances must be positive");
    if (spin_count() <= 0.0) fail("derived spin count must be positive");
}

double spin_current(const DeviceParams& params, double i_q) {
    return params.theta_SH * (params.area_mtj() / params.area_hm()) * i_q;
}

FieldModel FieldModel::calibrate(const DeviceParams& params, double n_z) {
    const double half_mu0_ms2_v = 0.5 * constants::mu_0 * params.M_s * params.M_s * params.volume();
    const double delta = params.E_B / half_mu0_ms2_v;  // N_y - N_x
    const double in_plane = 1.0 - n_z;
    if (delta >= in_plane) {
        throw std::invalid_argument(
            "FieldModel: barrier too large for the thin-film demag split (N_x would go negative)");
    }
    FieldModel f;
    f.demag_N = {(in_plane - delta) / 2.0, (in_plane + delta) / 2.0, n_z};
    f.validate(params);
    return f;
}

double FieldModel::barrier(const DeviceParams& params) const {
    return 0.5 * constants::mu_0 * params.M_s * params.M_s * params.volume() *
           (demag_N.y - demag_N.x);
}

void FieldModel::validate(const DeviceParams& params) const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("FieldModel: " + what); };
    const double sum = demag_N.x + demag_N.y + demag_N.z;
    if (std::abs(sum - 1.0) > 1e-9) fail("demag factors must sum to 1");
    for (double n : {demag_N.x, demag_N.y, demag_N.z}) {
        if (n < 0.0 || n > 1.0) fail("demag factors must lie in [0,1]");
    }
    const double eb = barrier(params);
    if (std::abs(eb - params.E_B) > 1e-3 * params.E_B) {
        fail("in-plane barrier off by more than 0.1% from E_B");
    }
    if (std::abs(easy_axis.norm() - 1.0) > 1e-12 ||
        std::abs(spin_polarization_axis.norm() - 1.0) > 1e-12) {
        fail("axes must be unit vectors");
    }
}

Vec3 effective_field(const Vec3& m, const FieldModel& fields, const DeviceParams& params,
                     const Vec3& thermal) {
    return Vec3{-params.M_s * fields.demag_N.x * m.x, -params.M_s * fields.demag_N.y * m.y,
                -params.M_s * fields.demag_N.z * m.z} +
           thermal;
}

void PulseSpec::validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("PulseSpec: " + what); };
    if (!(T_w > 0.0)) fail("T_w must be positive");
    if (!(dt > 0.0)) fail("dt must be positive");
    if (dt > T_w / 50.0) fail("dt must be <= T_w/50");
    if (relax_time < 0.0) fail("relax_time must be >= 0");
}

}  // namespace mtjsnn
