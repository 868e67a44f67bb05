#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "mtjsnn/characterize.hpp"
#include "mtjsnn/llg.hpp"

using namespace mtjsnn;

namespace {

DeviceParams table_params() {
    DeviceParams p;  // defaults carry the device table values
    p.validate();
    return p;
}

}  // namespace

TEST_CASE("device geometry and derived quantities") {
    const DeviceParams p = table_params();
    CHECK(p.volume() == doctest::Approx(std::numbers::pi / 4.0 * 100e-9 * 40e-9 * 1.2e-9)
                            .epsilon(1e-12));
    CHECK(std::abs(p.volume() - 3.7699e-24) < 1e-30 / 1e-6);  // within 1e-30 m^3 of table value
    CHECK(p.spin_count() == doctest::Approx(p.M_s * p.volume() / constants::mu_B));
    CHECK(p.spin_count() > 0.0);

    DeviceParams bad = p;
    bad.fl_minor_axis = 200e-9;  // minor > major
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.alpha = 1.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("spin current: zero, hand value, linearity") {
    const DeviceParams p = table_params();
    CHECK(spin_current(p, 0.0) == 0.0);

    // hand evaluation: 0.3 * (pi/4*100*40 nm^2)/(100*2 nm^2) * 71 uA
    const double ratio = (std::numbers::pi / 4.0 * 100.0 * 40.0) / (100.0 * 2.0);
    const double expect = 0.3 * ratio * 71e-6;
    CHECK(spin_current(p, 71e-6) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(spin_current(p, 71e-6) == doctest::Approx(334.58e-6).epsilon(1e-4));
    CHECK(spin_current(p, -71e-6) == doctest::Approx(-expect).epsilon(1e-12));  // sign preserved

    rng::Stream s(3, 3);
    for (int i = 0; i < 50; ++i) {
        DeviceParams q = p;
        q.theta_SH = 0.05 + 0.9 * s.uniform01();
        q.fl_major_axis = (50.0 + 100.0 * s.uniform01()) * 1e-9;
        q.fl_minor_axis = q.fl_major_axis * (0.2 + 0.5 * s.uniform01());
        const double i_q = (s.uniform01() - 0.5) * 2e-4;
        CHECK(spin_current(q, 2.0 * i_q) == doctest::Approx(2.0 * spin_current(q, i_q)));
    }
}

TEST_CASE("field model calibration hits the barrier") {
    const DeviceParams p = table_params();
    const FieldModel f = FieldModel::calibrate(p);
    CHECK(f.demag_N.x + f.demag_N.y + f.demag_N.z == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.demag_N.x > 0.0);
    CHECK(f.demag_N.y > f.demag_N.x);
    // independent barrier recomputation
    const double barrier =
        0.5 * constants::mu_0 * p.M_s * p.M_s * p.volume() * (f.demag_N.y - f.demag_N.x);
    CHECK(std::abs(barrier - 20.0 * constants::k_B * 300.0) < 1e-3 * p.E_B);
    CHECK_NOTHROW(f.validate(p));

    DeviceParams huge = p;
    huge.E_B = 200.0 * constants::k_B * 300.0;  // cannot fit in the in-plane split
    CHECK_THROWS_AS(FieldModel::calibrate(huge), std::invalid_argument);
}

TEST_CASE("effective field: diagonal demag plus thermal") {
    const DeviceParams p = table_params();
    const FieldModel f = FieldModel::calibrate(p);

    const Vec3 hx = effective_field({1, 0, 0}, f, p, {});
    CHECK(hx.x == doctest::Approx(-p.M_s * f.demag_N.x));
    CHECK(hx.y == 0.0);
    CHECK(hx.z == 0.0);

    const Vec3 hz = effective_field({0, 0, 1}, f, p, {});
    CHECK(hz.z == doctest::Approx(-p.M_s * f.demag_N.z));

    // N_x = N_y: in-plane m gives a field antiparallel to its projection
    FieldModel sym = f;
    const double nxy = 0.5 * (f.demag_N.x + f.demag_N.y);
    sym.demag_N = {nxy, nxy, f.demag_N.z};
    const Vec3 m{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 0.0};
    const Vec3 h = effective_field(m, sym, p, {});
    CHECK(h.x == doctest::Approx(h.y));
    CHECK(h.x < 0.0);
    CHECK(h.cross(m).norm() < 1e-9 * h.norm());

    const Vec3 th{123.0, -45.0, 6.0};
    const Vec3 sum = effective_field(m, sym, p, th);
    CHECK(sum.x == doctest::Approx(h.x + th.x));
    CHECK(sum.z == doctest::Approx(h.z + th.z));
}

TEST_CASE("thermal field sigma: formula, scaling, statistics") {
    const DeviceParams p = table_params();
    const double dt = 1e-13;
    const double expect = std::sqrt(p.alpha / (1.0 + p.alpha * p.alpha) * 2.0 * constants::k_B *
                                    p.T_K /
                                    (constants::gamma_e * constants::mu_0 * p.M_s * p.volume() * dt));
    CHECK(thermal_field_sigma(p, dt) == doctest::Approx(expect).epsilon(1e-12));

    DeviceParams cold = p;
    cold.T_K = 0.0;
    CHECK(thermal_field_sigma(cold, dt) == 0.0);

    // halving dt scales sigma by sqrt(2)
    CHECK(thermal_field_sigma(p, dt / 2.0) ==
          doctest::Approx(std::sqrt(2.0) * thermal_field_sigma(p, dt)).epsilon(1e-12));

    // sample mean of 1e6 draws per component within 4 sigma/sqrt(n)
    rng::Stream s(11, 0);
    const long n = 1000000;
    Vec3 sum{};
    double sum2 = 0.0;
    for (long i = 0; i < n; ++i) {
        const Vec3 v = thermal_field_sample(p, dt, s);
        sum += v;
        sum2 += v.x * v.x;
    }
    const double sigma = thermal_field_sigma(p, dt);
    const double tol = 4.0 * sigma / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(sum.x / n) < tol);
    CHECK(std::abs(sum.y / n) < tol);
    CHECK(std::abs(sum.z / n) < tol);
    CHECK(std::sqrt(sum2 / n) == doctest::Approx(sigma).epsilon(0.01));
}

TEST_CASE("explicit form satisfies the implicit equation") {
    const DeviceParams p = table_params();
    const FieldModel f = FieldModel::calibrate(p);
    rng::Stream s(21, 0);
    for (int i = 0; i < 20; ++i) {
        const Vec3 m = Vec3{s.gaussian(), s.gaussian(), s.gaussian()}.normalized();
        const Vec3 h{4e4 * s.gaussian(), 4e4 * s.gaussian(), 4e4 * s.gaussian()};
        const double i_s = 1e-3 * (s.uniform01() - 0.5);
        const Vec3 dm = llg_rhs(m, h, i_s, f, p);
        const Vec3 is_vec = i_s * f.spin_polarization_axis;
        const Vec3 implicit = -constants::gamma_e * m.cross(h) + p.alpha * m.cross(dm) +
                              (1.0 / (constants::q_e * p.spin_count())) *
                                  (is_vec - m * m.dot(is_vec));
        CHECK((dm - implicit).norm() < 1e-10 * dm.norm());
    }
}

TEST_CASE("zero-torque fixed point is stationary") {
    const DeviceParams p = table_params();
    const FieldModel f = FieldModel::calibrate(p);
    for (double sign : {-1.0, 1.0}) {
        MagnetState s;
        s.m = {sign, 0.0, 0.0};
        const MagnetState next = llg_step_deterministic(s, f, p, 0.0, 1e-13);
        CHECK((next.m - s.m).norm() < 1e-12);
    }
}

TEST_CASE("undamped precession matches the analytic rotation") {
    DeviceParams p = table_params();
    p.alpha = 0.0;
    const FieldModel f = FieldModel::calibrate(table_params());
    const Vec3 h{0.0, 0.0, 1e4};
    const double dt = 1e-13;
    const int n = 1000;

    Vec3 m{1.0, 0.0, 0.0};
    for (int i = 0; i < n; ++i) {
        const Vec3 k1 = llg_rhs(m, h, 0.0, f, p);
        const Vec3 mp = (m + dt * k1).normalized();
        const Vec3 k2 = llg_rhs(mp, h, 0.0, f, p);
        m = (m + (0.5 * dt) * (k1 + k2)).normalized();
    }
    // dm/dt = -gamma m x H rotates m about +z at +gamma|H|
    const double ang = constants::gamma_e * 1e4 * n * dt;
    const Vec3 exact{std::cos(ang), std::sin(ang), 0.0};
    CHECK((m - exact).norm() < 1e-6);
    CHECK(std::abs(m.norm() - 1.0) < 1e-12);

    // conservation of the field-aligned component for a tilted start
    Vec3 mt = Vec3{0.6, 0.0, 0.8}.normalized();
    const double mz0 = mt.z;
    for (int i = 0; i < n; ++i) {
        const Vec3 k1 = llg_rhs(mt, h, 0.0, f, p);
        const Vec3 mp = (mt + dt * k1).normalized();
        const Vec3 k2 = llg_rhs(mp, h, 0.0, f, p);
        mt = (mt + (0.5 * dt) * (k1 + k2)).normalized();
    }
    CHECK(std::abs(mt.z - mz0) < 1e-6);
}

TEST_CASE("unit norm holds through 1e6 noisy steps") {
    const DeviceParams p = table_params();
    const FieldModel f = FieldModel::calibrate(p);
    rng::Stream s(31, 0);
    MagnetState state;
    state.m = {-1.0, 0.0, 0.0};
    double worst = 0.0;
    for (long i = 0; i < 1000000; ++i) {
        state = llg_step(state, f, p, 0.0, 1e-13, s);
        worst = std::max(worst, std::abs(state.m.norm() - 1.0));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("halving dt barely moves a noise-free switching trajectory") {
    const DeviceParams p = table_params();
    const FieldModel f = FieldModel::calibrate(p);
    auto run = [&](double dt) {
        MagnetState s;
        s.m = Vec3{-1.0, 0.16, 0.03}.normalized();
        const double i_s = spin_current(p, 110e-6);
        const long np = std::lround(0.5e-9 / dt), nr = std::lround(2e-9 / dt);
        for (long i = 0; i < np; ++i) s = llg_step_deterministic(s, f, p, i_s, dt);
        for (long i = 0; i < nr; ++i) s = llg_step_deterministic(s, f, p, 0.0, dt);
        return s.m;
    };
    const Vec3 full = run(1e-13);
    const Vec3 half = run(5e-14);
    const Vec3 quarter = run(2.5e-14);
    CHECK(full.x > 0.9);  // it switched
    CHECK((full - half).norm() < 1e-4);
    // order >= 1 convergence: successive differences shrink
    CHECK((half - quarter).norm() < (full - half).norm());
}

TEST_CASE("pulse spec invariants") {
    PulseSpec ps;
    CHECK_NOTHROW(ps.validate());
    ps.dt = ps.T_w / 10.0;  // too coarse
    CHECK_THROWS_AS(ps.validate(), std::invalid_argument);
    ps = PulseSpec{};
    ps.relax_time = -1.0;
    CHECK_THROWS_AS(ps.validate(), std::invalid_argument);
}

TEST_CASE("switching trials: retention, saturation, reset" * doctest::timeout(600)) {
    const DeviceParams p = table_params();
    const FieldModel f = FieldModel::calibrate(p);
    CharacterizeOptions opts;
    opts.threads = 0;
    const CurveEstimator est(p, f, opts);

    // zero current: the 20 kT barrier holds over sub-ns scales
    CHECK(est.estimate_p(0.0, 1000, 90001) < 0.01);
    // far above the P=0.5 current: saturated switching
    CHECK(est.estimate_p(5 * 71e-6, 1000, 90002) > 0.99);
    // reversed polarity from the P state restores AP
    CHECK(est.estimate_p(-5 * 71e-6, 1000, 90003, +1) > 0.99);
}

TEST_CASE("identical seed gives an identical trial outcome sequence") {
    const DeviceParams p = table_params();
    const FieldModel f = FieldModel::calibrate(p);
    PulseSpec pulse;
    pulse.I_q = 70e-6;
    auto outcomes = [&](std::uint64_t seed) {
        std::vector<bool> v;
        for (int t = 0; t < 60; ++t) {
            rng::Stream s(seed ^ rng::TAG_TRIAL, static_cast<std::uint64_t>(t));
            v.push_back(switching_trial(p, f, pulse, s).switched);
        }
        return v;
    };
    const auto a = outcomes(42), b = outcomes(42), c = outcomes(43);
    CHECK(a == b);
    CHECK(a != c);

    int flips = 0;
    for (bool x : a) flips += x;
    CHECK(flips > 5);  // near the 0.5 point both outcomes occur
    CHECK(flips < 55);
}

TEST_CASE("trajectory dump format") {
    const DeviceParams p = table_params();
    const FieldModel f = FieldModel::calibrate(p);
    PulseSpec pulse;
    pulse.I_q = 100e-6;
    pulse.T_w = 0.1e-9;
    pulse.relax_time = 0.0;
    pulse.dt = 1e-12;
    rng::Stream s(7, 0);
    std::vector<TrajectorySample> traj;
    switching_trial(p, f, pulse, s, -1, &traj, 10);
    CHECK(traj.size() == 11);  // steps 0,10,...,100
    std::ostringstream out;
    write_trajectory_csv(traj, out);
    const std::string text = out.str();
    CHECK(text.substr(0, 14) == "t_s,mx,my,mz\n0");
    CHECK(std::count(text.begin(), text.end(), '\n') == 12);
}
