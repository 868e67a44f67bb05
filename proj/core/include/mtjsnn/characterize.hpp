#pragma once

#include <cstdint>
#include <vector>

#include "mtjsnn/device.hpp"
#include "mtjsnn/switch_curve.hpp"

namespace mtjsnn {

struct CharacterizeOptions {
    double t_w = 0.5e-9;
    double dt = 0.1e-12;
    double relax_time = 2e-9;
    int grid_points = 41;
    long n_trials = 2000;
    std::uint64_t seed = 1;
    int threads = 0;               // 0 = hardware concurrency
    double grid_max_factor = 2.5;  // grid spans [0, factor · rough critical current]
    double reset_target = 0.999;
};

struct SigmoidFit {
    double i_o = 0.0;
    double rmse = 0.0;
    bool poor_fit = false;  // rmse > 0.08
};

// Root of the monotone interpolant at p = 0.5. Throws if not bracketed.
double solve_bias_root(const SwitchCurve& curve);

// Least-squares fit of p = 1/(1+exp(-(I - I_bias)/I_o)) over the raw
// points; needs curve.I_bias solved. Sets curve.I_o.
SigmoidFit fit_sigmoid(SwitchCurve& curve);

// Monte Carlo characterization of one device at one (T_w, T_K).
// Every estimate is a pure function of (params, fields, options.seed and
// the call's context index), so results are identical across thread counts.
class CurveEstimator {
public:
    CurveEstimator(const DeviceParams& params, const FieldModel& fields,
                   const CharacterizeOptions& options);

    // Fraction of switching trials that succeed at charge current i_q.
    // start_sign=-1: AP start (forward polarity); +1: P start (pass
    // negative current for the reset direction).
    double estimate_p(double i_q, long n_trials, std::uint32_t context, int start_sign = -1) const;

    // Smallest current with p >= 0.5 located by exponential search plus
    // bisection at low trial counts.
    double rough_critical(int start_sign = -1) const;

    // Trials on an explicit grid of forward currents. Throws
    // "grid under-spanned" if the last point never reaches p >= 0.99.
    SwitchCurve estimate_curve(const std::vector<double>& grid, long n_trials,
                               int start_sign = -1) const;
    // Default grid: grid_points currents from 0 to grid_max_factor times
    // the rough critical current.
    SwitchCurve estimate_curve() const;

    // Root of the monotone interpolant at p=0.5, refined by extra trials
    // until the estimate is pinned near 0.5. Inserts refinement points.
    void solve_bias(SwitchCurve& curve) const;

    // Characterizes the reverse direction (P -> AP, opposite polarity)
    // and records the smallest current reaching reset_target.
    void solve_reset(SwitchCurve& curve) const;

    // estimate -> solve_bias -> fit_sigmoid -> solve_reset. Retries with a
    // wider grid if under-spanned.
    SwitchCurve characterize() const;

    const CharacterizeOptions& options() const { return opts_; }

private:
    DeviceParams params_;
    FieldModel fields_;
    CharacterizeOptions opts_;

    double run_batch(double i_q, long n_trials, std::uint64_t stream_base, int start_sign) const;
};

}  // namespace mtjsnn
