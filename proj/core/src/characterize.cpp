#include "mtjsnn/characterize.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

#include "mtjsnn/llg.hpp"
#include "mtjsnn/parallel.hpp"

namespace mtjsnn {

namespace {
constexpr long kBatch = 50;  // trials per parallel work item
}

CurveEstimator::CurveEstimator(const DeviceParams& params, const FieldModel& fields,
                               const CharacterizeOptions& options)
    : params_(params), fields_(fields), opts_(options) {
    params_.validate();
    fields_.validate(params_);
    if (opts_.grid_points < 5) throw std::invalid_argument("CurveEstimator: grid_points < 5");
    if (opts_.n_trials < 1) throw std::invalid_argument("CurveEstimator: n_trials < 1");
}

double CurveEstimator::run_batch(double i_q, long n_trials, std::uint64_t stream_base,
                                 int start_sign) const {
    PulseSpec pulse;
    pulse.I_q = i_q;
    pulse.T_w = opts_.t_w;
    pulse.relax_time = opts_.relax_time;
    pulse.dt = opts_.dt;

    const std::uint64_t key = opts_.seed ^ rng::TAG_TRIAL;
    const long n_batches = (n_trials + kBatch - 1) / kBatch;
    std::vector<long> successes(static_cast<std::size_t>(n_batches), 0);

    parallel_for(0, static_cast<std::size_t>(n_batches), opts_.threads, [&](std::size_t b) {
        const long first = static_cast<long>(b) * kBatch;
        const long last = std::min(first + kBatch, n_trials);
        long hit = 0;
        for (long trial = first; trial < last; ++trial) {
            rng::Stream stream(key, stream_base + static_cast<std::uint64_t>(trial));
            if (switching_trial(params_, fields_, pulse, stream, start_sign).switched) ++hit;
        }
        successes[b] = hit;
    });

    long total = 0;
    for (long s : successes) total += s;
    return static_cast<double>(total) / static_cast<double>(n_trials);
}

double CurveEstimator::estimate_p(double i_q, long n_trials, std::uint32_t context,
                                  int start_sign) const {
    // context picks a disjoint stream range: up to 2^32 trials per context
    return run_batch(i_q, n_trials, static_cast<std::uint64_t>(context) << 32, start_sign);
}

double CurveEstimator::rough_critical(int start_sign) const {
    const long n_coarse = 200;
    const double polarity = start_sign < 0 ? 1.0 : -1.0;
    std::uint32_t ctx = start_sign < 0 ? 1u : 101u;

    double hi = 1e-6;  // 1 uA
    double p_hi = 0.0;
    for (int iter = 0; iter < 24; ++iter) {
        p_hi = estimate_p(polarity * hi, n_coarse, ctx++, start_sign);
        if (p_hi >= 0.9) break;
        hi *= 2.0;
        if (hi > 0.1) {
            throw std::runtime_error("rough_critical: no switching below 100 mA");
        }
    }
    if (p_hi < 0.9) throw std::runtime_error("rough_critical: saturation not reached");

    double lo = 0.0;
    for (int iter = 0; iter < 12; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double p = estimate_p(polarity * mid, n_coarse, ctx++, start_sign);
        if (p < 0.5) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return hi;
}

SwitchCurve CurveEstimator::estimate_curve(const std::vector<double>& grid, long n_trials,
                                           int start_sign) const {
    if (grid.size() < 2) throw std::invalid_argument("estimate_curve: grid too small");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw std::invalid_argument("estimate_curve: grid must be strictly increasing");
        }
    }
    const double polarity = start_sign < 0 ? 1.0 : -1.0;

    SwitchCurve curve;
    curve.T_w = opts_.t_w;
    curve.T_K = params_.T_K;
    curve.seed = opts_.seed;
    curve.points.resize(grid.size());

    // One context per grid point; points are internally parallel over
    // trials, so nested parallelism is unnecessary.
    const std::uint32_t ctx0 = start_sign < 0 ? 1000u : 500000u;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CurvePoint pt;
        pt.i_q = grid[i];
        pt.n_trials = n_trials;
        pt.p = estimate_p(polarity * grid[i], n_trials, ctx0 + static_cast<std::uint32_t>(i),
                          start_sign);
        curve.points[i] = pt;
    }

    double p_max = 0.0;
    for (const auto& pt : curve.points) p_max = std::max(p_max, pt.p);
    if (p_max < 0.99) {
        throw std::runtime_error("estimate_curve: grid under-spanned (max p < 0.99)");
    }
    return curve;
}

SwitchCurve CurveEstimator::estimate_curve() const {
    const double i_c = rough_critical();
    std::vector<double> grid(static_cast<std::size_t>(opts_.grid_points));
    const double top = opts_.grid_max_factor * i_c;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid[i] = top * static_cast<double>(i) / static_cast<double>(grid.size() - 1);
    }
    return estimate_curve(grid, opts_.n_trials);
}

double solve_bias_root(const SwitchCurve& curve) {
    const auto interp = curve.interpolant();
    if (!(interp.y_front() < 0.5 && interp.y_back() > 0.5)) {
        throw std::runtime_error("solve_bias: p=0.5 not bracketed by the curve");
    }
    return interp.solve(0.5);
}

void CurveEstimator::solve_bias(SwitchCurve& curve) const {
    auto interp = curve.interpolant();
    double i_star = solve_bias_root(curve);
    const double span = interp.x_max() - interp.x_min();

    std::uint32_t ctx = 2000000u;
    const long n_quick = opts_.n_trials;
    const long n_fine = std::max<long>(8 * opts_.n_trials, 2000);

    auto slope_at = [&](double i) {
        const double floor = 0.1 / std::max(span, 1e-12);
        return std::max(interp.derivative(i), floor);
    };

    // coarse: walk the estimate to within ~1% of 0.5
    for (int iter = 0; iter < 20; ++iter) {
        const double p = estimate_p(i_star, n_quick, ctx++);
        if (std::abs(p - 0.5) <= 0.01) break;
        i_star += (0.5 - p) / slope_at(i_star);
        i_star = std::clamp(i_star, interp.x_min(), interp.x_max());
    }
    // fine: pin the true probability close enough that a fresh estimate
    // at n_trials stays within the 2-sigma band of the curve invariant
    double p_fine = 0.5;
    for (int iter = 0; iter < 8; ++iter) {
        p_fine = estimate_p(i_star, n_fine, ctx++);
        if (std::abs(p_fine - 0.5) <= 0.004) break;
        i_star += (0.5 - p_fine) / slope_at(i_star);
        i_star = std::clamp(i_star, interp.x_min(), interp.x_max());
    }

    curve.I_bias = i_star;
    curve.insert_point({i_star, p_fine, n_fine});
}

SigmoidFit fit_sigmoid(SwitchCurve& curve) {
    if (std::isnan(curve.I_bias)) {
        throw std::runtime_error("fit_sigmoid: solve_bias must run first");
    }
    const auto rmse_for = [&](double i_o) {
        double acc = 0.0;
        for (const auto& pt : curve.points) {
            const double model = 1.0 / (1.0 + std::exp(-(pt.i_q - curve.I_bias) / i_o));
            const double err = pt.p - model;
            acc += err * err;
        }
        return std::sqrt(acc / static_cast<double>(curve.points.size()));
    };

    const double span = curve.points.back().i_q - curve.points.front().i_q;
    // bracket by log-spaced scan, then golden-section
    double best_io = span, best_rmse = rmse_for(span);
    for (int k = 0; k < 60; ++k) {
        const double io = span * std::pow(10.0, -4.0 + 4.0 * k / 59.0);
        const double r = rmse_for(io);
        if (r < best_rmse) {
            best_rmse = r;
            best_io = io;
        }
    }
    double lo = best_io / 2.0, hi = best_io * 2.0;
    const double gr = 0.6180339887498949;
    double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
    double fa = rmse_for(a), fb = rmse_for(b);
    for (int iter = 0; iter < 80; ++iter) {
        if (fa < fb) {
            hi = b;
            b = a;
            fb = fa;
            a = hi - gr * (hi - lo);
            fa = rmse_for(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + gr * (hi - lo);
            fb = rmse_for(b);
        }
    }
    SigmoidFit fit;
    fit.i_o = 0.5 * (lo + hi);
    fit.rmse = rmse_for(fit.i_o);
    fit.poor_fit = fit.rmse > 0.08;
    curve.I_o = fit.i_o;
    return fit;
}

void CurveEstimator::solve_reset(SwitchCurve& curve) const {
    const double i_c = rough_critical(+1);
    const double top = opts_.grid_max_factor * i_c;
    std::vector<double> grid(static_cast<std::size_t>(opts_.grid_points));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid[i] = top * static_cast<double>(i) / static_cast<double>(grid.size() - 1);
    }
    const SwitchCurve reverse = estimate_curve(grid, opts_.n_trials, +1);

    const long n_verify = std::max<long>(5000, opts_.n_trials);
    std::uint32_t ctx = 3000000u;
    for (const auto& pt : reverse.points) {
        if (pt.p < opts_.reset_target) continue;
        const double p = estimate_p(-pt.i_q, n_verify, ctx++, +1);
        if (p >= opts_.reset_target) {
            curve.I_reset = pt.i_q;
            return;
        }
    }
    throw std::runtime_error("solve_reset: reset target not reached on grid");
}

SwitchCurve CurveEstimator::characterize() const {
    CharacterizeOptions opts = opts_;
    SwitchCurve curve;
    bool spanned = false;
    for (int attempt = 0; attempt < 3 && !spanned; ++attempt) {
        try {
            CurveEstimator widened(params_, fields_, opts);
            curve = widened.estimate_curve();
            spanned = true;
        } catch (const std::runtime_error&) {
            opts.grid_max_factor *= 1.5;
            if (attempt == 2) throw;
        }
    }
    CurveEstimator self(params_, fields_, opts);
    self.solve_bias(curve);
    fit_sigmoid(curve);
    self.solve_reset(curve);
    curve.validate();
    return curve;
}

}  // namespace mtjsnn
