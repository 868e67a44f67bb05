#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace mtjsnn {

// Weighted isotonic regression (pool-adjacent-violators). Returns the
// non-decreasing fit minimizing the weighted squared error.
std::vector<double> isotonic_fit(const std::vector<double>& y, const std::vector<double>& w);

// Monotone piecewise-cubic interpolant (Fritsch-Carlson slopes). Built
// over strictly increasing x; stays monotone when y is monotone.
class MonotoneCubic {
public:
    static MonotoneCubic fit(const std::vector<double>& x, const std::vector<double>& y);

    double eval(double x) const;        // clamped to endpoint values outside [x0, xn]
    double derivative(double x) const;  // clamped to 0 outside
    // Leftmost x with eval(x) = y, for non-decreasing data. Throws if y is
    // not bracketed by the endpoint values.
    double solve(double y) const;

    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }
    double y_front() const { return y_.front(); }
    double y_back() const { return y_.back(); }

private:
    std::vector<double> x_, y_, slope_;
    std::size_t interval(double x) const;
};

struct CurvePoint {
    double i_q = 0.0;    // [A]
    double p = 0.0;      // switching probability
    long n_trials = 0;
};

// Empirical P_switch(I) characteristic at one (T_w, T_K), with the solved
// operating currents.
struct SwitchCurve {
    double T_w = 0.0;  // [s]
    double T_K = 0.0;  // [K]
    std::vector<CurvePoint> points;
    double I_bias = std::numeric_limits<double>::quiet_NaN();   // [A]
    double I_o = std::numeric_limits<double>::quiet_NaN();      // [A]
    double I_reset = std::numeric_limits<double>::quiet_NaN();  // [A], magnitude
    std::uint64_t seed = 0;

    std::vector<double> currents() const;
    std::vector<double> probabilities() const;
    // PAVA over raw p, weighted by trial counts.
    std::vector<double> isotonic_probabilities() const;
    // Interpolant over the isotonic probabilities.
    MonotoneCubic interpolant() const;

    // Sorted strictly increasing, p in [0,1], raw p within 3 binomial
    // sigma of the isotonic fit, bias within its tolerance when solved.
    void validate() const;

    void insert_point(CurvePoint pt);  // keeps ordering; replaces near-duplicates
};

void save_curve(const SwitchCurve& curve, std::ostream& out);
void save_curve(const SwitchCurve& curve, const std::string& path);
SwitchCurve load_curve(std::istream& in);
SwitchCurve load_curve(const std::string& path);

// Probability lookup used by the spiking runtime: either the interpolated
// characteristic (what the device gives) or the fitted sigmoid idealization.
class SwitchProbability {
public:
    enum class Mode { raw_curve, sigmoid };

    SwitchProbability() = default;
    SwitchProbability(const SwitchCurve& curve, Mode mode);
    // Analytic sigmoid without a characterized curve (calibration checks).
    static SwitchProbability exact_sigmoid(double i_bias, double i_o);

    double eval(double i) const;
    // True when i falls outside the characterized span (raw mode only).
    bool clamped(double i) const;
    Mode mode() const { return mode_; }

private:
    Mode mode_ = Mode::raw_curve;
    MonotoneCubic interp_;
    double i_lo_ = 0.0, i_hi_ = 0.0;
    double i_bias_ = 0.0, i_o_ = 1.0;
    bool have_interp_ = false;
};

}  // namespace mtjsnn
