#include "mtjsnn/switch_curve.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mtjsnn/text_io.hpp"

namespace mtjsnn {

std::vector<double> isotonic_fit(const std::vector<double>& y, const std::vector<double>& w) {
    if (y.size() != w.size()) throw std::invalid_argument("isotonic_fit: size mismatch");
    struct Pool {
        double value, weight;
        std::size_t count;
    };
    std::vector<Pool> pools;
    pools.reserve(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        pools.push_back({y[i], w[i], 1});
        while (pools.size() >= 2 && pools[pools.size() - 2].value >= pools.back().value) {
            const Pool b = pools.back();
            pools.pop_back();
            Pool& a = pools.back();
            const double total = a.weight + b.weight;
            a.value = (a.value * a.weight + b.value * b.weight) / total;
            a.weight = total;
            a.count += b.count;
        }
    }
    std::vector<double> out;
    out.reserve(y.size());
    for (const Pool& p : pools) {
        out.insert(out.end(), p.count, p.value);
    }
    return out;
}

MonotoneCubic MonotoneCubic::fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("MonotoneCubic: need >= 2 points");
    }
    for (std::size_t i = 1; i < x.size(); ++i) {
        if (!(x[i] > x[i - 1])) {
            throw std::invalid_argument("MonotoneCubic: x must be strictly increasing");
        }
    }
    const std::size_t n = x.size();
    std::vector<double> h(n - 1), d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x[i + 1] - x[i];
        d[i] = (y[i + 1] - y[i]) / h[i];
    }

    MonotoneCubic mc;
    mc.x_ = x;
    mc.y_ = y;
    mc.slope_.assign(n, 0.0);

    if (n == 2) {
        mc.slope_[0] = mc.slope_[1] = d[0];
        return mc;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (d[i - 1] * d[i] <= 0.0) {
            mc.slope_[i] = 0.0;
        } else {
            const double w1 = 2.0 * h[i] + h[i - 1];
            const double w2 = h[i] + 2.0 * h[i - 1];
            mc.slope_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
    auto end_slope = [](double h0, double h1, double d0, double d1) {
        double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (m * d0 <= 0.0) return 0.0;
        if (d0 * d1 < 0.0 && std::abs(m) > 3.0 * std::abs(d0)) return 3.0 * d0;
        return m;
    };
    mc.slope_[0] = end_slope(h[0], h[1], d[0], d[1]);
    mc.slope_[n - 1] = end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
    return mc;
}

std::size_t MonotoneCubic::interval(double x) const {
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    if (it == x_.begin()) return 0;
    const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
    return std::min(i, x_.size() - 2);
}

double MonotoneCubic::eval(double x) const {
    if (x <= x_.front()) return y_.front();
    if (x >= x_.back()) return y_.back();
    const std::size_t i = interval(x);
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    const double h10 = t3 - 2.0 * t2 + t;
    const double h01 = -2.0 * t3 + 3.0 * t2;
    const double h11 = t3 - t2;
    return h00 * y_[i] + h10 * h * slope_[i] + h01 * y_[i + 1] + h11 * h * slope_[i + 1];
}

double MonotoneCubic::derivative(double x) const {
    if (x < x_.front() || x > x_.back()) return 0.0;
    const std::size_t i = interval(x);
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t;
    const double dh00 = (6.0 * t2 - 6.0 * t) / h;
    const double dh10 = 3.0 * t2 - 4.0 * t + 1.0;
    const double dh01 = (-6.0 * t2 + 6.0 * t) / h;
    const double dh11 = 3.0 * t2 - 2.0 * t;
    return dh00 * y_[i] + dh10 * slope_[i] + dh01 * y_[i + 1] + dh11 * slope_[i + 1];
}

double MonotoneCubic::solve(double y) const {
    if (y < std::min(y_.front(), y_.back()) || y > std::max(y_.front(), y_.back())) {
        throw std::runtime_error("MonotoneCubic::solve: target not bracketed");
    }
    // leftmost interval whose endpoint values bracket y
    std::size_t i = 0;
    while (i + 2 < x_.size() && !(std::min(y_[i], y_[i + 1]) <= y && y <= std::max(y_[i], y_[i + 1]))) {
        ++i;
    }
    double lo = x_[i], hi = x_[i + 1];
    const bool rising = y_[i + 1] >= y_[i];
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double v = eval(mid);
        if ((v < y) == rising) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

std::vector<double> SwitchCurve::currents() const {
    std::vector<double> v;
    v.reserve(points.size());
    for (const auto& pt : points) v.push_back(pt.i_q);
    return v;
}

std::vector<double> SwitchCurve::probabilities() const {
    std::vector<double> v;
    v.reserve(points.size());
    for (const auto& pt : points) v.push_back(pt.p);
    return v;
}

std::vector<double> SwitchCurve::isotonic_probabilities() const {
    std::vector<double> w;
    w.reserve(points.size());
    for (const auto& pt : points) w.push_back(static_cast<double>(pt.n_trials));
    return isotonic_fit(probabilities(), w);
}

MonotoneCubic SwitchCurve::interpolant() const {
    // Flat PAVA blocks make consecutive y equal; that is fine for the
    // Hermite form, but x must be strictly increasing (guaranteed by
    // validate/insert_point).
    return MonotoneCubic::fit(currents(), isotonic_probabilities());
}

void SwitchCurve::validate() const {
    if (points.size() < 2) throw std::runtime_error("SwitchCurve: need at least 2 points");
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& pt = points[i];
        if (!(pt.p >= 0.0 && pt.p <= 1.0)) {
            throw std::runtime_error("SwitchCurve: probability out of [0,1] at point " +
                                     std::to_string(i));
        }
        if (pt.n_trials <= 0) {
            throw std::runtime_error("SwitchCurve: non-positive trial count at point " +
                                     std::to_string(i));
        }
        if (i > 0 && !(pt.i_q > points[i - 1].i_q)) {
            throw std::runtime_error("SwitchCurve: currents not strictly increasing at point " +
                                     std::to_string(i));
        }
    }
    const auto iso = isotonic_probabilities();
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double n = static_cast<double>(points[i].n_trials);
        const double var = std::max(iso[i] * (1.0 - iso[i]), 0.0);
        const double sigma = std::sqrt(var / n) + 1.0 / n;  // floor keeps p=0/1 points testable
        if (std::abs(points[i].p - iso[i]) >= 3.0 * sigma) {
            throw std::runtime_error("SwitchCurve: point " + std::to_string(i) +
                                     " deviates from isotonic fit by more than 3 sigma");
        }
    }
}

void SwitchCurve::insert_point(CurvePoint pt) {
    const double span = points.empty() ? 1.0 : std::abs(points.back().i_q - points.front().i_q);
    const double tol = 1e-9 * std::max(span, std::abs(pt.i_q));
    auto it = std::lower_bound(points.begin(), points.end(), pt,
                               [](const CurvePoint& a, const CurvePoint& b) { return a.i_q < b.i_q; });
    if (it != points.end() && std::abs(it->i_q - pt.i_q) <= tol) {
        *it = pt;
        return;
    }
    if (it != points.begin() && std::abs((it - 1)->i_q - pt.i_q) <= tol) {
        *(it - 1) = pt;
        return;
    }
    points.insert(it, pt);
}

namespace {
std::string header_value(double v) {
    return std::isnan(v) ? std::string("nan") : format_shortest(v);
}
}  // namespace

void save_curve(const SwitchCurve& curve, std::ostream& out) {
    out << "# t_w_ns=" << format_shortest(curve.T_w * 1e9) << "\n";
    out << "# temp_k=" << format_shortest(curve.T_K) << "\n";
    long n_header = 0;
    for (const auto& pt : curve.points) n_header = std::max(n_header, pt.n_trials);
    out << "# n_trials=" << n_header << "\n";
    out << "# seed=" << curve.seed << "\n";
    out << "# i_bias_uA=" << header_value(curve.I_bias * 1e6) << "\n";
    out << "# i_o_uA=" << header_value(curve.I_o * 1e6) << "\n";
    out << "# i_reset_uA=" << header_value(curve.I_reset * 1e6) << "\n";
    out << "i_q_uA,p_switch,n_trials\n";
    for (const auto& pt : curve.points) {
        out << format_shortest(pt.i_q * 1e6) << ',' << format_shortest(pt.p) << ',' << pt.n_trials
            << "\n";
    }
}

void save_curve(const SwitchCurve& curve, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_curve: cannot open " + path);
    save_curve(curve, out);
    if (!out.good()) throw std::runtime_error("save_curve: write failed for " + path);
}

namespace {

double parse_header_double(const std::string& value, const std::string& context) {
    if (trim(value) == "nan") return std::numeric_limits<double>::quiet_NaN();
    return parse_double(value, context);
}

}  // namespace

SwitchCurve load_curve(std::istream& in) {
    SwitchCurve curve;
    std::string line;
    int line_no = 0;
    bool saw_columns = false;
    bool have_tw = false, have_temp = false;

    auto fail = [&](const std::string& what) {
        throw std::runtime_error("load_curve: line " + std::to_string(line_no) + ": " + what);
    };

    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = trim(line);
        if (sv.empty()) continue;
        if (sv.front() == '#') {
            sv.remove_prefix(1);
            sv = trim(sv);
            const auto eq = sv.find('=');
            if (eq == std::string_view::npos) fail("malformed header (expected key=value)");
            const std::string key(trim(sv.substr(0, eq)));
            const std::string value(trim(sv.substr(eq + 1)));
            const std::string ctx = "load_curve header " + key;
            if (key == "t_w_ns") {
                curve.T_w = parse_double(value, ctx) * 1e-9;
                have_tw = true;
            } else if (key == "temp_k") {
                curve.T_K = parse_double(value, ctx);
                have_temp = true;
            } else if (key == "n_trials") {
                (void)parse_int(value, ctx);  // informational; per-point counts are authoritative
            } else if (key == "seed") {
                curve.seed = static_cast<std::uint64_t>(parse_int(value, ctx));
            } else if (key == "i_bias_uA") {
                curve.I_bias = parse_header_double(value, ctx) * 1e-6;
            } else if (key == "i_o_uA") {
                curve.I_o = parse_header_double(value, ctx) * 1e-6;
            } else if (key == "i_reset_uA") {
                curve.I_reset = parse_header_double(value, ctx) * 1e-6;
            } else {
                fail("unknown header key '" + key + "'");
            }
            continue;
        }
        if (!saw_columns) {
            if (sv != "i_q_uA,p_switch,n_trials") fail("expected column header i_q_uA,p_switch,n_trials");
            saw_columns = true;
            continue;
        }
        const auto c1 = sv.find(',');
        const auto c2 = c1 == std::string_view::npos ? c1 : sv.find(',', c1 + 1);
        if (c1 == std::string_view::npos || c2 == std::string_view::npos) {
            fail("expected 3 comma-separated fields");
        }
        CurvePoint pt;
        pt.i_q = parse_double(sv.substr(0, c1), "load_curve i_q") * 1e-6;
        pt.p = parse_double(sv.substr(c1 + 1, c2 - c1 - 1), "load_curve p");
        pt.n_trials = parse_int(sv.substr(c2 + 1), "load_curve n_trials");
        curve.points.push_back(pt);
    }

    if (!have_tw || !have_temp || !saw_columns || curve.points.empty()) {
        ++line_no;
        fail("truncated file (missing headers or points)");
    }
    try {
        curve.validate();
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("load_curve: ") + e.what());
    }
    return curve;
}

SwitchCurve load_curve(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_curve: cannot open " + path);
    return load_curve(in);
}

SwitchProbability::SwitchProbability(const SwitchCurve& curve, Mode mode) : mode_(mode) {
    if (mode_ == Mode::sigmoid) {
        if (std::isnan(curve.I_bias) || std::isnan(curve.I_o)) {
            throw std::runtime_error("SwitchProbability: sigmoid mode needs solved I_bias and I_o");
        }
        i_bias_ = curve.I_bias;
        i_o_ = curve.I_o;
        return;
    }
    interp_ = curve.interpolant();
    have_interp_ = true;
    i_lo_ = interp_.x_min();
    i_hi_ = interp_.x_max();
}

SwitchProbability SwitchProbability::exact_sigmoid(double i_bias, double i_o) {
    SwitchProbability p;
    p.mode_ = Mode::sigmoid;
    p.i_bias_ = i_bias;
    p.i_o_ = i_o;
    return p;
}

double SwitchProbability::eval(double i) const {
    if (mode_ == Mode::sigmoid) {
        return 1.0 / (1.0 + std::exp(-(i - i_bias_) / i_o_));
    }
    return interp_.eval(i);  // endpoint-clamped outside the span
}

bool SwitchProbability::clamped(double i) const {
    if (mode_ == Mode::sigmoid) return false;
    return i < i_lo_ || i > i_hi_;
}

}  // namespace mtjsnn
