#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "mtjsnn/characterize.hpp"
#include "mtjsnn/switch_curve.hpp"

using namespace mtjsnn;

namespace {

SwitchCurve synthetic_sigmoid(double a, double b, int n = 41, double top = 175e-6,
                              long trials = 1000000) {
    SwitchCurve c;
    c.T_w = 0.5e-9;
    c.T_K = 300.0;
    c.seed = 1;
    for (int i = 0; i < n; ++i) {
        const double x = top * i / (n - 1);
        c.points.push_back({x, 1.0 / (1.0 + std::exp(-(x - a) / b)), trials});
    }
    return c;
}

CharacterizeOptions fast_options() {
    // coarse but valid physics for structure tests
    CharacterizeOptions opts;
    opts.t_w = 0.2e-9;
    opts.dt = 0.2e-12;
    opts.relax_time = 0.5e-9;
    opts.grid_points = 15;
    opts.n_trials = 300;
    opts.seed = 5;
    opts.threads = 0;
    return opts;
}

}  // namespace

TEST_CASE("isotonic regression pools violators") {
    const std::vector<double> y{1.0, 2.0, 1.5};
    const std::vector<double> w{1.0, 1.0, 1.0};
    const auto iso = isotonic_fit(y, w);
    CHECK(iso[0] == doctest::Approx(1.0));
    CHECK(iso[1] == doctest::Approx(1.75));
    CHECK(iso[2] == doctest::Approx(1.75));

    // already monotone input is unchanged
    const std::vector<double> mono{0.0, 0.1, 0.4, 0.9};
    const auto same = isotonic_fit(mono, {2, 1, 5, 1});
    for (std::size_t i = 0; i < mono.size(); ++i) CHECK(same[i] == doctest::Approx(mono[i]));

    // weighted pooling
    const auto pooled = isotonic_fit({1.0, 0.0}, {1.0, 3.0});
    CHECK(pooled[0] == doctest::Approx(0.25));
    CHECK(pooled[1] == doctest::Approx(0.25));
}

TEST_CASE("monotone cubic interpolation stays monotone and solves roots") {
    std::vector<double> x, y;
    for (int i = 0; i <= 20; ++i) {
        x.push_back(i * 5.0);
        y.push_back(1.0 / (1.0 + std::exp(-(x.back() - 50.0) / 8.0)));
    }
    const auto mc = MonotoneCubic::fit(x, y);

    CHECK(mc.eval(x.front()) == doctest::Approx(y.front()));
    CHECK(mc.eval(x.back()) == doctest::Approx(y.back()));
    CHECK(mc.eval(-10.0) == y.front());  // clamped
    CHECK(mc.eval(500.0) == y.back());

    double prev = -1.0;
    for (double t = 0.0; t <= 100.0; t += 0.25) {
        const double v = mc.eval(t);
        CHECK(v >= prev - 1e-12);
        prev = v;
    }
    CHECK(mc.solve(0.5) == doctest::Approx(50.0).epsilon(1e-3));
    CHECK_THROWS(mc.solve(2.0));
}

TEST_CASE("synthetic sigmoid: bias root and fitted scale recover the truth") {
    const double a = 70e-6, b = 10e-6;
    SwitchCurve c = synthetic_sigmoid(a, b);
    CHECK(std::abs(solve_bias_root(c) - a) < b / 100.0);

    c.I_bias = a;
    const SigmoidFit fit = fit_sigmoid(c);
    CHECK(fit.i_o == doctest::Approx(b).epsilon(0.01));
    CHECK(fit.rmse < 1e-3);
    CHECK_FALSE(fit.poor_fit);
    CHECK(c.I_o == fit.i_o);
}

TEST_CASE("curve validation catches violations") {
    SwitchCurve c = synthetic_sigmoid(70e-6, 10e-6, 21);
    CHECK_NOTHROW(c.validate());

    SwitchCurve unsorted = c;
    std::swap(unsorted.points[3], unsorted.points[4]);
    CHECK_THROWS_WITH_AS(unsorted.validate(),
                         doctest::Contains("not strictly increasing"), std::runtime_error);

    SwitchCurve bad_p = c;
    bad_p.points[5].p = 1.5;
    CHECK_THROWS_AS(bad_p.validate(), std::runtime_error);

    SwitchCurve dip = c;
    dip.points[12].p = 0.05;  // large non-monotone dip
    CHECK_THROWS_WITH_AS(dip.validate(), doctest::Contains("3 sigma"), std::runtime_error);
}

TEST_CASE("curve save/load round trip") {
    SwitchCurve c = synthetic_sigmoid(70e-6, 10e-6, 11);
    c.I_bias = 70e-6;
    c.I_o = 10e-6;
    c.I_reset = 150e-6;
    c.seed = 99;

    std::ostringstream out;
    save_curve(c, out);
    const std::string first = out.str();
    CHECK(first.find("# t_w_ns=0.5\n") != std::string::npos);
    CHECK(first.find("# i_bias_uA=70\n") != std::string::npos);
    CHECK(first.find("i_q_uA,p_switch,n_trials\n") != std::string::npos);

    std::istringstream in(first);
    const SwitchCurve back = load_curve(in);
    CHECK(back.points.size() == c.points.size());
    CHECK(back.T_w == doctest::Approx(c.T_w).epsilon(1e-12));
    CHECK(back.T_K == c.T_K);
    CHECK(back.seed == 99);
    CHECK(back.I_bias == doctest::Approx(c.I_bias).epsilon(1e-12));
    CHECK(back.I_reset == doctest::Approx(c.I_reset).epsilon(1e-12));
    for (std::size_t i = 0; i < c.points.size(); ++i) {
        CHECK(back.points[i].i_q == doctest::Approx(c.points[i].i_q).epsilon(1e-12));
        CHECK(back.points[i].p == doctest::Approx(c.points[i].p).epsilon(1e-12));
        CHECK(back.points[i].n_trials == c.points[i].n_trials);
    }

    // repeated round trips stay pinned at the first generation's values
    // (the uA<->A unit conversion may wobble by one ulp, never more)
    std::ostringstream out2;
    save_curve(back, out2);
    std::istringstream in2(out2.str());
    const SwitchCurve back2 = load_curve(in2);
    for (std::size_t i = 0; i < back.points.size(); ++i) {
        CHECK(back2.points[i].i_q == doctest::Approx(back.points[i].i_q).epsilon(1e-14));
        CHECK(back2.points[i].p == back.points[i].p);
        CHECK(back2.points[i].n_trials == back.points[i].n_trials);
    }
    CHECK(back2.I_bias == doctest::Approx(back.I_bias).epsilon(1e-14));
}

TEST_CASE("curve loader errors carry line numbers") {
    SwitchCurve c = synthetic_sigmoid(70e-6, 10e-6, 11);
    std::ostringstream out;
    save_curve(c, out);
    const std::string text = out.str();

    // truncate in the middle of a data row
    std::istringstream cut(text.substr(0, text.size() - 30) + "12.5,0.");
    try {
        load_curve(cut);
        FAIL("expected parse error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("line") != std::string::npos);
    }

    // header-only file is truncated
    std::istringstream headers(text.substr(0, text.find("i_q_uA")));
    CHECK_THROWS_WITH_AS(load_curve(headers), doctest::Contains("truncated"), std::runtime_error);

    // unsorted rows violate the invariant at load time
    std::istringstream unsorted(text + "1,0.5,100\n");
    CHECK_THROWS_WITH_AS(load_curve(unsorted), doctest::Contains("increasing"),
                         std::runtime_error);

    std::istringstream junk("# t_w_ns=0.5\nnot a header\n");
    CHECK_THROWS_AS(load_curve(junk), std::runtime_error);
}

TEST_CASE("insert_point keeps ordering and replaces near-duplicates") {
    SwitchCurve c = synthetic_sigmoid(70e-6, 10e-6, 5);
    const std::size_t n = c.points.size();
    c.insert_point({71e-6, 0.5, 4000});
    CHECK(c.points.size() == n + 1);
    for (std::size_t i = 1; i < c.points.size(); ++i) {
        CHECK(c.points[i].i_q > c.points[i - 1].i_q);
    }
    c.insert_point({71e-6, 0.51, 8000});  // same current: replace
    CHECK(c.points.size() == n + 1);
}

TEST_CASE("estimated curves are deterministic, isotonic within noise, and span saturation" *
          doctest::timeout(900)) {
    DeviceParams params;
    const FieldModel fields = FieldModel::calibrate(params);
    const CharacterizeOptions opts = fast_options();
    const CurveEstimator est(params, fields, opts);

    const double i_c = est.rough_critical();
    CHECK(i_c > 1e-6);
    CHECK(i_c < 1e-3);

    std::vector<double> grid;
    for (int i = 0; i < opts.grid_points; ++i) {
        grid.push_back(2.5 * i_c * i / (opts.grid_points - 1));
    }
    const SwitchCurve a = est.estimate_curve(grid, opts.n_trials);
    CHECK_NOTHROW(a.validate());  // includes the 3-sigma isotonicity bound
    CHECK(a.points.front().p < 0.05);
    CHECK(a.points.back().p >= 0.99);

    // determinism across runs (threaded)
    const SwitchCurve b = est.estimate_curve(grid, opts.n_trials);
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        CHECK(a.points[i].p == b.points[i].p);
    }

    // a grid that stops far below saturation is rejected
    std::vector<double> low{0.0, 0.1 * i_c, 0.2 * i_c, 0.3 * i_c, 0.4 * i_c};
    CHECK_THROWS_WITH_AS(est.estimate_curve(low, 200), doctest::Contains("under-spanned"),
                         std::runtime_error);
}

TEST_CASE("switch probability lookups: raw curve vs sigmoid" ) {
    SwitchCurve c = synthetic_sigmoid(70e-6, 10e-6);
    c.I_bias = 70e-6;
    c.I_o = 10e-6;

    const SwitchProbability raw(c, SwitchProbability::Mode::raw_curve);
    const SwitchProbability sig(c, SwitchProbability::Mode::sigmoid);

    for (double i : {10e-6, 40e-6, 70e-6, 120e-6}) {
        CHECK(raw.eval(i) == doctest::Approx(sig.eval(i)).epsilon(0.01));
        CHECK_FALSE(raw.clamped(i));
    }
    CHECK(raw.clamped(-5e-6));
    CHECK(raw.clamped(200e-6));
    CHECK(raw.eval(-5e-6) == c.points.front().p);   // clamped to endpoints
    CHECK(raw.eval(400e-6) == c.points.back().p);
    CHECK_FALSE(sig.clamped(400e-6));

    const SwitchProbability exact = SwitchProbability::exact_sigmoid(70e-6, 10e-6);
    CHECK(exact.eval(70e-6) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(exact.eval(80e-6) == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-12));
}
