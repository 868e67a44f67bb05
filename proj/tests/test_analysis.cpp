#include <cmath>
#include <sstream>

#include "doctest.h"
#include "mtjsnn/analysis.hpp"

using namespace mtjsnn;

namespace {
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace

TEST_CASE("chord value identities") {
    for (double i : {0.0, 0.3, 0.7, 1.0}) CHECK(chord_value(0.0, i) == 0.5);
    for (double w : {-3.0, -1.0, 0.5, 2.0, 3.0}) {
        CHECK(chord_value(w, 0.0) == 0.5);
        // endpoint identity: chord at I=1 equals sigmoid(w) exactly
        CHECK(std::abs(chord_value(w, 1.0) - sigmoid(w)) < 1e-12);
    }
    // linear in I between the endpoints
    CHECK(chord_value(2.0, 0.5) ==
          doctest::Approx(0.5 * (chord_value(2.0, 0.0) + chord_value(2.0, 1.0))).epsilon(1e-12));
}

TEST_CASE("conversion error: small at w=1, bounded peak at w=3, zero edges") {
    CHECK(max_chord_error(1.0) < 0.02);

    const double peak = max_chord_error(3.0);
    CHECK(peak == doctest::Approx(0.09123).epsilon(0.02));
    CHECK(std::abs(peak - 0.091) < 0.002);

    const ErrorGrid grid = approx_error_grid(-3.0, 3.0, 25, 201);
    CHECK(grid.max_error == doctest::Approx(peak).epsilon(0.01));
    CHECK(std::abs(grid.max_i - 0.49) < 0.02);  // peak sits near I = 0.49
    // zero error along I=0 and I=1 for every w
    for (std::size_t a = 0; a < grid.w_values.size(); ++a) {
        CHECK(grid.error[a * grid.i_values.size()] < 1e-12);
        CHECK(grid.error[a * grid.i_values.size() + grid.i_values.size() - 1] < 1e-12);
    }
}

TEST_CASE("error field is symmetric in the weight sign") {
    const ErrorGrid pos = approx_error_grid(0.5, 3.0, 6, 101);
    const ErrorGrid neg = approx_error_grid(-0.5, -3.0, 6, 101);
    for (std::size_t a = 0; a < pos.w_values.size(); ++a) {
        for (std::size_t b = 0; b < pos.i_values.size(); ++b) {
            CHECK(pos.error[a * 101 + b] ==
                  doctest::Approx(neg.error[a * 101 + b]).epsilon(1e-12));
        }
    }
}

TEST_CASE("error grid CSV format") {
    const ErrorGrid grid = approx_error_grid(1.0, 3.0, 2, 3);
    std::ostringstream out;
    write_error_grid_csv(grid, out);
    const std::string text = out.str();
    CHECK(text.rfind("w,i,error\n1,0,0\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 7);
}

TEST_CASE("neuron write energy hand value") {
    // (71 uA)^2 * 400 Ohm * 0.5 ns = 1.008 fJ
    EnergyParams ep;
    ep.i_reset = 150e-6;
    EnergyAccumulator acc(ep);

    LayerInstance layer;
    layer.kind = LayerKind::dense;
    layer.in_count = 1;
    layer.out_count = 1;
    Column col;
    col.g_plus = {0.0};
    col.g_minus = {0.0};
    col.i_bias_col = 71e-6;
    col.rebuild(2.5e-3);
    layer.columns.push_back(col);

    const std::vector<double> inputs{0.0};
    const std::vector<double> currents{71e-6};
    const std::vector<std::uint8_t> spikes{0};
    acc.on_layer({3, &layer, &inputs, &currents, &spikes});
    acc.end_step();
    const EnergyBreakdown e = acc.per_image();
    CHECK(e.e_neuron_write == doctest::Approx(1.0082e-15).epsilon(1e-3));
    CHECK(e.e_crossbar_write == 0.0);
    CHECK(e.e_reset == 0.0);  // no spike, no reset
    CHECK(e.e_read == doctest::Approx(1.0 / (20e3 + 20e3) * 0.5e-9));  // AP read path
    CHECK(e.total() ==
          doctest::Approx(e.e_crossbar_write + e.e_neuron_write + e.e_read + e.e_reset));
}

TEST_CASE("energy components follow the trace") {
    EnergyParams ep;
    ep.i_reset = 150e-6;
    ep.v_o = 1.0;
    EnergyAccumulator acc(ep);

    LayerInstance layer;
    layer.kind = LayerKind::dense;
    layer.in_count = 2;
    layer.out_count = 1;
    Column col;
    col.g_plus = {10e-6, 2e-6};
    col.g_minus = {3e-6, 1e-6};
    col.i_bias_col = 50e-6;
    col.rebuild(2.5e-3);
    layer.columns.push_back(col);

    const std::vector<double> inputs{1.0, 0.5};
    const std::vector<double> currents{40e-6};
    const std::vector<std::uint8_t> spikes{1};
    acc.on_layer({3, &layer, &inputs, &currents, &spikes});
    acc.end_step();
    const EnergyBreakdown e = acc.per_image();

    const double cross_expect =
        (1.0 * (10e-6 + 3e-6) + 0.25 * (2e-6 + 1e-6)) * 1.0 * 0.5e-9;
    CHECK(e.e_crossbar_write == doctest::Approx(cross_expect).epsilon(1e-12));
    CHECK(e.e_reset == doctest::Approx(150e-6 * 150e-6 * 400.0 * 0.5e-9).epsilon(1e-12));
    CHECK(e.e_read == doctest::Approx(1.0 / (10e3 + 20e3) * 0.5e-9).epsilon(1e-12));  // P state

    // zero recorded steps -> missing trace
    EnergyAccumulator empty(ep);
    CHECK_THROWS_WITH_AS(empty.per_image(), doctest::Contains("no trace"), std::runtime_error);
}

TEST_CASE("CMOS baseline constant is carried verbatim in the report") {
    CHECK(kCmosBaselineEnergyJ == 391e-9);
    EnergyBreakdown e;
    e.e_crossbar_write = 1e-9;
    e.timesteps = 50;
    std::ostringstream out;
    write_energy_csv(e, out);
    const std::string text = out.str();
    CHECK(text.find("component,joules\n") != std::string::npos);
    CHECK(text.find("cmos_baseline_total,3.91e-07\n") != std::string::npos);
    CHECK(text.find("# timesteps=50\n") == 0);
    CHECK(text.find("total_per_image,1e-09\n") != std::string::npos);
}

TEST_CASE("variation sweep: determinism, zero-sigma case, aggregation") {
    NetworkModel m = NetworkModel::architecture();
    init_weights(m, 8);
    const NetworkModel q = clip_and_quantize(m);

    SwitchCurve c;
    c.T_w = 0.5e-9;
    c.T_K = 300.0;
    for (int i = 0; i <= 30; ++i) {
        const double x = 200e-6 * i / 30.0;
        c.points.push_back({x, 1.0 / (1.0 + std::exp(-(x - 70e-6) / 10e-6)), 2000});
    }
    c.I_bias = 70e-6;
    c.I_o = 10e-6;

    const CrossbarParams params = CrossbarParams::from_curve(c, 1.0, 400.0);
    const HardwareInstance nominal = map_weights(q, params, c.I_bias);
    const SwitchProbability prob(c, SwitchProbability::Mode::raw_curve);

    Dataset ds;
    ds.count = 3;
    ds.pixels.assign(3 * 784, 0.4f);
    ds.labels = {1, 2, 3};

    RunConfig cfg;
    cfg.mode = RunMode::hardware;
    cfg.T_w = 0.5e-9;
    cfg.T_N = 4;
    cfg.master_seed = 77;

    const VariationReport a = variation_sweep(nominal, prob, cfg, 0.2, 0.1, 3, ds, 3);
    const VariationReport b = variation_sweep(nominal, prob, cfg, 0.2, 0.1, 3, ds, 3);
    CHECK(a.accuracies == b.accuracies);
    CHECK(a.mean_accuracy == b.mean_accuracy);
    CHECK(a.n_instances == 3);
    CHECK(a.t_w == cfg.T_w);
    CHECK_NOTHROW(a.validate());

    const VariationReport zero = variation_sweep(nominal, prob, cfg, 0.0, 0.0, 3, ds, 3);
    CHECK(zero.accuracies[0] == zero.accuracies[1]);
    CHECK(zero.accuracies[1] == zero.accuracies[2]);
    CHECK(zero.std_accuracy == 0.0);

    std::ostringstream csv;
    write_variation_csv(a, csv);
    const std::string text = csv.str();
    CHECK(text.rfind("sigma_g,sigma_bias,t_w_ns,instance,accuracy\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 4);
    CHECK(text.find("0.2,0.1,0.5,0,") != std::string::npos);
}
