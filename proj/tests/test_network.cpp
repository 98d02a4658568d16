#include <doctest.h>

#include "errors.hpp"
#include "network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace wta;

namespace oracle {
constexpr double n_ut = 0.0387779996796533;
constexpr double v_c_equal_0p6 = 0.09114099715472076;   // two cells at 0.6 V, I_c = 1 uA
constexpr double v_c_0p6_0p7 = 0.16709782611647574;
constexpr double share_0p7_vs_0p6 = 0.9294834655404048;
constexpr double boost_table_sizes = 0.011431736476238108; // n U_T ln(1 + 120/350)
constexpr double bound_k100_rho075 = 0.22079154305452278;  // n U_T ln(99 * 0.75 / 0.25)
} // namespace oracle

namespace {

NetworkConfig net(std::size_t k)
{
    NetworkConfig cfg;
    cfg.k_cells = k;
    return cfg;
}

std::vector<double> random_inputs(std::mt19937_64& rng, std::size_t k, double lo = 0.0, double hi = 1.2)
{
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(k);
    for (auto& x : v)
        x = u(rng);
    return v;
}

} // namespace

TEST_CASE("common node closed form")
{
    const NetworkConfig cfg = net(2);
    const double equal[] = {0.6, 0.6};
    CHECK(solve_common_node(equal, cfg) == doctest::Approx(oracle::v_c_equal_0p6).epsilon(1e-12));
    const double apart[] = {0.6, 0.7};
    CHECK(solve_common_node(apart, cfg) == doctest::Approx(oracle::v_c_0p6_0p7).epsilon(1e-12));
    CHECK(solve_common_node(apart, cfg, NodeMethod::RootFind)
          == doctest::Approx(oracle::v_c_0p6_0p7).epsilon(1e-12));
}

TEST_CASE("branch currents are a softmax of the inputs")
{
    const NetworkConfig cfg = net(2);
    const double v[] = {0.6, 0.7};
    const auto i = branch_currents(v, cfg);
    CHECK(i[1] / cfg.i_c == doctest::Approx(oracle::share_0p7_vs_0p6).epsilon(1e-12));
    CHECK(i[0] + i[1] == doctest::Approx(cfg.i_c).epsilon(1e-15));
}

TEST_CASE("root-found node matches the closed form for identical devices")
{
    std::mt19937_64 rng(11);
    for (std::size_t k : {2u, 7u, 64u, 500u}) {
        const NetworkConfig cfg = net(k);
        for (int trial = 0; trial < 20; ++trial) {
            const auto v = random_inputs(rng, k);
            const double a = solve_common_node(v, cfg, NodeMethod::ClosedForm);
            const double b = solve_common_node(v, cfg, NodeMethod::RootFind);
            CHECK(std::abs(a - b) < 1e-12);
        }
    }
}

TEST_CASE("shifting every input shifts the node and leaves the currents")
{
    std::mt19937_64 rng(3);
    const NetworkConfig cfg = net(10);
    for (int trial = 0; trial < 50; ++trial) {
        auto v = random_inputs(rng, 10, 0.0, 0.9);
        const double shift = 0.25;
        auto w = v;
        for (auto& x : w)
            x += shift;
        CHECK(solve_common_node(w, cfg) - solve_common_node(v, cfg) == doctest::Approx(shift).epsilon(1e-10));
        const auto a = branch_currents(v, cfg);
        const auto b = branch_currents(w, cfg);
        for (std::size_t i = 0; i < a.size(); ++i)
            CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-10));
    }
}

TEST_CASE("extreme spreads stay finite")
{
    NetworkConfig cfg = net(3);
    cfg.dual_rail = true;
    const double v[] = {-1.2, 0.0, 1.2};
    const auto i = branch_currents(v, cfg);
    for (double x : i)
        CHECK(std::isfinite(x));
    CHECK(i[2] == doctest::Approx(cfg.i_c));
    CHECK(std::isfinite(solve_common_node(v, cfg, NodeMethod::RootFind)));
}

TEST_CASE("heterogeneous devices conserve the bias and follow the device law")
{
    std::mt19937_64 rng(5);
    std::normal_distribution<double> dv(0.0, 0.01);
    NetworkConfig cfg = net(20);
    cfg.cell_devices.assign(20, cfg.device);
    for (auto& d : cfg.cell_devices) {
        const double shift = dv(rng);
        d.v_th += shift;
        d.i_zero *= std::exp(-shift / slope_voltage(d));
        d.w_over_l *= 1.0 + 0.5 * dv(rng);
    }
    const auto v = random_inputs(rng, 20);
    const auto cells = make_cells(v);
    const DcSolution sol = solve_dc(cells, cfg);
    const double total = std::accumulate(sol.op.branch_currents.begin(), sol.op.branch_currents.end(), 0.0);
    CHECK(std::abs(total - cfg.i_c) / cfg.i_c < 1e-12);
    for (std::size_t i = 0; i < v.size(); ++i)
        CHECK(sol.op.branch_currents[i]
              == doctest::Approx(subthreshold_current(cfg.cell_devices[i], v[i] - sol.op.v_common)).epsilon(1e-12));
    CHECK_THROWS_AS(solve_common_node(v, cfg, NodeMethod::ClosedForm), DomainError);
}

TEST_CASE("comparator node voltage")
{
    const DeviceParams p;
    // balance current beta * ov^2 / (2 g) = 4 uA
    CHECK(comparator_voltage_raw(4e-6, p) == doctest::Approx(0.0));
    CHECK(comparator_voltage_raw(5e-6, p) == doctest::Approx(2.5));
    CHECK(comparator_voltage(5e-6, p, 1.2) == 1.2);
    CHECK(comparator_voltage(1e-9, p, 1.2) == 0.0);
    double last = -1;
    for (double i = 3.9e-6; i < 4.05e-6; i += 1e-9) {
        const double v = comparator_voltage(i, p, 1.2);
        CHECK(v >= last);
        CHECK(v >= 0.0);
        CHECK(v <= 1.2);
        last = v;
    }
    DeviceParams off = p;
    off.overdrive = 0;
    CHECK_THROWS_AS(comparator_voltage(1e-6, off, 1.2), DomainError);
}

TEST_CASE("reference band")
{
    const ReferenceBand b = reference_band(1e-6, 1, 1.0);
    CHECK(b.low == doctest::Approx(0.5e-6));
    CHECK(b.high == doctest::Approx(1e-6));
    CHECK(select_reference(1e-6, 1, 1.0) == doctest::Approx(0.75e-6));
    CHECK(select_reference(1e-6, 4, 2.0) == doctest::Approx(0.375e-6));
    for (std::size_t d = 1; d < 20; ++d) {
        const auto band = reference_band(2e-6, d, 1.5);
        const double m = select_reference(2e-6, d, 1.5);
        CHECK(m >= band.low);
        CHECK(m < band.high);
    }
    CHECK_THROWS_AS(select_reference(1e-6, 0, 1.0), DomainError);
    CHECK_THROWS_AS(select_reference(0.0, 1, 1.0), DomainError);
}

TEST_CASE("winner selection")
{
    NetworkConfig cfg = net(4);
    const double v[] = {0.5, 0.8, 0.55, 0.6};
    const DcSolution sol = solve_dc(make_cells(v), cfg);
    CHECK(sol.op.winners == std::vector<std::size_t>{1});
    CHECK(sol.op.outputs[1] == cfg.vdd);
    CHECK(sol.op.outputs[0] == 0.0);
    CHECK(sol.cells[1].won_last);
    CHECK_FALSE(sol.cells[0].won_last);

    const double tie[] = {0.6, 0.6, 0.6, 0.6};
    CHECK(solve_dc(make_cells(tie), cfg).op.winners.empty());
}

TEST_CASE("largest input wins whenever anything wins")
{
    std::mt19937_64 rng(21);
    const NetworkConfig cfg = net(30);
    for (int trial = 0; trial < 200; ++trial) {
        const auto v = random_inputs(rng, 30);
        const DcSolution sol = solve_dc(make_cells(v), cfg);
        CHECK(sol.op.winners.size() <= 1);
        if (!sol.op.winners.empty())
            CHECK(sol.op.winners.front() == static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin()));
    }
}

TEST_CASE("solve_dc preconditions")
{
    const NetworkConfig cfg = net(2);
    const double high[] = {0.6, 1.3};
    CHECK_THROWS_AS(solve_dc(make_cells(high), cfg), DomainError);
    const double low[] = {-0.1, 0.6};
    CHECK_THROWS_AS(solve_dc(make_cells(low), cfg), DomainError);
    NetworkConfig dual = cfg;
    dual.dual_rail = true;
    CHECK_NOTHROW(solve_dc(make_cells(low), dual));
    const double three[] = {0.1, 0.2, 0.3};
    CHECK_THROWS_AS(solve_dc(make_cells(three), cfg), DomainError);
    const double one[] = {0.1};
    CHECK_THROWS_AS(solve_common_node(one, cfg), DomainError);
}

TEST_CASE("network validation names the key")
{
    NetworkConfig cfg;
    cfg.i_c = -1;
    CHECK_THROWS_WITH_AS(validate(cfg), "network.i_c must be > 0", ConfigError);
    cfg = {};
    cfg.k_cells = 1;
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    cfg = {};
    cfg.i_m = {1.5e-6};
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    cfg = {};
    cfg.k_cells = 120;
    cfg.i_m = {0.6e-6, 0.7e-6};
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    cfg.i_m = {0.6e-6, 0.7e-6, 0.8e-6};
    CHECK_NOTHROW(validate(cfg));
    CHECK(reference_currents(cfg) == std::vector<double>{0.6e-6, 0.7e-6, 0.8e-6});
}

TEST_CASE("feedback raises previous winners by n U_T ln(1 + r)")
{
    NetworkConfig cfg = net(2);
    CHECK(feedback_boost(cfg.device, cfg.sizes) == doctest::Approx(oracle::boost_table_sizes).epsilon(1e-12));
    const std::vector<CellState> cells{{0.6, false}, {0.6, true}};
    CHECK(effective_inputs(cells, cfg)[1] == 0.6);
    cfg.feedback_enabled = true;
    const auto v = effective_inputs(cells, cfg);
    CHECK(v[0] == 0.6);
    CHECK(v[1] == doctest::Approx(0.6 + oracle::boost_table_sizes));
}

TEST_CASE("settle_dc reaches a stable winner set")
{
    NetworkConfig cfg = net(2);
    cfg.feedback_enabled = true;
    cfg.i_m = {0.5e-6};
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        const auto v = random_inputs(rng, 2, 0.55, 0.65);
        const DcSolution sol = settle_dc(make_cells(v), cfg);
        const DcSolution again = solve_dc(sol.cells, cfg);
        CHECK(again.op.winners == sol.op.winners);
    }
}

TEST_CASE("k-winner resolution bound")
{
    const DeviceParams p;
    const double two_cell = oracle::n_ut * std::log(0.75 / 0.25);
    CHECK(kwta_resolution_bound(2, 1, 0.75e-6, 1e-6, p) == doctest::Approx(two_cell).epsilon(1e-12));
    CHECK(kwta_resolution_bound(100, 1, 0.75e-6, 1e-6, p)
          == doctest::Approx(oracle::bound_k100_rho075).epsilon(1e-12));
    CHECK(kwta_resolution_bound(2, 1, 0.4e-6, 1e-6, p) == 0.0);
    CHECK_THROWS_AS(kwta_resolution_bound(5, 5, 0.1e-6, 1e-6, p), DomainError);
    CHECK_THROWS_AS(kwta_resolution_bound(5, 2, 0.6e-6, 1e-6, p), DomainError);

    // delta winners at the bound above k - delta equal losers sit exactly on the reference.
    for (std::size_t delta : {1u, 3u, 7u}) {
        const std::size_t k = 40;
        const double i_m = select_reference(1e-6, delta, 1.0);
        const double gap = kwta_resolution_bound(k, delta, i_m, 1e-6, p);
        NetworkConfig cfg = net(k);
        cfg.delta_winners = delta;
        std::vector<double> v(k, 0.3);
        for (std::size_t i = 0; i < delta; ++i)
            v[i] = 0.3 + gap;
        const auto i = branch_currents(v, cfg);
        CHECK(i[0] == doctest::Approx(i_m).epsilon(1e-9));
    }
}
