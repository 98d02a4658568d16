#include <doctest.h>

#include "csv.hpp"
#include "errors.hpp"
#include "variation.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

using namespace wta;

namespace oracle {
constexpr double n_ut_300 = 0.0387779996796533;
constexpr double ut_373_15 = 0.03215557906769473;
// P(gap' <= resolution) for gap' ~ N(10 mV, 2 * (20 mV)^2), resolution at I_m = 0.5257 I_c.
constexpr double mc_flip_probability = 0.4158626561883541;

// Two-pass mean and sample standard deviation.
std::pair<double, double> mean_std(const std::vector<double>& v)
{
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v)
        ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}
} // namespace oracle

namespace {

std::filesystem::path temp_dir(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("wta_test_var_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

} // namespace

TEST_CASE("static and dynamic power")
{
    NetworkConfig cfg;
    const double v[] = {0.6, 0.7};
    const DcSolution sol = solve_dc(make_cells(v), cfg);
    const PowerBreakdown p = estimate_power(sol.op, cfg, {1e6, 1e-12, 2});
    // 1.2 V * (2 * 1 uA + 0.75 uA)
    CHECK(p.static_w == doctest::Approx(3.3e-6).epsilon(1e-12));
    // 2 outputs * 1 pF * 1.44 V^2 * 1 MHz
    CHECK(p.dynamic_w == doctest::Approx(2.88e-6).epsilon(1e-12));
    CHECK(p.total_w == doctest::Approx(p.static_w + p.dynamic_w));
    CHECK(p.losing_w == doctest::Approx(1.2 * 2 * sol.op.branch_currents[0]));
}

TEST_CASE("static power grows only by the added cluster references")
{
    NetworkConfig small;
    small.k_cells = 50;
    NetworkConfig large = small;
    large.k_cells = 1000;
    std::vector<double> a(50, 0.5), b(1000, 0.5);
    a[0] = b[0] = 1.0;
    const double pa = estimate_power(solve_dc(make_cells(a), small).op, small, {}).static_w;
    const double pb = estimate_power(solve_dc(make_cells(b), large).op, large, {}).static_w;
    const double per_cluster = 1.2 * select_reference(1e-6, 1, 1.0);
    CHECK(pb - pa == doctest::Approx(19 * per_cluster).epsilon(1e-12));
}

TEST_CASE("losing share falls with the winner margin")
{
    NetworkConfig cfg;
    double last = 1.0;
    for (double m : {1.0, 2.0, 3.0, 5.0, 8.0}) {
        const double v[] = {0.6, 0.6 + m * oracle::n_ut_300};
        const DcSolution sol = solve_dc(make_cells(v), cfg);
        const double share = estimate_power(sol.op, cfg, {}).losing_share;
        CHECK(share < last);
        last = share;
    }
    CHECK(last < 0.01);
}

TEST_CASE("corner enumeration")
{
    const auto corners = enumerate_corners(CornerSet{});
    CHECK(corners.size() == 45);
    CHECK(corners.front().label() == "FF/1.32V/100C");
    CHECK(corners.back().label() == "TT/1.02V/0C");
    CHECK(parse_process("SF") == Process::SF);
    CHECK_THROWS_AS(parse_process("XX"), ConfigError);
    CHECK_THROWS_AS(enumerate_corners(CornerSet{{}, {1.2}, {27}}), ConfigError);
}

TEST_CASE("typical corner at the reference point is the nominal card")
{
    const NetworkConfig cfg;
    const TransientConfig t;
    const CornerConditions c = apply_corner(cfg, t, CornerSpec{Process::TT, 1.2, 27});
    CHECK(c.network == cfg);
    CHECK(c.transient == t);
    CHECK(c.bias_scale == 1.0);
    CHECK(c.drive_scale == 1.0);
}

TEST_CASE("corner device card")
{
    const DeviceParams p;
    const CornerModel m;
    const DeviceParams hot = apply_corner(p, {Process::TT, 1.2, 100}, m);
    CHECK(thermal_voltage(hot.temperature) == doctest::Approx(oracle::ut_373_15).epsilon(1e-12));
    CHECK(hot.v_th == doctest::Approx(0.35 - 1e-3 * 73));

    const DeviceParams fast = apply_corner(p, {Process::FF, 1.2, 27}, m);
    CHECK(fast.v_th == doctest::Approx(0.32));
    CHECK(fast.i_zero == doctest::Approx(1.3e-12 * std::exp(0.03 / oracle::n_ut_300)));
    const DeviceParams slow = apply_corner(p, {Process::SS, 1.2, 27}, m);
    CHECK(slow.i_zero < p.i_zero);
    CHECK(apply_corner(p, {Process::FS, 1.2, 27}, m) == fast);
    CHECK(apply_corner(p, {Process::SF, 1.2, 27}, m) == slow);
}

TEST_CASE("corner buffer follows the second process letter")
{
    const NetworkConfig cfg;
    const TransientConfig t;
    const auto fs = apply_corner(cfg, t, {Process::FS, 1.2, 27});
    const auto sf = apply_corner(cfg, t, {Process::SF, 1.2, 27});
    CHECK(fs.bias_scale > 1.0);
    CHECK(fs.drive_scale < 1.0);
    CHECK(sf.bias_scale < 1.0);
    CHECK(sf.drive_scale > 1.0);
    const auto low = apply_corner(cfg, t, {Process::TT, 1.02, 27});
    CHECK(low.drive_scale < 1.0);
    CHECK(low.network.vdd == 1.02);
}

TEST_CASE("corner sweep")
{
    NetworkConfig cfg;
    cfg.k_cells = 10;
    const VariationReport r = corner_sweep(cfg, TransientConfig{}, CornerSet{});
    CHECK(r.kind == "corners");
    REQUIRE(r.rows.size() == 45);
    for (const auto& row : r.rows)
        CHECK(row.ok);
    CHECK(r.power.argmax == "FF/1.32V/100C");
    CHECK(r.power.count == 45);
    CHECK(r.latency.min > 0);

    std::vector<double> power, latency;
    for (const auto& row : r.rows) {
        power.push_back(row.power_w);
        latency.push_back(row.latency_s);
    }
    const auto [pm, ps] = oracle::mean_std(power);
    const auto [lm, ls] = oracle::mean_std(latency);
    CHECK(std::abs(r.power.mean - pm) <= 1e-12 * pm);
    CHECK(std::abs(r.power.stddev - ps) <= 1e-12 * ps);
    CHECK(std::abs(r.latency.mean - lm) <= 1e-12 * lm);
    CHECK(std::abs(r.latency.stddev - ls) <= 1e-12 * ls);
}

TEST_CASE("failed corners are reported and excluded")
{
    NetworkConfig cfg;
    CornerModel m;
    m.slow.vth_shift = 0.25; // bias transistors leave saturation at slow corners
    const VariationReport r = corner_sweep(cfg, TransientConfig{}, CornerSet{}, m);
    std::size_t failed = 0;
    for (const auto& row : r.rows)
        failed += row.ok ? 0 : 1;
    CHECK(failed > 0);
    CHECK(r.power.count == 45 - failed);
    CHECK(r.warnings.size() == failed);
}

TEST_CASE("summary statistics")
{
    std::vector<SampleRecord> rows;
    std::mt19937_64 rng(4);
    std::lognormal_distribution<double> d(-10, 0.5);
    std::vector<double> values;
    for (int i = 0; i < 257; ++i) {
        SampleRecord r;
        r.label = "s" + std::to_string(i);
        r.power_w = d(rng);
        rows.push_back(r);
        values.push_back(r.power_w);
    }
    rows.push_back({"bad", false, "boom", 1.0, 0, 0, false});
    const MetricSummary s = summarize(rows, &SampleRecord::power_w);
    const auto [mean, sd] = oracle::mean_std(values);
    CHECK(s.count == 257);
    CHECK(std::abs(s.mean - mean) <= 1e-12 * mean);
    CHECK(std::abs(s.stddev - sd) <= 1e-12 * sd);
    const auto mx = std::max_element(values.begin(), values.end());
    CHECK(s.max == *mx);
    CHECK(s.argmax == "s" + std::to_string(mx - values.begin()));
    CHECK(s.min == *std::min_element(values.begin(), values.end()));
}

TEST_CASE("histogram")
{
    const std::vector<double> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    const Histogram h = histogram(v, 5);
    CHECK(h.lower == 0);
    CHECK(h.upper == 10);
    CHECK(std::accumulate(h.counts.begin(), h.counts.end(), std::size_t{0}) == v.size());
    CHECK(h.counts.back() == 3);
    CHECK(histogram(std::vector<double>{2, 2, 2}, 4).counts[0] == 3);
    CHECK_THROWS_AS(histogram(v, 0), ConfigError);
}

TEST_CASE("Monte Carlo is keyed on seed, sample and cell")
{
    NetworkConfig cfg;
    cfg.k_cells = 4;
    const double v[] = {0.6, 0.62, 0.58, 0.61};
    const auto cells = make_cells(v);
    MonteCarloSettings s;
    s.samples = 12;
    s.latency = false;
    const VariationReport a = monte_carlo(cells, cfg, TransientConfig{}, s);
    const VariationReport b = monte_carlo(cells, cfg, TransientConfig{}, s);
    s.samples = 24;
    const VariationReport longer = monte_carlo(cells, cfg, TransientConfig{}, s);
    s.seed = 2;
    s.samples = 12;
    const VariationReport other = monte_carlo(cells, cfg, TransientConfig{}, s);
    bool differs = false;
    for (std::size_t i = 0; i < 12; ++i) {
        CHECK(a.rows[i].power_w == b.rows[i].power_w);
        CHECK(a.rows[i].power_w == longer.rows[i].power_w);
        CHECK(a.rows[i].winner_flipped == longer.rows[i].winner_flipped);
        differs |= a.rows[i].power_w != other.rows[i].power_w;
    }
    CHECK(differs);
    REQUIRE(a.flip_rate);
}

TEST_CASE("Monte Carlo flip rate matches the analytic mismatch model")
{
    NetworkConfig cfg;
    cfg.i_m = {0.5257e-6};
    const double v[] = {0.6, 0.61};
    MonteCarloSettings s;
    s.samples = 4000;
    s.sigma_vth = 0.02;
    s.sigma_wl = 0.0;
    s.latency = false;
    const VariationReport r = monte_carlo(make_cells(v), cfg, TransientConfig{}, s);
    const double p = oracle::mc_flip_probability;
    const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(s.samples));
    CHECK(std::abs(*r.flip_rate - p) < 3 * sigma);
}

TEST_CASE("Monte Carlo latency")
{
    NetworkConfig cfg;
    cfg.i_m = {0.5257e-6};
    const double v[] = {0.6, 0.7};
    MonteCarloSettings s;
    s.samples = 8;
    s.window = 20e-9;
    const VariationReport r = monte_carlo(make_cells(v), cfg, TransientConfig{}, s);
    for (const auto& row : r.rows) {
        CHECK(row.ok);
        CHECK(row.latency_s > row.slew_s);
        CHECK(row.slew_s == doctest::Approx(6.3627e-9).epsilon(0.01));
    }
    CHECK(r.latency.count == 8);
}

TEST_CASE("zero mismatch reproduces the nominal point")
{
    const DeviceParams p;
    CHECK(perturb_device(p, 0.0, 0.0) == p);
    const DeviceParams q = perturb_device(p, 0.01, 0.1);
    CHECK(q.v_th == doctest::Approx(0.36));
    CHECK(q.w_over_l == doctest::Approx(1.1));
    CHECK(subthreshold_current(q, 0.5) == doctest::Approx(1.1 * subthreshold_current(p, 0.49)));
}

TEST_CASE("report files")
{
    NetworkConfig cfg;
    const VariationReport r = corner_sweep(cfg, TransientConfig{}, CornerSet{});
    const auto dir = temp_dir("corners");
    write_report_files(r, dir.string(), 8);
    const CsvTable rows = read_csv((dir / "corners.csv").string());
    CHECK(rows.header == std::vector<std::string>{"label", "ok", "power_W", "latency_s", "slew_s", "winner_flipped",
                                                  "error"});
    REQUIRE(rows.rows.size() == 45);
    for (std::size_t i = 0; i < 45; ++i) {
        CHECK(rows.rows[i][0] == r.rows[i].label);
        CHECK(parse_number(rows.rows[i][2], "p") == doctest::Approx(r.rows[i].power_w).epsilon(1e-11));
    }
    const CsvTable hist = read_csv((dir / "histogram.csv").string());
    CHECK(hist.rows.size() == 16);
    std::ifstream in(dir / "summary.json");
    const auto j = nlohmann::json::parse(in);
    CHECK(j["samples"] == 45);
    CHECK(j["metrics"]["power_W"]["argmax"] == r.power.argmax);
    CHECK(j["metrics"]["power_W"]["mean"].get<double>() == r.power.mean);
    std::filesystem::remove_all(dir);
}
