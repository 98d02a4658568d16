#include "variation.hpp"

#include "csv.hpp"
#include "errors.hpp"
#include "parallel.hpp"
#include "rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace wta {

namespace {

constexpr double kelvin_offset = 273.15;

const ProcessShift& nmos_shift(Process p, const CornerModel& m)
{
    switch (p) {
    case Process::FF:
    case Process::FS: return m.fast;
    case Process::SF:
    case Process::SS: return m.slow;
    case Process::TT: break;
    }
    return m.typical;
}

const ProcessShift& pmos_shift(Process p, const CornerModel& m)
{
    switch (p) {
    case Process::FF:
    case Process::SF: return m.fast;
    case Process::FS:
    case Process::SS: return m.slow;
    case Process::TT: break;
    }
    return m.typical;
}

std::string sanitize(std::string s)
{
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

void finish(VariationReport& report)
{
    for (const auto& row : report.rows)
        if (!row.ok)
            report.warnings.push_back(row.label + ": excluded from statistics: " + row.error);
    report.power = summarize(report.rows, &SampleRecord::power_w);
    report.latency = summarize(report.rows, &SampleRecord::latency_s);
}

nlohmann::json to_json(const MetricSummary& m)
{
    return {{"count", m.count}, {"mean", m.mean}, {"std", m.stddev},
            {"min", m.min},     {"max", m.max},   {"argmax", m.argmax}};
}

std::vector<double> successful(const VariationReport& report, double SampleRecord::*metric)
{
    std::vector<double> v;
    for (const auto& r : report.rows)
        if (r.ok)
            v.push_back(r.*metric);
    return v;
}

} // namespace

PowerBreakdown estimate_power(const OperatingPoint& op, const NetworkConfig& cfg, const Activity& activity)
{
    PowerBreakdown p;
    double branch = 0.0;
    double losing = 0.0;
    for (std::size_t i = 0; i < op.branch_currents.size(); ++i) {
        const double g = cfg.device_for(i).mirror_gain;
        const double drawn = (1.0 + g) * op.branch_currents[i];
        branch += drawn;
        if (!op.is_winner(i))
            losing += drawn;
    }
    double references = 0.0;
    for (double i_m : reference_currents(cfg))
        references += i_m;
    p.static_w = cfg.vdd * (branch + references);
    p.dynamic_w = static_cast<double>(activity.toggling_outputs) * activity.c_load * cfg.vdd * cfg.vdd
                  * activity.toggle_rate;
    p.total_w = p.static_w + p.dynamic_w;
    p.losing_w = cfg.vdd * losing;
    p.losing_share = p.total_w > 0 ? p.losing_w / p.total_w : 0.0;
    return p;
}

std::string to_string(Process p)
{
    switch (p) {
    case Process::FF: return "FF";
    case Process::FS: return "FS";
    case Process::SF: return "SF";
    case Process::SS: return "SS";
    case Process::TT: return "TT";
    }
    return "?";
}

Process parse_process(const std::string& label)
{
    for (Process p : {Process::FF, Process::FS, Process::SF, Process::SS, Process::TT})
        if (to_string(p) == label)
            return p;
    throw ConfigError("unknown process corner '" + label + "' (expected FF, FS, SF, SS or TT)");
}

std::string CornerSpec::label() const
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s/%gV/%gC", to_string(process).c_str(), supply, temperature_c);
    return buf;
}

std::vector<CornerSpec> enumerate_corners(const CornerSet& set)
{
    if (set.processes.empty() || set.supplies.empty() || set.temperatures_c.empty())
        throw ConfigError("corners: process, supply and temperature sets must be non-empty");
    std::vector<CornerSpec> out;
    for (Process p : set.processes)
        for (double v : set.supplies)
            for (double t : set.temperatures_c)
                out.push_back({p, v, t});
    return out;
}

DeviceParams apply_corner(const DeviceParams& p, const CornerSpec& c, const CornerModel& m)
{
    if (!(c.supply > 0))
        throw ConfigError("corner supply must be > 0");
    if (!(c.temperature_c + kelvin_offset > 0))
        throw ConfigError("corner temperature below absolute zero");
    const ProcessShift& shift = nmos_shift(c.process, m);
    DeviceParams q = p;
    const double dv = shift.vth_shift + m.vth_tempco * (c.temperature_c - m.reference_c);
    if (c.temperature_c != m.reference_c)
        q.temperature = c.temperature_c + kelvin_offset;
    q.v_th += dv;
    q.i_zero *= shift.current_mult * std::exp(-dv / slope_voltage(q));
    return q;
}

CornerConditions apply_corner(const NetworkConfig& cfg, const TransientConfig& tcfg, const CornerSpec& c,
                              const CornerModel& m)
{
    CornerConditions out{cfg, tcfg};
    NetworkConfig& n = out.network;
    n.device = apply_corner(cfg.device, c, m);
    for (auto& d : n.cell_devices)
        d = apply_corner(d, c, m);
    n.vdd = c.supply;

    const double dt = c.temperature_c - m.reference_c;
    const ProcessShift& ns = nmos_shift(c.process, m);
    const double ov = cfg.device.overdrive;
    const double bias_ov = ov - (ns.vth_shift + m.vth_tempco * dt);
    if (!(bias_ov > 0))
        throw ConfigError("corner " + c.label() + ": bias sources leave saturation");
    out.bias_scale = ns.current_mult * (bias_ov / ov) * (bias_ov / ov);
    n.i_c *= out.bias_scale;
    for (double& i_m : n.i_m)
        i_m *= out.bias_scale;

    const ProcessShift& ps = pmos_shift(c.process, m);
    const double buf_ov = c.supply - (cfg.device.v_th + ps.vth_shift + m.vth_tempco * dt);
    const double nominal_ov = m.nominal_vdd - cfg.device.v_th;
    if (!(buf_ov > 0) || !(nominal_ov > 0))
        throw ConfigError("corner " + c.label() + ": output buffer has no overdrive");
    const double kelvin_ratio = (c.temperature_c + kelvin_offset) / (m.reference_c + kelvin_offset);
    out.drive_scale = ps.current_mult * (buf_ov / nominal_ov) * (buf_ov / nominal_ov)
                      * std::pow(kelvin_ratio, m.mobility_exponent);
    out.transient.i_buf *= out.drive_scale;
    out.transient.tau_internal /= out.bias_scale;
    out.transient.t_step = std::min(out.transient.t_step, out.transient.tau_internal / 10);
    return out;
}

MetricSummary summarize(std::span<const SampleRecord> rows, double SampleRecord::*metric)
{
    MetricSummary s;
    double mean = 0.0;
    double m2 = 0.0;
    for (const auto& r : rows) {
        if (!r.ok)
            continue;
        const double x = r.*metric;
        ++s.count;
        const double delta = x - mean;
        mean += delta / static_cast<double>(s.count);
        m2 += delta * (x - mean);
        if (s.count == 1 || x < s.min)
            s.min = x;
        if (s.count == 1 || x > s.max) {
            s.max = x;
            s.argmax = r.label;
        }
    }
    s.mean = mean;
    s.stddev = s.count > 1 ? std::sqrt(m2 / static_cast<double>(s.count - 1)) : 0.0;
    return s;
}

VariationReport corner_sweep(const NetworkConfig& cfg, const TransientConfig& tcfg, const CornerSet& set,
                             const CornerModel& model, const CornerScenario& scenario)
{
    validate(cfg);
    validate(tcfg);
    if (scenario.pulsed_cell >= cfg.k_cells)
        throw ConfigError("corners.pulsed_cell out of range");
    const std::vector<CornerSpec> corners = enumerate_corners(set);

    VariationReport report;
    report.kind = "corners";
    report.rows.resize(corners.size());
    parallel_for(corners.size(), [&](std::size_t idx) {
        SampleRecord& row = report.rows[idx];
        row.label = corners[idx].label();
        try {
            const CornerConditions cond = apply_corner(cfg, tcfg, corners[idx], model);
            validate(cond.network);
            const NetworkConfig& net = cond.network;

            std::vector<Stimulus> stimuli(net.k_cells, Stimulus::dc(scenario.base_input));
            stimuli[scenario.pulsed_cell] = Stimulus(Pulse{0.0,
                                                  net.vdd,
                                                  scenario.pulse_delay,
                                                  scenario.pulse_rise,
                                                  scenario.pulse_rise,
                                                  scenario.pulse_width,
                                                  scenario.pulse_period});
            std::vector<CellState> cells(net.k_cells, CellState{scenario.base_input, false});
            cells[scenario.pulsed_cell].v_in = 0.0;

            TransientConfig t = cond.transient;
            t.t_end = scenario.pulse_delay + scenario.window;
            const TransientTrace trace = run_transient(cells, net, stimuli, t, {1, {scenario.pulsed_cell}});
            const LatencyMeasurement lat = measure_latency(trace, scenario.pulse_delay);

            cells[scenario.pulsed_cell].v_in = net.vdd;
            const DcSolution high = settle_dc(cells, net);
            const Activity activity{scenario.toggle_rate, t.c_load, net.cluster_count()};
            row.power_w = estimate_power(high.op, net, activity).total_w;
            row.latency_s = lat.total;
            row.slew_s = lat.slew;
        } catch (const Error& e) {
            row.ok = false;
            row.error = e.what();
        }
    });
    finish(report);
    return report;
}

DeviceParams perturb_device(const DeviceParams& p, double dv_th, double dwl_rel)
{
    DeviceParams q = p;
    q.v_th += dv_th;
    q.i_zero *= std::exp(-dv_th / slope_voltage(p));
    q.w_over_l *= std::max(1e-6, 1.0 + dwl_rel);
    return q;
}

VariationReport monte_carlo(std::span<const CellState> cells, const NetworkConfig& cfg, const TransientConfig& tcfg,
                            const MonteCarloSettings& settings, const Activity& activity)
{
    validate(cfg);
    if (settings.samples < 1)
        throw ConfigError("monte-carlo.samples must be >= 1");
    if (!(settings.sigma_vth >= 0) || !(settings.sigma_wl >= 0))
        throw ConfigError("monte-carlo sigmas must be >= 0");
    if (settings.latency)
        validate(tcfg);

    const std::size_t k = cells.size();
    const DcSolution nominal = settle_dc(cells, cfg);
    const std::size_t top = static_cast<std::size_t>(
        std::max_element(cells.begin(), cells.end(),
                         [](const CellState& a, const CellState& b) { return a.v_in < b.v_in; })
        - cells.begin());
    const KeyedNormal normal(settings.seed);

    VariationReport report;
    report.kind = "monte-carlo";
    report.rows.resize(settings.samples);
    std::vector<char> flipped(settings.samples, 0);
    parallel_for(settings.samples, [&](std::size_t s) {
        SampleRecord& row = report.rows[s];
        char label[32];
        std::snprintf(label, sizeof label, "sample_%06zu", s);
        row.label = label;
        try {
            NetworkConfig local = cfg;
            local.cell_devices.resize(k);
            for (std::size_t i = 0; i < k; ++i)
                local.cell_devices[i] = perturb_device(cfg.device_for(i), settings.sigma_vth * normal(s, i, 0),
                                                       settings.sigma_wl * normal(s, i, 1));
            const DcSolution sol = settle_dc(cells, local);
            row.winner_flipped = sol.op.winners != nominal.op.winners;
            flipped[s] = row.winner_flipped;
            row.power_w = estimate_power(sol.op, local, activity).total_w;
            if (settings.latency) {
                std::vector<Stimulus> stimuli;
                stimuli.reserve(k);
                for (std::size_t i = 0; i < k; ++i)
                    stimuli.push_back(Stimulus::dc(cells[i].v_in));
                stimuli[top] = Stimulus(PiecewiseLinear{
                    {{0.0, 0.0}, {settings.edge_time, 0.0}, {settings.edge_time + 0.1e-9, cells[top].v_in}}});
                std::vector<CellState> start(cells.begin(), cells.end());
                start[top].v_in = 0.0;
                TransientConfig t = tcfg;
                t.t_end = settings.edge_time + settings.window;
                RecordOptions record;
                if (k > 64)
                    record.cells = {top};
                const TransientTrace trace = run_transient(start, local, stimuli, t, record);
                const LatencyMeasurement lat = measure_latency(trace, settings.edge_time);
                row.latency_s = lat.total;
                row.slew_s = lat.slew;
            }
        } catch (const Error& e) {
            row.ok = false;
            row.error = e.what();
        }
    });
    std::size_t flips = 0;
    for (char f : flipped)
        flips += f ? 1 : 0;
    report.flip_rate = static_cast<double>(flips) / static_cast<double>(settings.samples);
    finish(report);
    if (!settings.latency) {
        report.latency = {};
    }
    return report;
}

Histogram histogram(std::span<const double> values, std::size_t bins)
{
    if (bins == 0)
        throw ConfigError("histogram bins must be >= 1");
    Histogram h;
    h.counts.assign(bins, 0);
    if (values.empty())
        return h;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    h.lower = *lo;
    h.upper = *hi;
    const double span = h.upper - h.lower;
    for (double v : values) {
        std::size_t b = 0;
        if (span > 0)
            b = std::min(bins - 1, static_cast<std::size_t>((v - h.lower) / span * static_cast<double>(bins)));
        ++h.counts[b];
    }
    return h;
}

void write_report_csv(const VariationReport& report, const std::string& path)
{
    const std::vector<std::string> header{"label", "ok", "power_W", "latency_s", "slew_s", "winner_flipped", "error"};
    CsvWriter w(path, header);
    for (const auto& r : report.rows) {
        const std::vector<std::string> fields{r.label,
                                              r.ok ? "1" : "0",
                                              format_number(r.power_w),
                                              format_number(r.latency_s),
                                              format_number(r.slew_s),
                                              r.winner_flipped ? "1" : "0",
                                              sanitize(r.error)};
        w.row(fields);
    }
    w.close();
}

void write_summary_json(const VariationReport& report, const std::string& path)
{
    nlohmann::json j;
    j["kind"] = report.kind;
    j["samples"] = report.rows.size();
    j["metrics"]["power_W"] = to_json(report.power);
    j["metrics"]["latency_s"] = to_json(report.latency);
    if (report.flip_rate)
        j["flip_rate"] = *report.flip_rate;
    j["warnings"] = report.warnings;
    if (report.kind == "corners") {
        // Figures from the reference 65 nm design, for comparison only.
        j["reference_values"] = {{"nominal_power_W", 34.89e-6},      {"power_mean_W", 40e-6},
                                 {"power_std_W", 15.71e-6},          {"power_worst_W", 84.83e-6},
                                 {"power_worst_corner", "FF/1.32V/100C"},
                                 {"latency_nominal_s", 10.4e-9},     {"latency_mean_s", 11.19e-9},
                                 {"latency_std_s", 2.66e-9},         {"latency_worst_s", 17.61e-9},
                                 {"response_time_s", 6.36e-9}};
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open '" + path + "' for writing");
    out << j.dump(2) << '\n';
    if (!out)
        throw IoError("error writing '" + path + "'");
}

void write_histogram_csv(const VariationReport& report, const std::string& path, std::size_t bins)
{
    const std::vector<std::string> header{"metric", "bin", "lower", "upper", "count"};
    CsvWriter w(path, header);
    const std::pair<const char*, double SampleRecord::*> metrics[] = {{"power_W", &SampleRecord::power_w},
                                                                       {"latency_s", &SampleRecord::latency_s}};
    for (const auto& [name, member] : metrics) {
        const std::vector<double> values = successful(report, member);
        const Histogram h = histogram(values, bins);
        const double width = (h.upper - h.lower) / static_cast<double>(bins);
        for (std::size_t b = 0; b < bins; ++b) {
            const std::vector<std::string> fields{name, std::to_string(b),
                                                  format_number(h.lower + width * static_cast<double>(b)),
                                                  format_number(h.lower + width * static_cast<double>(b + 1)),
                                                  std::to_string(h.counts[b])};
            w.row(fields);
        }
    }
    w.close();
}

void write_report_files(const VariationReport& report, const std::string& dir, std::size_t bins)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create directory '" + dir + "': " + ec.message());
    const std::filesystem::path base(dir);
    write_report_csv(report, (base / (report.kind + ".csv")).string());
    write_summary_json(report, (base / "summary.json").string());
    write_histogram_csv(report, (base / "histogram.csv").string(), bins);
}

} // namespace wta
