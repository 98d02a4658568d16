#include "dynamics.hpp"

#include "csv.hpp"
#include "errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace wta {

namespace {

// Linearly interpolated time at which `series` crosses `level`, searching from `start`.
std::optional<double> first_crossing(const std::vector<double>& series, const std::vector<double>& time,
                                     std::size_t start, double level, bool rising)
{
    for (std::size_t m = std::max<std::size_t>(start, 1); m < series.size(); ++m) {
        const double a = series[m - 1];
        const double b = series[m];
        const bool crossed = rising ? (a < level && b >= level) : (a > level && b <= level);
        if (crossed) {
            const double f = (level - a) / (b - a);
            return time[m - 1] + f * (time[m] - time[m - 1]);
        }
    }
    return std::nullopt;
}

} // namespace

void validate(const TransientConfig& t)
{
    if (!(t.c_load > 0))
        throw ConfigError("transient.c_load must be > 0");
    if (!(t.i_buf > 0))
        throw ConfigError("transient.i_buf must be > 0");
    if (!(t.tau_internal > 0))
        throw ConfigError("transient.tau_internal must be > 0");
    if (!(t.t_step > 0))
        throw ConfigError("transient.t_step must be > 0");
    if (!(t.t_end > 0))
        throw ConfigError("transient.t_end must be > 0");
    if (t.t_step > t.tau_internal / 10 * (1 + 1e-12))
        throw ConfigError("transient.t_step must be <= tau_internal / 10");
}

std::optional<std::size_t> TransientTrace::column_of(std::size_t cell) const
{
    const auto it = std::find(cells.begin(), cells.end(), cell);
    if (it == cells.end())
        return std::nullopt;
    return static_cast<std::size_t>(it - cells.begin());
}

TransientTrace run_transient(std::span<const CellState> cells, const NetworkConfig& cfg,
                             std::span<const Stimulus> stimuli, const TransientConfig& tcfg,
                             const RecordOptions& record)
{
    validate(tcfg);
    if (stimuli.size() != cells.size())
        throw ConfigError("run_transient: need one stimulus per cell (" + std::to_string(cells.size())
                          + "), got " + std::to_string(stimuli.size()));
    if (record.stride == 0)
        throw ConfigError("run_transient: record stride must be >= 1");
    const double rail_low = cfg.dual_rail ? -cfg.vdd : 0.0;
    for (const auto& s : stimuli)
        check_within_rails(s, rail_low, cfg.vdd);

    const std::size_t k = cells.size();
    const double vdd = cfg.vdd;
    const double half = 0.5 * vdd;
    const double dt = tcfg.t_step;
    const auto steps = static_cast<std::size_t>(std::llround(tcfg.t_end / dt));
    const double relax = -std::expm1(-dt / tcfg.tau_internal);
    const double slew_step = tcfg.i_buf / tcfg.c_load * dt;

    TransientTrace trace;
    trace.vdd = vdd;
    if (record.cells.empty()) {
        trace.cells.resize(k);
        std::iota(trace.cells.begin(), trace.cells.end(), std::size_t{0});
    } else {
        for (std::size_t c : record.cells)
            if (c >= k)
                throw ConfigError("run_transient: recorded cell " + std::to_string(c) + " out of range");
        trace.cells = record.cells;
    }
    const std::size_t samples = steps / record.stride + 1;
    trace.time.reserve(samples);
    trace.winners.reserve(samples);
    trace.outputs.assign(trace.cells.size(), {});
    trace.v_x.assign(trace.cells.size(), {});
    for (std::size_t c = 0; c < trace.cells.size(); ++c) {
        trace.outputs[c].reserve(samples);
        trace.v_x[c].reserve(samples);
    }

    std::vector<CellState> state(cells.begin(), cells.end());
    for (std::size_t i = 0; i < k; ++i)
        state[i].v_in = stimuli[i].value_at(0.0);
    DcSolution sol = settle_dc(state, cfg);

    std::vector<double> node(k, 0.0);
    std::vector<double> out(k, 0.0);
    for (std::size_t w : sol.op.winners) {
        node[w] = vdd;
        out[w] = vdd;
    }

    auto push = [&](double t) {
        trace.time.push_back(t);
        trace.winners.push_back(sol.op.winners);
        for (std::size_t c = 0; c < trace.cells.size(); ++c) {
            trace.outputs[c].push_back(out[trace.cells[c]]);
            trace.v_x[c].push_back(node[trace.cells[c]]);
        }
    };
    push(0.0);

    for (std::size_t n = 1; n <= steps; ++n) {
        const double t = static_cast<double>(n) * dt;
        state = std::move(sol.cells);
        for (std::size_t i = 0; i < k; ++i)
            state[i].v_in = stimuli[i].value_at(t);
        sol = solve_dc(state, cfg);

        std::size_t next_winner = 0;
        for (std::size_t i = 0; i < k; ++i) {
            bool won = false;
            if (next_winner < sol.op.winners.size() && sol.op.winners[next_winner] == i) {
                won = true;
                ++next_winner;
            }
            node[i] += ((won ? vdd : 0.0) - node[i]) * relax;
            out[i] = std::clamp(out[i] + (node[i] > half ? slew_step : -slew_step), 0.0, vdd);
        }
        if (n % record.stride == 0)
            push(t);
    }
    return trace;
}

LatencyMeasurement measure_latency(const TransientTrace& trace, double edge_time)
{
    const auto first_after = static_cast<std::size_t>(
        std::upper_bound(trace.time.begin(), trace.time.end(), edge_time) - trace.time.begin());
    if (first_after == 0 || first_after >= trace.time.size())
        throw MeasurementError("measure_latency: edge time outside the trace");

    std::optional<std::size_t> cell;
    std::size_t change_index = 0;
    for (std::size_t n = first_after; n < trace.winners.size() && !cell; ++n) {
        const auto& before = trace.winners[n - 1];
        for (std::size_t w : trace.winners[n]) {
            if (!std::binary_search(before.begin(), before.end(), w)) {
                cell = w;
                change_index = n;
                break;
            }
        }
    }
    if (!cell)
        throw MeasurementError("measure_latency: no winner change after t = " + std::to_string(edge_time) + " s");
    const auto column = trace.column_of(*cell);
    if (!column)
        throw MeasurementError("measure_latency: new winner " + std::to_string(*cell) + " was not recorded");

    const double half = 0.5 * trace.vdd;
    const auto& out = trace.outputs[*column];
    const auto& node = trace.v_x[*column];
    const auto t_node = first_crossing(node, trace.time, change_index, half, true);
    const auto t_out = first_crossing(out, trace.time, change_index, half, true);
    if (!t_node || !t_out)
        throw MeasurementError("measure_latency: output of cell " + std::to_string(*cell)
                               + " never crossed vdd/2 within the trace");
    const auto t_full = first_crossing(out, trace.time, change_index, trace.vdd * (1 - 1e-12), true);

    LatencyMeasurement m;
    m.cell = *cell;
    m.total = *t_out - edge_time;
    m.internal = *t_node - edge_time;
    m.slew = m.total - m.internal;
    m.settle = t_full ? *t_full - edge_time : std::numeric_limits<double>::quiet_NaN();
    return m;
}

SweepCurve dc_sweep(std::size_t cell, double v_from, double v_to, std::size_t n_points, SweepDirection direction,
                    std::span<const CellState> cells, const NetworkConfig& cfg)
{
    if (n_points < 2)
        throw DomainError("dc_sweep: n_points must be >= 2");
    if (cell >= cells.size())
        throw DomainError("dc_sweep: cell index " + std::to_string(cell) + " out of range");
    const double lo = std::min(v_from, v_to);
    const double hi = std::max(v_from, v_to);

    SweepCurve curve;
    curve.cell = cell;
    curve.vdd = cfg.vdd;
    curve.points.reserve(n_points);
    std::vector<CellState> state(cells.begin(), cells.end());
    for (std::size_t j = 0; j < n_points; ++j) {
        const std::size_t idx = direction == SweepDirection::Up ? j : n_points - 1 - j;
        const double v = lo + (hi - lo) * static_cast<double>(idx) / static_cast<double>(n_points - 1);
        state[cell].v_in = v;
        DcSolution sol = settle_dc(state, cfg);
        curve.points.push_back({v, sol.op.outputs});
        state = std::move(sol.cells);
    }
    curve.final_cells = std::move(state);
    return curve;
}

std::optional<double> find_flip(const SweepCurve& curve, bool rising)
{
    const double half = 0.5 * curve.vdd;
    for (std::size_t j = 1; j < curve.points.size(); ++j) {
        const bool before = curve.points[j - 1].outputs[curve.cell] > half;
        const bool after = curve.points[j].outputs[curve.cell] > half;
        if (before != after && after == rising)
            return 0.5 * (curve.points[j - 1].v_in + curve.points[j].v_in);
    }
    return std::nullopt;
}

HysteresisLoop measure_hysteresis(std::span<const CellState> cells, const NetworkConfig& cfg,
                                  const HysteresisSweep& sweep)
{
    HysteresisLoop loop;
    loop.up = dc_sweep(sweep.cell, sweep.v_from, sweep.v_to, sweep.n_points, SweepDirection::Up, cells, cfg);
    loop.down = dc_sweep(sweep.cell, sweep.v_from, sweep.v_to, sweep.n_points, SweepDirection::Down,
                         loop.up.final_cells, cfg);
    const auto up = find_flip(loop.up, true);
    const auto down = find_flip(loop.down, false);
    if (!up || !down)
        throw MeasurementError("measure_hysteresis: swept cell did not flip both ways in ["
                               + std::to_string(sweep.v_from) + ", " + std::to_string(sweep.v_to) + "] V");
    loop.v_flip_up = *up;
    loop.v_flip_down = *down;
    loop.width = loop.v_flip_up - loop.v_flip_down;
    return loop;
}

double resolution_closed_form(const NetworkConfig& cfg)
{
    const double i_m = reference_currents(cfg).front();
    const double g_ic = cfg.device.mirror_gain * cfg.i_c;
    if (i_m <= 0.5 * g_ic)
        return 0.0;
    return slope_voltage(cfg.device) * std::log(i_m / (g_ic - i_m));
}

ResolutionResult measure_resolution(double fixed_v, const NetworkConfig& cfg, double tolerance)
{
    if (cfg.k_cells != 2)
        throw DomainError("measure_resolution: needs a 2-cell network");
    if (cfg.feedback_enabled)
        throw DomainError("measure_resolution: feedback must be disabled");
    if (!(tolerance > 0))
        throw DomainError("measure_resolution: tolerance must be > 0");

    ResolutionResult result;
    result.closed_form = resolution_closed_form(cfg);
    const double i_m = reference_currents(cfg).front();
    if (i_m <= 0.5 * cfg.device.mirror_gain * cfg.i_c) {
        result.at_or_below_balance = true;
        return result;
    }

    auto swept_wins = [&](double gap) {
        const CellState pair[2] = {{fixed_v, false}, {fixed_v + gap, false}};
        return solve_dc(pair, cfg).op.is_winner(1);
    };
    double lo = 0.0;
    double hi = cfg.vdd - fixed_v;
    if (!(hi > 0) || !swept_wins(hi))
        throw MeasurementError("measure_resolution: swept cell cannot win below the supply rail");
    while (hi - lo > tolerance) {
        const double mid = 0.5 * (lo + hi);
        (swept_wins(mid) ? hi : lo) = mid;
    }
    result.resolution = 0.5 * (lo + hi);
    return result;
}

void write_trace_csv(const TransientTrace& trace, const std::string& path)
{
    std::vector<std::string> header{"time_s"};
    for (std::size_t c : trace.cells)
        header.push_back("out_" + std::to_string(c));
    for (std::size_t c : trace.cells)
        header.push_back("vx_" + std::to_string(c));
    CsvWriter w(path, header);
    std::vector<double> row(header.size());
    for (std::size_t n = 0; n < trace.time.size(); ++n) {
        row[0] = trace.time[n];
        for (std::size_t c = 0; c < trace.cells.size(); ++c) {
            row[1 + c] = trace.outputs[c][n];
            row[1 + trace.cells.size() + c] = trace.v_x[c][n];
        }
        w.row(row);
    }
    w.close();
}

void write_sweep_csv(const SweepCurve& curve, const std::string& path)
{
    std::vector<std::string> header{"v_in_V"};
    const std::size_t k = curve.points.empty() ? 0 : curve.points.front().outputs.size();
    for (std::size_t c = 0; c < k; ++c)
        header.push_back("out_" + std::to_string(c));
    CsvWriter w(path, header);
    std::vector<double> row(header.size());
    for (const auto& p : curve.points) {
        row[0] = p.v_in;
        std::copy(p.outputs.begin(), p.outputs.end(), row.begin() + 1);
        w.row(row);
    }
    w.close();
}

void write_op_point_csv(const OperatingPoint& op, std::span<const CellState> cells, const std::string& path)
{
    const std::vector<std::string> header{"cell", "v_in_V", "i_branch_A", "v_x_V", "out_V", "winner"};
    CsvWriter w(path, header);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const double row[] = {static_cast<double>(i), cells[i].v_in, op.branch_currents[i], op.v_x[i], op.outputs[i],
                              op.is_winner(i) ? 1.0 : 0.0};
        w.row(row);
    }
    w.close();
}

} // namespace wta
