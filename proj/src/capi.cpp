#include "wta/wta.h"

#include "apps.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "network.hpp"
#include "pgm.hpp"
#include "variation.hpp"

#include <algorithm>
#include <cstring>
#include <new>
#include <string>
#include <vector>

struct wta_config {
    wta::SimConfig c;
};

struct wta_op_point {
    wta::OperatingPoint op;
    std::vector<wta::CellState> cells;
};

struct wta_sweep {
    wta::SweepCurve curve;
};

struct wta_stimuli {
    std::vector<wta::Stimulus> s;
};

struct wta_trace {
    wta::TransientTrace t;
};

struct wta_report {
    wta::VariationReport r;
};

struct wta_image {
    wta::GrayImage img;
};

struct wta_activations {
    wta::ActivationTable t;
};

struct wta_classification {
    wta::ClassificationResult r;
    wta::ActivationTable table;
};

namespace {

thread_local std::string last_error;

struct InvalidArgument {
    std::string what;
};

template <class Fn>
wta_status guard(Fn&& fn) noexcept
{
    try {
        fn();
        last_error.clear();
        return WTA_OK;
    } catch (const wta::Error& e) {
        last_error = e.what();
        return static_cast<wta_status>(e.code());
    } catch (const InvalidArgument& e) {
        last_error = e.what;
        return WTA_ERR_INVALID_ARGUMENT;
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return WTA_ERR_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return WTA_ERR_INTERNAL;
    } catch (...) {
        last_error = "unknown exception";
        return WTA_ERR_INTERNAL;
    }
}

template <class T>
void require(const T* p, const char* name)
{
    if (!p)
        throw InvalidArgument{std::string(name) + " must not be NULL"};
}

void copy_out(const std::string& value, char* buf, size_t cap, size_t* needed)
{
    if (needed)
        *needed = value.size() + 1;
    if (!buf || cap < value.size() + 1)
        throw InvalidArgument{"buffer too small, need " + std::to_string(value.size() + 1) + " bytes"};
    std::memcpy(buf, value.c_str(), value.size() + 1);
}

// Copy of the configured network sized to n cells.
wta::NetworkConfig network_for(const wta_config* cfg, size_t n)
{
    require(cfg, "cfg");
    wta::NetworkConfig net = cfg->c.network;
    net.k_cells = n;
    wta::validate(net);
    return net;
}

std::vector<wta::CellState> cells_from(const double* v_in, size_t n)
{
    if (n > 0)
        require(v_in, "v_in");
    return wta::make_cells(std::span<const double>(v_in, n));
}

void fill_summary(const wta::MetricSummary& m, wta_metric_summary* out)
{
    out->count = m.count;
    out->mean = m.mean;
    out->stddev = m.stddev;
    out->min = m.min;
    out->max = m.max;
    std::memset(out->argmax, 0, sizeof out->argmax);
    std::strncpy(out->argmax, m.argmax.c_str(), sizeof out->argmax - 1);
}

void set_stimulus(wta_stimuli* s, size_t cell, wta::Stimulus value)
{
    require(s, "stimuli");
    if (cell >= s->s.size())
        throw InvalidArgument{"stimulus index " + std::to_string(cell) + " out of range"};
    s->s[cell] = std::move(value);
}

} // namespace

extern "C" {

const char* wta_status_name(wta_status status)
{
    switch (status) {
    case WTA_OK:
        return "ok";
    case WTA_ERR_INVALID_ARGUMENT:
        return "invalid_argument";
    case WTA_ERR_INTERNAL:
        return "internal";
    default:
        if (status >= WTA_ERR_DOMAIN && status <= WTA_ERR_IO)
            return wta::error_code_name(static_cast<wta::ErrorCode>(status));
        return "unknown";
    }
}

const char* wta_last_error(void)
{
    return last_error.c_str();
}

const char* wta_version(void)
{
    return "1.0.0";
}

wta_status wta_config_new(wta_config** out)
{
    return guard([&] {
        require(out, "out");
        *out = new wta_config{wta::default_config()};
    });
}

wta_status wta_config_load(const char* path, wta_config** out)
{
    return guard([&] {
        require(path, "path");
        require(out, "out");
        *out = new wta_config{wta::load_config(path)};
    });
}

wta_status wta_config_parse(const char* text, wta_config** out)
{
    return guard([&] {
        require(text, "text");
        require(out, "out");
        *out = new wta_config{wta::parse_config(text)};
    });
}

wta_status wta_config_clone(const wta_config* cfg, wta_config** out)
{
    return guard([&] {
        require(cfg, "cfg");
        require(out, "out");
        *out = new wta_config{cfg->c};
    });
}

void wta_config_free(wta_config* cfg)
{
    delete cfg;
}

wta_status wta_config_set(wta_config* cfg, const char* key, const char* value)
{
    return guard([&] {
        require(cfg, "cfg");
        require(key, "key");
        require(value, "value");
        wta::set_config_value(cfg->c, key, value);
    });
}

wta_status wta_config_validate(const wta_config* cfg)
{
    return guard([&] {
        require(cfg, "cfg");
        wta::validate(cfg->c);
    });
}

wta_status wta_config_get(const wta_config* cfg, const char* key, char* buf, size_t cap, size_t* needed)
{
    return guard([&] {
        require(cfg, "cfg");
        require(key, "key");
        copy_out(wta::get_config_value(cfg->c, key), buf, cap, needed);
    });
}

wta_status wta_config_to_text(const wta_config* cfg, char* buf, size_t cap, size_t* needed)
{
    return guard([&] {
        require(cfg, "cfg");
        copy_out(wta::to_config_text(cfg->c), buf, cap, needed);
    });
}

wta_status wta_load_inputs(const char* path, double* out, size_t cap, size_t* count)
{
    return guard([&] {
        require(path, "path");
        require(count, "count");
        const wta::CsvTable table = wta::read_csv(path);
        const std::size_t col = table.column("v_in_V");
        *count = table.rows.size();
        for (std::size_t r = 0; r < table.rows.size() && out && r < cap; ++r)
            out[r] = wta::parse_number(table.rows[r][col], std::string(path) + ": row " + std::to_string(r + 1));
    });
}

wta_status wta_solve_dc(const wta_config* cfg, const double* v_in, size_t n, wta_op_point** out)
{
    return guard([&] {
        require(out, "out");
        const wta::NetworkConfig net = network_for(cfg, n);
        const auto cells = cells_from(v_in, n);
        wta::DcSolution sol = net.feedback_enabled ? wta::settle_dc(cells, net) : wta::solve_dc(cells, net);
        *out = new wta_op_point{std::move(sol.op), cells};
    });
}

void wta_op_point_free(wta_op_point* op)
{
    delete op;
}

size_t wta_op_point_cell_count(const wta_op_point* op)
{
    return op ? op->cells.size() : 0;
}

double wta_op_point_common_node(const wta_op_point* op)
{
    return op ? op->op.v_common : 0.0;
}

size_t wta_op_point_winner_count(const wta_op_point* op)
{
    return op ? op->op.winners.size() : 0;
}

size_t wta_op_point_winners(const wta_op_point* op, size_t* out, size_t cap)
{
    if (!op)
        return 0;
    if (out)
        std::copy_n(op->op.winners.begin(), std::min(cap, op->op.winners.size()), out);
    return op->op.winners.size();
}

wta_status wta_op_point_cell(const wta_op_point* op, size_t cell, wta_cell_state* out)
{
    return guard([&] {
        require(op, "op");
        require(out, "out");
        if (cell >= op->cells.size())
            throw InvalidArgument{"cell index " + std::to_string(cell) + " out of range"};
        out->v_in = op->cells[cell].v_in;
        out->branch_current = op->op.branch_currents[cell];
        out->v_x = op->op.v_x[cell];
        out->output = op->op.outputs[cell];
        out->winner = op->op.is_winner(cell) ? 1 : 0;
    });
}

wta_status wta_op_point_write_csv(const wta_op_point* op, const char* path)
{
    return guard([&] {
        require(op, "op");
        require(path, "path");
        wta::write_op_point_csv(op->op, op->cells, path);
    });
}

wta_status wta_dc_sweep(const wta_config* cfg, const double* v_in, size_t n, size_t cell, double v_from,
                        double v_to, size_t points, wta_sweep_direction direction, wta_sweep** out)
{
    return guard([&] {
        require(out, "out");
        const wta::NetworkConfig net = network_for(cfg, n);
        const auto cells = cells_from(v_in, n);
        const auto dir = direction == WTA_SWEEP_DOWN ? wta::SweepDirection::Down : wta::SweepDirection::Up;
        *out = new wta_sweep{wta::dc_sweep(cell, v_from, v_to, points, dir, cells, net)};
    });
}

void wta_sweep_free(wta_sweep* sweep)
{
    delete sweep;
}

size_t wta_sweep_point_count(const wta_sweep* sweep)
{
    return sweep ? sweep->curve.points.size() : 0;
}

wta_status wta_sweep_flip(const wta_sweep* sweep, int rising, double* v_flip, int* found)
{
    return guard([&] {
        require(sweep, "sweep");
        require(v_flip, "v_flip");
        require(found, "found");
        const auto v = wta::find_flip(sweep->curve, rising != 0);
        *found = v ? 1 : 0;
        *v_flip = v.value_or(0.0);
    });
}

wta_status wta_sweep_write_csv(const wta_sweep* sweep, const char* path)
{
    return guard([&] {
        require(sweep, "sweep");
        require(path, "path");
        wta::write_sweep_csv(sweep->curve, path);
    });
}

wta_status wta_hysteresis(const wta_config* cfg, const double* v_in, size_t n, size_t cell, double v_from,
                          double v_to, size_t points, const char* up_csv, const char* down_csv,
                          wta_hysteresis_result* out)
{
    return guard([&] {
        require(out, "out");
        const wta::NetworkConfig net = network_for(cfg, n);
        const auto cells = cells_from(v_in, n);
        const wta::HysteresisLoop loop = wta::measure_hysteresis(cells, net, {cell, v_from, v_to, points});
        if (up_csv)
            wta::write_sweep_csv(loop.up, up_csv);
        if (down_csv)
            wta::write_sweep_csv(loop.down, down_csv);
        out->v_flip_up = loop.v_flip_up;
        out->v_flip_down = loop.v_flip_down;
        out->width = loop.width;
        out->expected_width = net.feedback_enabled ? 2 * wta::feedback_boost(net.device, net.sizes) : 0.0;
    });
}

wta_status wta_resolution(const wta_config* cfg, double fixed_v, wta_resolution_result* out)
{
    return guard([&] {
        require(cfg, "cfg");
        require(out, "out");
        const wta::NetworkConfig& full = cfg->c.network;
        wta::validate(full);
        wta::NetworkConfig pair = full;
        pair.k_cells = 2;
        pair.feedback_enabled = false;
        pair.delta_winners = 1;
        pair.cell_devices.clear();
        const double i_m = full.i_m.empty() ? cfg->c.resolution.i_m_ratio * full.device.mirror_gain * full.i_c
                                            : wta::reference_currents(full).front();
        pair.i_m = {i_m};
        const wta::ResolutionResult r = wta::measure_resolution(fixed_v, pair);
        const double i_m_band = wta::reference_currents(full).front();
        out->measured = r.resolution;
        out->closed_form = r.closed_form;
        out->at_or_below_balance = r.at_or_below_balance ? 1 : 0;
        out->kwta_bound = full.delta_winners < full.k_cells
                              ? wta::kwta_resolution_bound(full.k_cells, full.delta_winners, i_m_band, full.i_c, full.device)
                              : 0.0;
    });
}

wta_status wta_stimuli_new(size_t n, wta_stimuli** out)
{
    return guard([&] {
        require(out, "out");
        *out = new wta_stimuli{std::vector<wta::Stimulus>(n, wta::Stimulus::dc(0.0))};
    });
}

void wta_stimuli_free(wta_stimuli* s)
{
    delete s;
}

wta_status wta_stimuli_set_dc(wta_stimuli* s, size_t cell, double level)
{
    return guard([&] { set_stimulus(s, cell, wta::Stimulus::dc(level)); });
}

wta_status wta_stimuli_set_pulse(wta_stimuli* s, size_t cell, double v1, double v2, double delay, double rise,
                                 double fall, double width, double period)
{
    return guard([&] { set_stimulus(s, cell, wta::Pulse{v1, v2, delay, rise, fall, width, period}); });
}

wta_status wta_stimuli_set_sine(wta_stimuli* s, size_t cell, double offset, double amplitude, double frequency,
                                double delay, double phase)
{
    return guard([&] { set_stimulus(s, cell, wta::Sine{offset, amplitude, frequency, delay, phase}); });
}

wta_status wta_stimuli_set_triangle(wta_stimuli* s, size_t cell, double v_low, double v_high, double period,
                                    double delay)
{
    return guard([&] { set_stimulus(s, cell, wta::Triangle{v_low, v_high, period, delay}); });
}

wta_status wta_stimuli_set_pwl(wta_stimuli* s, size_t cell, const double* times, const double* values, size_t n)
{
    return guard([&] {
        require(times, "times");
        require(values, "values");
        wta::PiecewiseLinear w;
        for (size_t i = 0; i < n; ++i)
            w.points.emplace_back(times[i], values[i]);
        set_stimulus(s, cell, std::move(w));
    });
}

wta_status wta_transient(const wta_config* cfg, const wta_stimuli* stimuli, size_t stride,
                         const size_t* record_cells, size_t n_record, wta_trace** out)
{
    return guard([&] {
        require(stimuli, "stimuli");
        require(out, "out");
        const wta::NetworkConfig net = network_for(cfg, stimuli->s.size());
        wta::RecordOptions record;
        record.stride = stride;
        if (record_cells && n_record > 0)
            record.cells.assign(record_cells, record_cells + n_record);
        const std::vector<wta::CellState> cells(stimuli->s.size());
        *out = new wta_trace{wta::run_transient(cells, net, stimuli->s, cfg->c.transient, record)};
    });
}

void wta_trace_free(wta_trace* trace)
{
    delete trace;
}

size_t wta_trace_sample_count(const wta_trace* trace)
{
    return trace ? trace->t.time.size() : 0;
}

wta_status wta_trace_latency(const wta_trace* trace, double edge_time, wta_latency* out)
{
    return guard([&] {
        require(trace, "trace");
        require(out, "out");
        const wta::LatencyMeasurement m = wta::measure_latency(trace->t, edge_time);
        *out = {m.cell, m.total, m.internal, m.slew, m.settle};
    });
}

wta_status wta_trace_write_csv(const wta_trace* trace, const char* path)
{
    return guard([&] {
        require(trace, "trace");
        require(path, "path");
        wta::write_trace_csv(trace->t, path);
    });
}

wta_status wta_power(const wta_config* cfg, const double* v_in, size_t n, wta_power_breakdown* out)
{
    return guard([&] {
        require(out, "out");
        const wta::NetworkConfig net = network_for(cfg, n);
        const auto cells = cells_from(v_in, n);
        const wta::DcSolution sol = net.feedback_enabled ? wta::settle_dc(cells, net) : wta::solve_dc(cells, net);
        const wta::Activity activity{cfg->c.power.toggle_rate, cfg->c.transient.c_load, cfg->c.power.toggling_outputs};
        const wta::PowerBreakdown p = wta::estimate_power(sol.op, net, activity);
        *out = {p.static_w, p.dynamic_w, p.total_w, p.losing_w, p.losing_share};
    });
}

wta_status wta_corners(const wta_config* cfg, wta_report** out)
{
    return guard([&] {
        require(cfg, "cfg");
        require(out, "out");
        wta::validate(cfg->c);
        const auto& c = cfg->c;
        *out = new wta_report{
            wta::corner_sweep(c.network, c.transient, c.corners.set, c.corners.model, c.corners.scenario)};
    });
}

wta_status wta_monte_carlo(const wta_config* cfg, const double* v_in, size_t n, wta_report** out)
{
    return guard([&] {
        require(out, "out");
        const wta::NetworkConfig net = network_for(cfg, n);
        const auto cells = cells_from(v_in, n);
        const auto& c = cfg->c;
        const wta::Activity activity{c.power.toggle_rate, c.transient.c_load, c.power.toggling_outputs};
        *out = new wta_report{wta::monte_carlo(cells, net, c.transient, c.monte_carlo, activity)};
    });
}

void wta_report_free(wta_report* report)
{
    delete report;
}

size_t wta_report_row_count(const wta_report* report)
{
    return report ? report->r.rows.size() : 0;
}

size_t wta_report_failed_count(const wta_report* report)
{
    if (!report)
        return 0;
    return static_cast<size_t>(
        std::count_if(report->r.rows.begin(), report->r.rows.end(), [](const auto& row) { return !row.ok; }));
}

wta_status wta_report_power(const wta_report* report, wta_metric_summary* out)
{
    return guard([&] {
        require(report, "report");
        require(out, "out");
        fill_summary(report->r.power, out);
    });
}

wta_status wta_report_latency(const wta_report* report, wta_metric_summary* out)
{
    return guard([&] {
        require(report, "report");
        require(out, "out");
        fill_summary(report->r.latency, out);
    });
}

wta_status wta_report_flip_rate(const wta_report* report, double* rate, int* has_rate)
{
    return guard([&] {
        require(report, "report");
        require(rate, "rate");
        require(has_rate, "has_rate");
        *has_rate = report->r.flip_rate ? 1 : 0;
        *rate = report->r.flip_rate.value_or(0.0);
    });
}

wta_status wta_report_write(const wta_report* report, const char* dir, size_t bins)
{
    return guard([&] {
        require(report, "report");
        require(dir, "dir");
        wta::write_report_files(report->r, dir, bins);
    });
}

wta_status wta_image_new(size_t width, size_t height, const uint8_t* pixels, wta_image** out)
{
    return guard([&] {
        require(out, "out");
        wta::GrayImage img(width, height);
        if (pixels)
            std::copy_n(pixels, img.pixels.size(), img.pixels.begin());
        *out = new wta_image{std::move(img)};
    });
}

wta_status wta_image_load(const char* path, wta_image** out)
{
    return guard([&] {
        require(path, "path");
        require(out, "out");
        *out = new wta_image{wta::load_pgm(path)};
    });
}

wta_status wta_image_save(const wta_image* img, const char* path, int binary)
{
    return guard([&] {
        require(img, "img");
        require(path, "path");
        wta::save_pgm(img->img, path, binary ? wta::PgmFormat::Binary : wta::PgmFormat::Ascii);
    });
}

void wta_image_free(wta_image* img)
{
    delete img;
}

size_t wta_image_width(const wta_image* img)
{
    return img ? img->img.width : 0;
}

size_t wta_image_height(const wta_image* img)
{
    return img ? img->img.height : 0;
}

const uint8_t* wta_image_pixels(const wta_image* img)
{
    return img ? img->img.pixels.data() : nullptr;
}

wta_status wta_binarize(const wta_config* cfg, const wta_image* img, uint8_t threshold, wta_binarize_path path,
                        wta_image** out)
{
    return guard([&] {
        require(cfg, "cfg");
        require(img, "img");
        require(out, "out");
        const auto p = path == WTA_BINARIZE_DIRECT ? wta::BinarizePath::Direct : wta::BinarizePath::Circuit;
        *out = new wta_image{wta::binarize_image(img->img, threshold, cfg->c.network, p)};
    });
}

wta_status wta_activations_load(const char* path, double sample_period, const wta_config* cfg,
                                wta_activations** out)
{
    return guard([&] {
        require(path, "path");
        require(out, "out");
        if (!(sample_period > 0)) {
            require(cfg, "cfg");
            sample_period = cfg->c.classify.sample_period;
        }
        *out = new wta_activations{wta::load_activations(path, sample_period)};
    });
}

void wta_activations_free(wta_activations* a)
{
    delete a;
}

size_t wta_activations_samples(const wta_activations* a)
{
    return a ? a->t.n_samples : 0;
}

size_t wta_activations_classes(const wta_activations* a)
{
    return a ? a->t.n_classes : 0;
}

wta_status wta_classify(const wta_config* cfg, const wta_activations* a, wta_classification** out)
{
    return guard([&] {
        require(cfg, "cfg");
        require(a, "activations");
        require(out, "out");
        const auto& c = cfg->c;
        *out = new wta_classification{wta::classify_trace(a->t, c.network, c.transient, c.classify), a->t};
    });
}

void wta_classification_free(wta_classification* c)
{
    delete c;
}

size_t wta_classification_count(const wta_classification* c)
{
    return c ? c->r.winners.size() : 0;
}

size_t wta_classification_winners(const wta_classification* c, long* out, size_t cap)
{
    if (!c)
        return 0;
    if (out)
        std::copy_n(c->r.winners.begin(), std::min(cap, c->r.winners.size()), out);
    return c->r.winners.size();
}

size_t wta_classification_ambiguous_count(const wta_classification* c)
{
    return c ? static_cast<size_t>(std::count(c->r.ambiguous.begin(), c->r.ambiguous.end(), true)) : 0;
}

double wta_classification_resolution(const wta_classification* c)
{
    return c ? c->r.resolution : 0.0;
}

wta_status wta_classification_accuracy(const wta_classification* c, double* accuracy, int* has_accuracy)
{
    return guard([&] {
        require(c, "classification");
        require(accuracy, "accuracy");
        require(has_accuracy, "has_accuracy");
        *has_accuracy = c->r.accuracy ? 1 : 0;
        *accuracy = c->r.accuracy.value_or(0.0);
    });
}

wta_status wta_classification_write_csv(const wta_classification* c, const char* path)
{
    return guard([&] {
        require(c, "classification");
        require(path, "path");
        wta::write_classification_csv(c->r, c->table, path);
    });
}

void wta_kcl_stats(uint64_t* solves, double* max_relative_error)
{
    const auto s = wta::diagnostics::kcl_stats();
    if (solves)
        *solves = s.solves;
    if (max_relative_error)
        *max_relative_error = s.max_relative_error;
}

void wta_kcl_stats_reset(void)
{
    wta::diagnostics::reset_kcl_stats();
}

} // extern "C"
