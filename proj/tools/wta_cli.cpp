// Command-line front end for the winner-take-all simulator.

#include <wta/wta.h>

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

namespace {

struct Failure {
    wta_status status;
    std::string message;
};

void check(wta_status s)
{
    if (s != WTA_OK)
        throw Failure{s, wta_last_error()};
}

template <class T>
using Handle = std::unique_ptr<T, void (*)(T*)>;

struct Common {
    std::string config;
    std::vector<std::string> overrides;
};

Handle<wta_config> load_config(const Common& common)
{
    std::string path = common.config;
    if (path.empty())
        if (const char* env = std::getenv("WTA_CONFIG"))
            path = env;
    wta_config* raw = nullptr;
    check(path.empty() ? wta_config_new(&raw) : wta_config_load(path.c_str(), &raw));
    Handle<wta_config> cfg(raw, wta_config_free);
    for (const auto& kv : common.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw Failure{WTA_ERR_CONFIG, "--set expects key=value, got '" + kv + "'"};
        check(wta_config_set(cfg.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
    }
    check(wta_config_validate(cfg.get()));
    return cfg;
}

std::string get(const wta_config* cfg, const char* key)
{
    size_t needed = 0;
    wta_config_get(cfg, key, nullptr, 0, &needed);
    std::string out(needed, '\0');
    check(wta_config_get(cfg, key, out.data(), out.size(), &needed));
    out.resize(needed - 1);
    return out;
}

double get_number(const wta_config* cfg, const char* key)
{
    return std::strtod(get(cfg, key).c_str(), nullptr);
}

std::vector<double> load_inputs(const std::string& path)
{
    size_t n = 0;
    check(wta_load_inputs(path.c_str(), nullptr, 0, &n));
    std::vector<double> v(n);
    check(wta_load_inputs(path.c_str(), v.data(), v.size(), &n));
    return v;
}

// Inputs file if given, else k_cells cells at `level`.
std::vector<double> inputs_or(const std::string& path, const wta_config* cfg, double level)
{
    if (!path.empty())
        return load_inputs(path);
    return std::vector<double>(static_cast<size_t>(get_number(cfg, "network.k_cells")), level);
}

std::string join(const std::vector<size_t>& v)
{
    std::string out;
    for (size_t i = 0; i < v.size(); ++i)
        out += (i ? "," : "") + std::to_string(v[i]);
    return out.empty() ? "none" : out;
}

void print_metric(const char* name, const wta_metric_summary& m)
{
    std::printf(" %s_mean=%.6g %s_std=%.6g %s_max=%.6g", name, m.mean, name, m.stddev, name, m.max);
    if (m.argmax[0])
        std::printf(" %s_argmax=%s", name, m.argmax);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Behavioral simulator for a voltage-mode winner-take-all circuit"};
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", std::string(wta_version()));

    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config, "Config file (default: $WTA_CONFIG, else built-in defaults)");
        sub->add_option("--set", common.overrides, "Override one key, section.key=value (repeatable)");
    };

    std::string inputs, out_down;
    std::string out_winners, out_sweep, out_trace, out_up, out_corners, out_mc, out_image, out_classify;
    size_t sweep_cell = 1, hyst_cell = 1, sweep_points = 1201, hyst_points = 12001, stride = 1;
    double v_from = 0.0, v_to = -1.0;
    bool down = false;

    auto* winners = app.add_subcommand("winners", "DC operating point and winner set");
    add_common(winners);
    winners->add_option("--inputs", inputs, "CSV with a v_in_V column")->required();
    winners->add_option("--out", out_winners, "Operating-point CSV")->default_val("op_point.csv");

    auto* sweep = app.add_subcommand("dc-sweep", "Sweep one input, record every output");
    add_common(sweep);
    sweep->add_option("--inputs", inputs, "CSV with a v_in_V column")->required();
    sweep->add_option("--cell", sweep_cell, "Swept cell")->default_val(1);
    sweep->add_option("--from", v_from, "Start voltage")->default_val(0.0);
    sweep->add_option("--to", v_to, "End voltage (default: vdd)");
    sweep->add_option("--points", sweep_points, "Sweep points")->default_val(1201);
    sweep->add_flag("--down", down, "Sweep downwards");
    sweep->add_option("--out", out_sweep, "Sweep CSV")->default_val("sweep.csv");

    double pulse_delay = 5e-9, pulse_rise = 0.1e-9, pulse_width = 150e-9, pulse_period = 300e-9;
    long pulse_cell = -1;
    auto* transient = app.add_subcommand("transient", "Time-domain run with an optional pulsed cell");
    add_common(transient);
    transient->add_option("--inputs", inputs, "CSV with a v_in_V column (DC levels)")->required();
    transient->add_option("--pulse-cell", pulse_cell, "Cell driven by a 0 -> vdd pulse");
    transient->add_option("--pulse-delay", pulse_delay, "Pulse delay, s")->default_val(5e-9);
    transient->add_option("--pulse-rise", pulse_rise, "Pulse rise and fall time, s")->default_val(0.1e-9);
    transient->add_option("--pulse-width", pulse_width, "Pulse width, s")->default_val(150e-9);
    transient->add_option("--pulse-period", pulse_period, "Pulse period, s")->default_val(300e-9);
    transient->add_option("--stride", stride, "Record every n-th step")->default_val(1);
    transient->add_option("--out", out_trace, "Trace CSV")->default_val("trace.csv");

    double fixed_v = -1.0;
    auto* resolution = app.add_subcommand("resolution", "Two-cell input resolution");
    add_common(resolution);
    resolution->add_option("--fixed", fixed_v, "Fixed cell level, V (default: resolution.fixed_v)");

    auto* hysteresis = app.add_subcommand("hysteresis", "Up/down sweep loop width");
    add_common(hysteresis);
    hysteresis->add_option("--inputs", inputs, "CSV with a v_in_V column (default: every cell at 0.6 V)");
    hysteresis->add_option("--cell", hyst_cell, "Swept cell")->default_val(1);
    hysteresis->add_option("--from", v_from, "Sweep low end")->default_val(0.0);
    hysteresis->add_option("--to", v_to, "Sweep high end (default: vdd)");
    hysteresis->add_option("--points", hyst_points, "Sweep points")->default_val(12001);
    hysteresis->add_option("--out-up", out_up, "Up-sweep CSV");
    hysteresis->add_option("--out-down", out_down, "Down-sweep CSV");

    auto* power = app.add_subcommand("power", "Static and dynamic power at the DC point");
    add_common(power);
    power->add_option("--inputs", inputs, "CSV with a v_in_V column")->required();

    auto* corners = app.add_subcommand("corners", "PVT corner sweep");
    add_common(corners);
    corners->add_option("--out", out_corners, "Report directory")->default_val("report");

    auto* mc = app.add_subcommand("monte-carlo", "Mismatch Monte Carlo");
    add_common(mc);
    mc->add_option("--inputs", inputs, "CSV with a v_in_V column (nominal levels)")->required();
    mc->add_option("--out", out_mc, "Report directory")->default_val("report");

    std::string image_in, path_name = "circuit";
    int threshold = 128;
    bool ascii = false;
    auto* binarize = app.add_subcommand("binarize", "Threshold a PGM image");
    add_common(binarize);
    binarize->add_option("--in", image_in, "Input PGM (P2 or P5)")->required();
    binarize->add_option("--threshold", threshold, "Intensity threshold")->check(CLI::Range(0, 255))->default_val(128);
    binarize->add_option("--out", out_image, "Output PGM")->required();
    binarize->add_option("--path", path_name, "circuit or direct")
        ->check(CLI::IsMember({"circuit", "direct"}))
        ->default_val("circuit");
    binarize->add_flag("--ascii", ascii, "Write P2 instead of P5");

    std::string activations;
    double period = 0.0;
    auto* classify = app.add_subcommand("classify", "Winner trace over an activation table");
    add_common(classify);
    classify->add_option("--activations", activations, "CSV score_0..score_{k-1}[,label]")->required();
    classify->add_option("--period", period, "Sample period, s (default: classify.sample_period)");
    classify->add_option("--out", out_classify, "Result CSV")->default_val("classification.csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "error code=usage message=\"%s\"\n", e.what());
        return 2;
    }

    try {
        const auto cfg = load_config(common);
        const wta_config* c = cfg.get();
        const double vdd = get_number(c, "network.vdd");
        if (v_to < 0)
            v_to = vdd;

        if (winners->parsed()) {
            const auto v = load_inputs(inputs);
            wta_op_point* raw = nullptr;
            check(wta_solve_dc(c, v.data(), v.size(), &raw));
            Handle<wta_op_point> op(raw, wta_op_point_free);
            std::vector<size_t> w(wta_op_point_winner_count(op.get()));
            wta_op_point_winners(op.get(), w.data(), w.size());
            check(wta_op_point_write_csv(op.get(), out_winners.c_str()));
            std::printf("winners=%s v_common=%.6g out=%s\n", join(w).c_str(), wta_op_point_common_node(op.get()),
                        out_winners.c_str());
        } else if (sweep->parsed()) {
            const auto v = load_inputs(inputs);
            wta_sweep* raw = nullptr;
            check(wta_dc_sweep(c, v.data(), v.size(), sweep_cell, v_from, v_to, sweep_points, down ? WTA_SWEEP_DOWN : WTA_SWEEP_UP,
                               &raw));
            Handle<wta_sweep> s(raw, wta_sweep_free);
            check(wta_sweep_write_csv(s.get(), out_sweep.c_str()));
            double flip = 0;
            int found = 0;
            check(wta_sweep_flip(s.get(), down ? 0 : 1, &flip, &found));
            if (found)
                std::printf("points=%zu flip_V=%.6g out=%s\n", wta_sweep_point_count(s.get()), flip, out_sweep.c_str());
            else
                std::printf("points=%zu flip_V=none out=%s\n", wta_sweep_point_count(s.get()), out_sweep.c_str());
        } else if (transient->parsed()) {
            const auto v = load_inputs(inputs);
            wta_stimuli* raw = nullptr;
            check(wta_stimuli_new(v.size(), &raw));
            Handle<wta_stimuli> stim(raw, wta_stimuli_free);
            for (size_t i = 0; i < v.size(); ++i)
                check(wta_stimuli_set_dc(stim.get(), i, v[i]));
            if (pulse_cell >= 0)
                check(wta_stimuli_set_pulse(stim.get(), static_cast<size_t>(pulse_cell), 0.0, vdd, pulse_delay,
                                            pulse_rise, pulse_rise, pulse_width, pulse_period));
            wta_trace* traw = nullptr;
            check(wta_transient(c, stim.get(), stride, nullptr, 0, &traw));
            Handle<wta_trace> trace(traw, wta_trace_free);
            check(wta_trace_write_csv(trace.get(), out_trace.c_str()));
            std::printf("samples=%zu", wta_trace_sample_count(trace.get()));
            if (pulse_cell >= 0) {
                wta_latency lat{};
                check(wta_trace_latency(trace.get(), pulse_delay, &lat));
                std::printf(" winner=%zu latency_s=%.6g internal_s=%.6g slew_s=%.6g settle_s=%.6g", lat.cell,
                            lat.total, lat.internal, lat.slew, lat.settle);
            }
            std::printf(" out=%s\n", out_trace.c_str());
        } else if (resolution->parsed()) {
            if (fixed_v < 0)
                fixed_v = get_number(c, "resolution.fixed_v");
            wta_resolution_result r{};
            check(wta_resolution(c, fixed_v, &r));
            std::printf("resolution_V=%.6g closed_form_V=%.6g kwta_bound_V=%.6g%s\n", r.measured, r.closed_form,
                        r.kwta_bound, r.at_or_below_balance ? " at_or_below_balance=1" : "");
        } else if (hysteresis->parsed()) {
            const auto v = inputs_or(inputs, c, 0.6);
            wta_hysteresis_result h{};
            check(wta_hysteresis(c, v.data(), v.size(), hyst_cell, v_from, v_to, hyst_points, out_up.empty() ? nullptr : out_up.c_str(),
                                 out_down.empty() ? nullptr : out_down.c_str(), &h));
            std::printf("width_V=%.6g expected_V=%.6g flip_up_V=%.6g flip_down_V=%.6g\n", h.width, h.expected_width,
                        h.v_flip_up, h.v_flip_down);
        } else if (power->parsed()) {
            const auto v = load_inputs(inputs);
            wta_power_breakdown p{};
            check(wta_power(c, v.data(), v.size(), &p));
            std::printf("total_W=%.6g static_W=%.6g dynamic_W=%.6g losing_share=%.6g\n", p.total_w, p.static_w,
                        p.dynamic_w, p.losing_share);
        } else if (corners->parsed() || mc->parsed()) {
            wta_report* raw = nullptr;
            if (corners->parsed()) {
                check(wta_corners(c, &raw));
            } else {
                const auto v = load_inputs(inputs);
                check(wta_monte_carlo(c, v.data(), v.size(), &raw));
            }
            Handle<wta_report> report(raw, wta_report_free);
            const std::string& out = corners->parsed() ? out_corners : out_mc;
            const auto bins = static_cast<size_t>(get_number(c, "corners.histogram_bins"));
            check(wta_report_write(report.get(), out.c_str(), bins));
            wta_metric_summary pw{}, lat{};
            check(wta_report_power(report.get(), &pw));
            check(wta_report_latency(report.get(), &lat));
            std::printf("rows=%zu failed=%zu", wta_report_row_count(report.get()), wta_report_failed_count(report.get()));
            print_metric("power_W", pw);
            print_metric("latency_s", lat);
            double rate = 0;
            int has_rate = 0;
            check(wta_report_flip_rate(report.get(), &rate, &has_rate));
            if (has_rate)
                std::printf(" flip_rate=%.6g", rate);
            std::printf(" out=%s\n", out.c_str());
        } else if (binarize->parsed()) {
            wta_image* raw = nullptr;
            check(wta_image_load(image_in.c_str(), &raw));
            Handle<wta_image> img(raw, wta_image_free);
            wta_image* braw = nullptr;
            check(wta_binarize(c, img.get(), static_cast<uint8_t>(threshold),
                               path_name == "direct" ? WTA_BINARIZE_DIRECT : WTA_BINARIZE_CIRCUIT, &braw));
            Handle<wta_image> result(braw, wta_image_free);
            check(wta_image_save(result.get(), out_image.c_str(), ascii ? 0 : 1));
            const uint8_t* px = wta_image_pixels(result.get());
            const size_t n = wta_image_width(result.get()) * wta_image_height(result.get());
            size_t white = 0;
            for (size_t i = 0; i < n; ++i)
                white += px[i] == 255;
            std::printf("width=%zu height=%zu white=%zu out=%s\n", wta_image_width(result.get()),
                        wta_image_height(result.get()), white, out_image.c_str());
        } else if (classify->parsed()) {
            wta_activations* araw = nullptr;
            check(wta_activations_load(activations.c_str(), period, c, &araw));
            Handle<wta_activations> table(araw, wta_activations_free);
            wta_classification* craw = nullptr;
            check(wta_classify(c, table.get(), &craw));
            Handle<wta_classification> result(craw, wta_classification_free);
            check(wta_classification_write_csv(result.get(), out_classify.c_str()));
            double accuracy = 0;
            int has_accuracy = 0;
            check(wta_classification_accuracy(result.get(), &accuracy, &has_accuracy));
            std::printf("samples=%zu ambiguous=%zu resolution_V=%.6g", wta_classification_count(result.get()),
                        wta_classification_ambiguous_count(result.get()), wta_classification_resolution(result.get()));
            if (has_accuracy)
                std::printf(" accuracy=%.6g", accuracy);
            std::printf(" out=%s\n", out_classify.c_str());
        }
    } catch (const Failure& f) {
        std::string msg;
        for (char ch : f.message) {
            if (ch == '"' || ch == '\\')
                msg += '\\';
            msg += ch == '\n' ? ' ' : ch;
        }
        std::fprintf(stderr, "error code=%s message=\"%s\"\n", wta_status_name(f.status), msg.c_str());
        return 1;
    }
    return 0;
}
