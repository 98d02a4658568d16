#pragma once

#include "dynamics.hpp"
#include "network.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wta {

struct Activity {
    double toggle_rate = 0.0;       // Hz, full output cycles per second
    double c_load = 1e-12;          // F
    std::size_t toggling_outputs = 0;
};

struct PowerBreakdown {
    double static_w = 0.0;
    double dynamic_w = 0.0;
    double total_w = 0.0;
    double losing_w = 0.0;          // vdd (1 + g) I over losing branches
    double losing_share = 0.0;      // losing_w / total_w
};

// Static: vdd (sum I + sum g I + sum of cluster references); dynamic: n C vdd^2 f.
PowerBreakdown estimate_power(const OperatingPoint& op, const NetworkConfig& cfg, const Activity& activity);

enum class Process { FF, FS, SF, SS, TT };

std::string to_string(Process p);
Process parse_process(const std::string& label); // ConfigError on unknown labels

struct CornerSpec {
    Process process = Process::TT;
    double supply = 1.2;        // V
    double temperature_c = 27;  // degC

    std::string label() const;
    bool operator==(const CornerSpec&) const = default;
};

struct ProcessShift {
    double current_mult = 1.0;
    double vth_shift = 0.0; // V

    bool operator==(const ProcessShift&) const = default;
};

// Default shifts are nominal 65 nm-class values; every entry is configurable.
struct CornerModel {
    ProcessShift fast{1.3, -0.030};
    ProcessShift slow{0.7, +0.030};
    ProcessShift typical{1.0, 0.0};
    double vth_tempco = -1e-3;          // V/degC
    double reference_c = 27.0;          // degC at which the device card is specified
    double nominal_vdd = 1.2;           // V, supply the buffer drive is specified at
    double mobility_exponent = -1.5;    // buffer drive ~ (T/T_ref)^exponent

    bool operator==(const CornerModel&) const = default;
};

struct CornerSet {
    std::vector<Process> processes{Process::FF, Process::FS, Process::SF, Process::SS, Process::TT};
    std::vector<double> supplies{1.32, 1.2, 1.02};
    std::vector<double> temperatures_c{100, 27, 0};

    bool operator==(const CornerSet&) const = default;
};

std::vector<CornerSpec> enumerate_corners(const CornerSet& set);

// Input-device card at the corner: temperature (absolute, degC + 273.15),
// V_th shifted by the process and the tempco, and I_o rescaled so that the
// V_th shift shows up in the subthreshold current. The first process letter
// is the NMOS (branch) setting.
DeviceParams apply_corner(const DeviceParams& p, const CornerSpec& c, const CornerModel& m = {});

struct CornerConditions {
    NetworkConfig network;
    TransientConfig transient;
    double bias_scale = 1.0;    // applied to I_c and I_m
    double drive_scale = 1.0;   // applied to i_buf
};

// Whole-circuit view of a corner: supply replaces vdd; bias sources (saturated
// NMOS at the comparator overdrive) scale with the NMOS setting; the output
// buffer drive follows the second (PMOS) letter, its overdrive at the new
// supply and a mobility temperature law; the comparator pole follows the bias.
CornerConditions apply_corner(const NetworkConfig& cfg, const TransientConfig& tcfg, const CornerSpec& c,
                              const CornerModel& m = {});

struct SampleRecord {
    std::string label;
    bool ok = true;
    std::string error;
    double power_w = 0.0;
    double latency_s = 0.0;
    double slew_s = 0.0;
    bool winner_flipped = false;
};

struct MetricSummary {
    std::size_t count = 0;
    double mean = 0.0;
    double stddev = 0.0; // sample (n - 1) standard deviation
    double min = 0.0;
    double max = 0.0;
    std::string argmax;

    bool operator==(const MetricSummary&) const = default;
};

// Welford accumulation over the successful rows.
MetricSummary summarize(std::span<const SampleRecord> rows, double SampleRecord::*metric);

struct VariationReport {
    std::string kind; // "corners" or "monte-carlo"
    std::vector<SampleRecord> rows;
    MetricSummary power;
    MetricSummary latency;
    std::optional<double> flip_rate;
    std::vector<std::string> warnings;
};

// Pulse scenario run at every corner: all cells at base_input, one cell pulsed
// from 0 to the corner supply. Power is taken with the pulse high.
struct CornerScenario {
    double base_input = 0.6;
    std::size_t pulsed_cell = 0;
    double pulse_delay = 5e-9;
    double pulse_rise = 0.1e-9;
    double pulse_width = 150e-9;
    double pulse_period = 300e-9;
    double window = 60e-9;          // simulated time after the edge
    double toggle_rate = 0.5e6;     // one toggling output per cluster

    bool operator==(const CornerScenario&) const = default;
};

VariationReport corner_sweep(const NetworkConfig& cfg, const TransientConfig& tcfg, const CornerSet& set,
                             const CornerModel& model = {}, const CornerScenario& scenario = {});

struct MonteCarloSettings {
    std::size_t samples = 200;
    double sigma_vth = 0.01;    // V
    double sigma_wl = 0.05;     // relative
    std::uint64_t seed = 1;
    bool latency = true;
    double edge_time = 1e-9;
    double window = 40e-9;

    bool operator==(const MonteCarloSettings&) const = default;
};

// Per-cell mismatch drawn from a counter-based generator keyed on
// (seed, sample, cell); a sample's draws do not depend on anything else.
DeviceParams perturb_device(const DeviceParams& p, double dv_th, double dwl_rel);

VariationReport monte_carlo(std::span<const CellState> cells, const NetworkConfig& cfg, const TransientConfig& tcfg,
                            const MonteCarloSettings& settings, const Activity& activity = {});

struct Histogram {
    double lower = 0.0;
    double upper = 0.0;
    std::vector<std::size_t> counts;
};

Histogram histogram(std::span<const double> values, std::size_t bins);

void write_report_csv(const VariationReport& report, const std::string& path);
void write_summary_json(const VariationReport& report, const std::string& path);
void write_histogram_csv(const VariationReport& report, const std::string& path, std::size_t bins);

// Writes <dir>/<kind>.csv, <dir>/summary.json and <dir>/histogram.csv.
void write_report_files(const VariationReport& report, const std::string& dir, std::size_t bins);

} // namespace wta
