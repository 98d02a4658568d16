#pragma once

#include "network.hpp"
#include "stimulus.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wta {

struct TransientConfig {
    double c_load = 1e-12;       // F per output
    double i_buf = 94.3e-6;      // A, buffer slew drive
    double tau_internal = 1e-9;  // s, comparator node pole
    double t_step = 10e-12;      // s
    double t_end = 100e-9;       // s

    bool operator==(const TransientConfig&) const = default;
};

void validate(const TransientConfig& t);

struct RecordOptions {
    std::size_t stride = 1;                 // keep every stride-th step
    std::vector<std::size_t> cells;         // empty: every cell
};

struct TransientTrace {
    double vdd = 0.0;
    std::vector<double> time;
    std::vector<std::size_t> cells;                 // recorded cell index per column
    std::vector<std::vector<double>> outputs;       // [column][sample]
    std::vector<std::vector<double>> v_x;           // internal comparator node, [column][sample]
    std::vector<std::vector<std::size_t>> winners;  // winner set per sample

    std::optional<std::size_t> column_of(std::size_t cell) const;
};

// Quasi-static transient. The run starts from the settled DC point of the
// t = 0 stimuli; each step re-solves the network, relaxes the comparator node
// toward its decision level (0 or vdd) through a single pole, and slews each
// buffered output at i_buf / c_load toward the rail its comparator selects.
TransientTrace run_transient(std::span<const CellState> cells, const NetworkConfig& cfg,
                             std::span<const Stimulus> stimuli, const TransientConfig& tcfg,
                             const RecordOptions& record = {});

struct LatencyMeasurement {
    std::size_t cell = 0;    // the new winner
    double total = 0.0;      // edge -> output crosses vdd/2 (rising)
    double internal = 0.0;   // edge -> comparator node crosses vdd/2
    double slew = 0.0;       // total - internal
    double settle = 0.0;     // edge -> output reaches vdd
};

LatencyMeasurement measure_latency(const TransientTrace& trace, double edge_time);

enum class SweepDirection { Up, Down };

struct SweepPoint {
    double v_in = 0.0;
    std::vector<double> outputs;
};

struct SweepCurve {
    std::size_t cell = 0;
    double vdd = 0.0;
    std::vector<SweepPoint> points;
    std::vector<CellState> final_cells;
};

// Steps `cell` through n_points values spanning [min(v_from, v_to), max(...)],
// ascending for Up and descending for Down, settling the network at each point
// with the previous point's winner memory.
SweepCurve dc_sweep(std::size_t cell, double v_from, double v_to, std::size_t n_points,
                    SweepDirection direction, std::span<const CellState> cells, const NetworkConfig& cfg);

// Input voltage (midpoint of the bracketing samples) where the swept cell's
// output crosses vdd/2 in the given sense, if it does.
std::optional<double> find_flip(const SweepCurve& curve, bool rising);

struct HysteresisSweep {
    std::size_t cell = 1;
    double v_from = 0.0;
    double v_to = 1.2;
    std::size_t n_points = 12001;
};

struct HysteresisLoop {
    double v_flip_up = 0.0;
    double v_flip_down = 0.0;
    double width = 0.0;
    SweepCurve up;
    SweepCurve down;
};

// Up sweep followed by a down sweep that inherits its state. With the
// reference at the balance point g I_c / 2 the loop is 2 n U_T ln(1 + r) wide.
HysteresisLoop measure_hysteresis(std::span<const CellState> cells, const NetworkConfig& cfg,
                                  const HysteresisSweep& sweep = {});

struct ResolutionResult {
    double resolution = 0.0;   // binary-search result, V
    double closed_form = 0.0;  // n U_T ln(I_m / (g I_c - I_m)), V (clipped at 0)
    bool at_or_below_balance = false; // I_m <= g I_c / 2: any positive gap wins
};

double resolution_closed_form(const NetworkConfig& cfg);

// Two-cell network without feedback: smallest gap above fixed_v that makes cell 1 win.
ResolutionResult measure_resolution(double fixed_v, const NetworkConfig& cfg, double tolerance = 1e-5);

void write_trace_csv(const TransientTrace& trace, const std::string& path);
void write_sweep_csv(const SweepCurve& curve, const std::string& path);
// Columns: cell, v_in_V, i_branch_A, v_x_V, out_V, winner.
void write_op_point_csv(const OperatingPoint& op, std::span<const CellState> cells, const std::string& path);

} // namespace wta
