#pragma once

#include "device_model.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace wta {

struct NetworkConfig {
    std::size_t k_cells = 2;
    std::size_t cluster_size = 50;
    double i_c = 1e-6;             // shared bias, A
    // Comparator reference per cluster. Empty: derived from delta_winners by
    // the midpoint rule. One entry: applied to every cluster.
    std::vector<double> i_m;
    std::size_t delta_winners = 1;
    double vdd = 1.2;
    DeviceParams device;
    TransistorSizes sizes;
    // Per-cell device cards (mismatch). Empty means every cell uses `device`.
    std::vector<DeviceParams> cell_devices;
    bool feedback_enabled = false;
    bool dual_rail = false;        // allows inputs down to -vdd

    std::size_t cluster_count() const;
    std::size_t cluster_of(std::size_t cell) const { return cell / cluster_size; }
    bool homogeneous() const { return cell_devices.empty(); }
    const DeviceParams& device_for(std::size_t cell) const;

    bool operator==(const NetworkConfig&) const = default;
};

void validate(const NetworkConfig& cfg);

// Resolved reference current of every cluster.
std::vector<double> reference_currents(const NetworkConfig& cfg);

struct CellState {
    double v_in = 0.0;
    bool won_last = false;

    bool operator==(const CellState&) const = default;
};

std::vector<CellState> make_cells(std::span<const double> v_in);

struct OperatingPoint {
    double v_common = 0.0;
    std::vector<double> branch_currents;
    std::vector<double> v_x;
    std::vector<std::size_t> winners; // ascending
    std::vector<double> outputs;

    bool is_winner(std::size_t cell) const;
};

struct DcSolution {
    OperatingPoint op;
    std::vector<CellState> cells; // won_last refreshed from the new winner set
};

enum class NodeMethod { Automatic, ClosedForm, RootFind };

// Input-referred strength added to previous winners: n U_T ln(1 + r).
double feedback_boost(const DeviceParams& p, const TransistorSizes& sizes);

std::vector<double> effective_inputs(std::span<const CellState> cells, const NetworkConfig& cfg);

// Shared node voltage where the branch currents sum to I_c. The closed form is
// only available for identical devices.
double solve_common_node(std::span<const double> v_eff, const NetworkConfig& cfg,
                         NodeMethod method = NodeMethod::Automatic);

// Branch currents, I_c * softmax(v / (n U_T)) for identical devices.
std::vector<double> branch_currents(std::span<const double> v_eff, const NetworkConfig& cfg);

// First-order comparator node voltage, no rail clamping.
double comparator_voltage_raw(double i_branch, const DeviceParams& p);
double comparator_voltage(double i_branch, const DeviceParams& p, double vdd);

struct ReferenceBand {
    double low;  // inclusive
    double high; // exclusive
};

ReferenceBand reference_band(double i_c, std::size_t delta, double gain);
double select_reference(double i_c, std::size_t delta, double gain);

DcSolution solve_dc(std::span<const CellState> cells, const NetworkConfig& cfg);

// Re-solves until the winner set stops changing (only matters with feedback).
DcSolution settle_dc(std::span<const CellState> cells, const NetworkConfig& cfg,
                     int max_iterations = 16);

// Minimum separation between a group of delta equal winners and the remaining
// k - delta cells (all at the same lower level) for exactly delta winners with
// reference i_m. Equals the two-cell resolution for k = 2, delta = 1. Zero if
// any gap suffices.
double kwta_resolution_bound(std::size_t k, std::size_t delta, double i_m, double i_c,
                             const DeviceParams& p);

namespace diagnostics {

struct KclStats {
    std::uint64_t solves = 0;
    double max_relative_error = 0.0;
};

// Every solve_dc records |sum(I) - I_c| / I_c here.
KclStats kcl_stats();
void reset_kcl_stats();

} // namespace diagnostics

} // namespace wta
