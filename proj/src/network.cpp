#include "network.hpp"

#include "errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>

namespace wta {

namespace {

std::atomic<std::uint64_t> g_kcl_solves{0};
std::atomic<double> g_kcl_max_error{0.0};

void record_kcl(double relative_error)
{
    g_kcl_solves.fetch_add(1, std::memory_order_relaxed);
    double seen = g_kcl_max_error.load(std::memory_order_relaxed);
    while (relative_error > seen
           && !g_kcl_max_error.compare_exchange_weak(seen, relative_error, std::memory_order_relaxed)) {
    }
}

// Per-branch parameters of ln I_i = log_prefactor + (v_i - V_c) / slope.
struct BranchTerms {
    std::vector<double> log_prefactor;
    std::vector<double> slope;
};

BranchTerms branch_terms(std::size_t k, const NetworkConfig& cfg)
{
    BranchTerms t;
    t.log_prefactor.resize(k);
    t.slope.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        const DeviceParams& p = cfg.device_for(i);
        t.log_prefactor[i] = std::log(p.i_zero * p.w_over_l);
        t.slope[i] = slope_voltage(p);
    }
    return t;
}

// Returns F(V_c) = ln(sum_i I_i(V_c)) - ln I_c and dF/dV_c.
std::pair<double, double> kcl_residual(std::span<const double> v, const BranchTerms& t, double v_c,
                                       double log_ic)
{
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v.size(); ++i)
        peak = std::max(peak, t.log_prefactor[i] + (v[i] - v_c) / t.slope[i]);
    double sum = 0.0;
    double weighted = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double w = std::exp(t.log_prefactor[i] + (v[i] - v_c) / t.slope[i] - peak);
        sum += w;
        weighted += w / t.slope[i];
    }
    return {peak + std::log(sum) - log_ic, -weighted / sum};
}

double root_find_common_node(std::span<const double> v, const NetworkConfig& cfg)
{
    const BranchTerms t = branch_terms(v.size(), cfg);
    const double log_ic = std::log(cfg.i_c);
    const double log_share = std::log(cfg.i_c / static_cast<double>(v.size()));

    // lo: some branch alone carries I_c (F >= 0). hi: every branch carries at most I_c/k (F <= 0).
    double lo = -std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v.size(); ++i) {
        lo = std::max(lo, v[i] + t.slope[i] * (t.log_prefactor[i] - log_ic));
        hi = std::max(hi, v[i] + t.slope[i] * (t.log_prefactor[i] - log_share));
    }

    constexpr int max_iterations = 200;
    constexpr double residual_tolerance = 1e-15;
    double x = lo;
    double residual = 0.0;
    for (int it = 0; it < max_iterations; ++it) {
        const auto [f, df] = kcl_residual(v, t, x, log_ic);
        residual = f;
        if (std::abs(f) <= residual_tolerance)
            return x;
        if (f > 0)
            lo = x;
        else
            hi = x;
        if (hi - lo <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)))
            return x;
        double next = x - f / df;
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        x = next;
    }
    throw SolverError("solve_common_node: no convergence after " + std::to_string(max_iterations)
                          + " iterations, residual ln(sum I / I_c) = " + std::to_string(residual),
                      residual);
}

double closed_form_common_node(std::span<const double> v, const NetworkConfig& cfg)
{
    const DeviceParams& p = cfg.device;
    const double s = slope_voltage(p);
    const double peak = *std::max_element(v.begin(), v.end());
    double sum = 0.0;
    for (double x : v)
        sum += std::exp((x - peak) / s);
    return s * (std::log(p.i_zero * p.w_over_l / cfg.i_c) + peak / s + std::log(sum));
}

void require_cells(std::size_t n)
{
    if (n < 2)
        throw DomainError("network needs at least 2 cells, got " + std::to_string(n));
}

} // namespace

std::size_t NetworkConfig::cluster_count() const
{
    return (k_cells + cluster_size - 1) / cluster_size;
}

const DeviceParams& NetworkConfig::device_for(std::size_t cell) const
{
    return cell_devices.empty() ? device : cell_devices.at(cell);
}

void validate(const NetworkConfig& cfg)
{
    if (cfg.k_cells < 2)
        throw ConfigError("network.k_cells must be >= 2");
    if (cfg.cluster_size < 1)
        throw ConfigError("network.cluster_size must be >= 1");
    if (!(cfg.i_c > 0))
        throw ConfigError("network.i_c must be > 0");
    if (cfg.delta_winners < 1 || cfg.delta_winners > cfg.k_cells)
        throw ConfigError("network.delta_winners must be in [1, k_cells]");
    if (!(cfg.vdd > 0))
        throw ConfigError("network.vdd must be > 0");
    validate(cfg.device);
    validate(cfg.sizes);
    if (!cfg.cell_devices.empty()) {
        if (cfg.cell_devices.size() != cfg.k_cells)
            throw ConfigError("network.cell_devices must have k_cells entries");
        for (const auto& d : cfg.cell_devices)
            validate(d);
    }
    if (!cfg.i_m.empty() && cfg.i_m.size() != 1 && cfg.i_m.size() != cfg.cluster_count())
        throw ConfigError("network.i_m must have 1 or cluster_count ("
                          + std::to_string(cfg.cluster_count()) + ") entries");
    const double ceiling = cfg.device.mirror_gain * cfg.i_c;
    for (double i_m : cfg.i_m)
        if (!(i_m > 0 && i_m < ceiling))
            throw ConfigError("network.i_m must satisfy 0 < i_m < mirror_gain * i_c");
}

std::vector<double> reference_currents(const NetworkConfig& cfg)
{
    const std::size_t n = cfg.cluster_count();
    if (cfg.i_m.empty())
        return std::vector<double>(n, select_reference(cfg.i_c, cfg.delta_winners, cfg.device.mirror_gain));
    if (cfg.i_m.size() == 1)
        return std::vector<double>(n, cfg.i_m.front());
    return cfg.i_m;
}

std::vector<CellState> make_cells(std::span<const double> v_in)
{
    std::vector<CellState> cells;
    cells.reserve(v_in.size());
    for (double v : v_in)
        cells.push_back({v, false});
    return cells;
}

bool OperatingPoint::is_winner(std::size_t cell) const
{
    return std::binary_search(winners.begin(), winners.end(), cell);
}

double feedback_boost(const DeviceParams& p, const TransistorSizes& sizes)
{
    return slope_voltage(p) * std::log1p(feedback_ratio(sizes));
}

std::vector<double> effective_inputs(std::span<const CellState> cells, const NetworkConfig& cfg)
{
    std::vector<double> v(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        v[i] = cells[i].v_in;
        if (cfg.feedback_enabled && cells[i].won_last)
            v[i] += feedback_boost(cfg.device_for(i), cfg.sizes);
    }
    return v;
}

double solve_common_node(std::span<const double> v_eff, const NetworkConfig& cfg, NodeMethod method)
{
    require_cells(v_eff.size());
    if (method == NodeMethod::Automatic)
        method = cfg.homogeneous() ? NodeMethod::ClosedForm : NodeMethod::RootFind;
    if (method == NodeMethod::ClosedForm) {
        if (!cfg.homogeneous())
            throw DomainError("solve_common_node: closed form requires identical devices");
        return closed_form_common_node(v_eff, cfg);
    }
    return root_find_common_node(v_eff, cfg);
}

std::vector<double> branch_currents(std::span<const double> v_eff, const NetworkConfig& cfg)
{
    require_cells(v_eff.size());
    std::vector<double> currents(v_eff.size());
    if (cfg.homogeneous()) {
        const double s = slope_voltage(cfg.device);
        const double peak = *std::max_element(v_eff.begin(), v_eff.end());
        double sum = 0.0;
        for (std::size_t i = 0; i < v_eff.size(); ++i) {
            currents[i] = std::exp((v_eff[i] - peak) / s);
            sum += currents[i];
        }
        for (double& c : currents)
            c = cfg.i_c * (c / sum);
        return currents;
    }
    const double v_c = root_find_common_node(v_eff, cfg);
    for (std::size_t i = 0; i < v_eff.size(); ++i)
        currents[i] = subthreshold_current_clamped(cfg.device_for(i), v_eff[i] - v_c).value;
    return currents;
}

double comparator_voltage_raw(double i_branch, const DeviceParams& p)
{
    if (!(p.overdrive > 0))
        throw DomainError("comparator_voltage: overdrive V_GS4 - V_th4 must be > 0");
    if (!(p.lambda_clm > 0) || !(p.beta > 0))
        throw DomainError("comparator_voltage: lambda_clm and beta must be > 0");
    const double balance = p.beta * p.overdrive * p.overdrive;
    return (2.0 * p.mirror_gain * i_branch / balance - 1.0) / p.lambda_clm;
}

double comparator_voltage(double i_branch, const DeviceParams& p, double vdd)
{
    return std::clamp(comparator_voltage_raw(i_branch, p), 0.0, vdd);
}

ReferenceBand reference_band(double i_c, std::size_t delta, double gain)
{
    if (delta == 0)
        throw DomainError("select_reference: delta must be >= 1");
    if (!(i_c > 0))
        throw DomainError("select_reference: i_c must be > 0");
    const double share = gain * i_c / static_cast<double>(delta);
    return {0.5 * share, share};
}

double select_reference(double i_c, std::size_t delta, double gain)
{
    const ReferenceBand band = reference_band(i_c, delta, gain);
    return 0.5 * (band.low + band.high);
}

DcSolution solve_dc(std::span<const CellState> cells, const NetworkConfig& cfg)
{
    require_cells(cells.size());
    const double rail_low = cfg.dual_rail ? -cfg.vdd : 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (!(cells[i].v_in >= rail_low && cells[i].v_in <= cfg.vdd))
            throw DomainError("solve_dc: cell " + std::to_string(i) + " input " + std::to_string(cells[i].v_in)
                              + " V outside rails [" + std::to_string(rail_low) + ", "
                              + std::to_string(cfg.vdd) + "]");
    }

    if (cells.size() != cfg.k_cells)
        throw DomainError("solve_dc: " + std::to_string(cells.size()) + " cells given, network has "
                          + std::to_string(cfg.k_cells));
    const std::vector<double> refs = reference_currents(cfg);
    const std::vector<double> v_eff = effective_inputs(cells, cfg);

    DcSolution out;
    OperatingPoint& op = out.op;
    op.v_common = solve_common_node(v_eff, cfg);
    if (cfg.homogeneous()) {
        op.branch_currents = branch_currents(v_eff, cfg);
    } else {
        op.branch_currents.resize(cells.size());
        for (std::size_t i = 0; i < cells.size(); ++i)
            op.branch_currents[i] = subthreshold_current_clamped(cfg.device_for(i), v_eff[i] - op.v_common).value;
    }
    op.v_x.resize(cells.size());
    op.outputs.assign(cells.size(), 0.0);
    out.cells.assign(cells.begin(), cells.end());

    double total = 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const DeviceParams& p = cfg.device_for(i);
        const double current = op.branch_currents[i];
        total += current;
        op.v_x[i] = comparator_voltage(current, p, cfg.vdd);
        const bool won = p.mirror_gain * current > refs[cfg.cluster_of(i)];
        if (won) {
            op.winners.push_back(i);
            op.outputs[i] = cfg.vdd;
        }
        out.cells[i].won_last = won;
    }
    record_kcl(std::abs(total - cfg.i_c) / cfg.i_c);
    return out;
}

DcSolution settle_dc(std::span<const CellState> cells, const NetworkConfig& cfg, int max_iterations)
{
    DcSolution sol = solve_dc(cells, cfg);
    for (int it = 1; it < max_iterations; ++it) {
        DcSolution next = solve_dc(sol.cells, cfg);
        const bool stable = next.op.winners == sol.op.winners;
        sol = std::move(next);
        if (stable)
            break;
    }
    return sol;
}

double kwta_resolution_bound(std::size_t k, std::size_t delta, double i_m, double i_c, const DeviceParams& p)
{
    if (delta == 0 || delta >= k)
        throw DomainError("kwta_resolution_bound: need 1 <= delta < k");
    const double rho = i_m / (p.mirror_gain * i_c);
    if (!(rho * static_cast<double>(delta) < 1.0))
        throw DomainError("kwta_resolution_bound: i_m must be below mirror_gain * i_c / delta");
    const double gap = slope_voltage(p) * std::log(static_cast<double>(k - delta) * rho / (1.0 - rho * delta));
    return std::max(gap, 0.0);
}

namespace diagnostics {

KclStats kcl_stats()
{
    return {g_kcl_solves.load(), g_kcl_max_error.load()};
}

void reset_kcl_stats()
{
    g_kcl_solves.store(0);
    g_kcl_max_error.store(0.0);
}

} // namespace diagnostics

} // namespace wta
