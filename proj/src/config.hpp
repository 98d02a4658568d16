#pragma once

#include "apps.hpp"
#include "dynamics.hpp"
#include "network.hpp"
#include "variation.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace wta {

struct CornerSettings {
    CornerSet set;
    CornerModel model;
    CornerScenario scenario;
    std::size_t histogram_bins = 10;

    bool operator==(const CornerSettings&) const = default;
};

struct PowerSettings {
    double toggle_rate = 0.0;          // Hz
    std::size_t toggling_outputs = 0;

    bool operator==(const PowerSettings&) const = default;
};

// Two-cell resolution measurement. The reference is i_m_ratio * g * I_c
// unless network.i_m is set explicitly.
struct ResolutionSettings {
    double i_m_ratio = 0.5257;
    double fixed_v = 0.6;   // V, level of the fixed cell

    bool operator==(const ResolutionSettings&) const = default;
};

struct SimConfig {
    NetworkConfig network;
    TransientConfig transient;
    CornerSettings corners;
    MonteCarloSettings monte_carlo;
    ClassifySettings classify;
    PowerSettings power;
    ResolutionSettings resolution;

    bool operator==(const SimConfig&) const = default;
};

// INI-style text:
//
//   [network]
//   k_cells = 10
//   i_m = 0.5257e-6        ; list, one entry per cluster, or empty for the midpoint rule
//
// Sections: device, sizes, network, transient, corners, monte-carlo,
// classify, power, resolution. Unknown sections or keys are rejected, and every error
// names the offending key path ("network.i_c").
SimConfig default_config();
SimConfig parse_config(std::string_view text, const std::string& source = "<memory>");
SimConfig load_config(const std::string& path);

// Applies one "section.key" = value override, as the CLI --set flag does.
// The result is not validated; call validate().
void set_config_value(SimConfig& cfg, const std::string& key_path, const std::string& value);
std::string get_config_value(const SimConfig& cfg, const std::string& key_path);

void validate(const SimConfig& cfg);

// Every key with its current value; parse_config(to_config_text(c)) == c.
std::string to_config_text(const SimConfig& cfg);

// Every accepted key path, in documentation order.
std::vector<std::string> config_keys();

// Explicit path if given, otherwise $WTA_CONFIG, otherwise empty (defaults).
std::string resolve_config_path(const std::string& explicit_path);

} // namespace wta
