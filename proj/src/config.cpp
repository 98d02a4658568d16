#include "config.hpp"

#include "csv.hpp"
#include "errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace wta {

namespace {

std::string trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& value)
{
    std::vector<std::string> out;
    std::string_view rest = value;
    if (trim(rest).empty())
        return out;
    for (;;) {
        const auto comma = rest.find(',');
        out.push_back(trim(rest.substr(0, comma)));
        if (comma == std::string_view::npos)
            break;
        rest.remove_prefix(comma + 1);
    }
    return out;
}

std::string fmt(double v)
{
    // Shortest text that parses back to the same double.
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double to_double(const std::string& key, const std::string& value)
{
    try {
        return parse_number(value, key);
    } catch (const ParseError&) {
        throw ConfigError(key + ": expected a number, got '" + value + "'");
    }
}

std::uint64_t to_unsigned(const std::string& key, const std::string& value)
{
    std::uint64_t v = 0;
    const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || end != value.data() + value.size() || value.empty())
        throw ConfigError(key + ": expected a non-negative integer, got '" + value + "'");
    return v;
}

bool to_bool(const std::string& key, const std::string& value)
{
    std::string v = value;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "yes" || v == "on" || v == "1")
        return true;
    if (v == "false" || v == "no" || v == "off" || v == "0")
        return false;
    throw ConfigError(key + ": expected true or false, got '" + value + "'");
}

std::string join(const std::vector<std::string>& parts)
{
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i)
        out += (i ? ", " : "") + parts[i];
    return out;
}

struct Key {
    std::string path;
    std::function<void(SimConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const SimConfig&)> get;
};

template <class Access>
Key real(std::string path, Access access)
{
    return {std::move(path),
            [access](SimConfig& c, const std::string& k, const std::string& v) { access(c) = to_double(k, v); },
            [access](const SimConfig& c) { return fmt(access(const_cast<SimConfig&>(c))); }};
}

template <class Access>
Key count(std::string path, Access access)
{
    return {std::move(path),
            [access](SimConfig& c, const std::string& k, const std::string& v) {
                access(c) = static_cast<std::remove_reference_t<decltype(access(c))>>(to_unsigned(k, v));
            },
            [access](const SimConfig& c) { return std::to_string(access(const_cast<SimConfig&>(c))); }};
}

template <class Access>
Key flag(std::string path, Access access)
{
    return {std::move(path),
            [access](SimConfig& c, const std::string& k, const std::string& v) { access(c) = to_bool(k, v); },
            [access](const SimConfig& c) { return std::string(access(const_cast<SimConfig&>(c)) ? "true" : "false"); }};
}

template <class Access>
Key real_list(std::string path, Access access)
{
    return {std::move(path),
            [access](SimConfig& c, const std::string& k, const std::string& v) {
                std::vector<double> out;
                for (const auto& item : split_list(v))
                    out.push_back(to_double(k, item));
                access(c) = std::move(out);
            },
            [access](const SimConfig& c) {
                std::vector<std::string> parts;
                for (double d : access(const_cast<SimConfig&>(c)))
                    parts.push_back(fmt(d));
                return join(parts);
            }};
}

template <class Access>
Key geometry(std::string path, Access access)
{
    return {std::move(path),
            [access](SimConfig& c, const std::string& k, const std::string& v) {
                const auto slash = v.find('/');
                if (slash == std::string::npos)
                    throw ConfigError(k + ": expected W/L in nm, got '" + v + "'");
                access(c) = Geometry{to_double(k, trim(v.substr(0, slash))), to_double(k, trim(v.substr(slash + 1)))};
            },
            [access](const SimConfig& c) {
                const Geometry& g = access(const_cast<SimConfig&>(c));
                return fmt(g.width_nm) + "/" + fmt(g.length_nm);
            }};
}

Key optional_real(std::string path, std::optional<double> ClassifySettings::*member)
{
    return {std::move(path),
            [member](SimConfig& c, const std::string& k, const std::string& v) {
                if (v.empty() || v == "auto")
                    c.classify.*member = std::nullopt;
                else
                    c.classify.*member = to_double(k, v);
            },
            [member](const SimConfig& c) {
                const auto& o = c.classify.*member;
                return o ? fmt(*o) : std::string("auto");
            }};
}

Key processes(std::string path)
{
    return {std::move(path),
            [](SimConfig& c, const std::string& k, const std::string& v) {
                std::vector<Process> out;
                for (const auto& item : split_list(v)) {
                    try {
                        out.push_back(parse_process(item));
                    } catch (const ConfigError& e) {
                        throw ConfigError(k + ": " + e.what());
                    }
                }
                c.corners.set.processes = std::move(out);
            },
            [](const SimConfig& c) {
                std::vector<std::string> parts;
                for (Process p : c.corners.set.processes)
                    parts.push_back(to_string(p));
                return join(parts);
            }};
}

#define FIELD(expr) [](SimConfig& c) -> auto& { return c.expr; }

const std::vector<Key>& registry()
{
    static const std::vector<Key> keys = {
        real("device.i_zero", FIELD(network.device.i_zero)),
        real("device.w_over_l", FIELD(network.device.w_over_l)),
        real("device.n_slope", FIELD(network.device.n_slope)),
        real("device.temperature", FIELD(network.device.temperature)),
        real("device.v_th", FIELD(network.device.v_th)),
        real("device.lambda_clm", FIELD(network.device.lambda_clm)),
        real("device.beta", FIELD(network.device.beta)),
        real("device.mirror_gain", FIELD(network.device.mirror_gain)),
        real("device.overdrive", FIELD(network.device.overdrive)),

        geometry("sizes.m1", FIELD(network.sizes.m1)),
        geometry("sizes.m2", FIELD(network.sizes.m2)),
        geometry("sizes.m3", FIELD(network.sizes.m3)),
        geometry("sizes.m4", FIELD(network.sizes.m4)),
        geometry("sizes.mf", FIELD(network.sizes.mf)),

        count("network.k_cells", FIELD(network.k_cells)),
        count("network.cluster_size", FIELD(network.cluster_size)),
        real("network.i_c", FIELD(network.i_c)),
        real_list("network.i_m", FIELD(network.i_m)),
        count("network.delta_winners", FIELD(network.delta_winners)),
        real("network.vdd", FIELD(network.vdd)),
        flag("network.feedback", FIELD(network.feedback_enabled)),
        flag("network.dual_rail", FIELD(network.dual_rail)),

        real("transient.c_load", FIELD(transient.c_load)),
        real("transient.i_buf", FIELD(transient.i_buf)),
        real("transient.tau_internal", FIELD(transient.tau_internal)),
        real("transient.t_step", FIELD(transient.t_step)),
        real("transient.t_end", FIELD(transient.t_end)),

        processes("corners.processes"),
        real_list("corners.supplies", FIELD(corners.set.supplies)),
        real_list("corners.temperatures_c", FIELD(corners.set.temperatures_c)),
        real("corners.fast_current_mult", FIELD(corners.model.fast.current_mult)),
        real("corners.fast_vth_shift", FIELD(corners.model.fast.vth_shift)),
        real("corners.slow_current_mult", FIELD(corners.model.slow.current_mult)),
        real("corners.slow_vth_shift", FIELD(corners.model.slow.vth_shift)),
        real("corners.typical_current_mult", FIELD(corners.model.typical.current_mult)),
        real("corners.typical_vth_shift", FIELD(corners.model.typical.vth_shift)),
        real("corners.vth_tempco", FIELD(corners.model.vth_tempco)),
        real("corners.reference_c", FIELD(corners.model.reference_c)),
        real("corners.nominal_vdd", FIELD(corners.model.nominal_vdd)),
        real("corners.mobility_exponent", FIELD(corners.model.mobility_exponent)),
        real("corners.base_input", FIELD(corners.scenario.base_input)),
        count("corners.pulsed_cell", FIELD(corners.scenario.pulsed_cell)),
        real("corners.pulse_delay", FIELD(corners.scenario.pulse_delay)),
        real("corners.pulse_rise", FIELD(corners.scenario.pulse_rise)),
        real("corners.pulse_width", FIELD(corners.scenario.pulse_width)),
        real("corners.pulse_period", FIELD(corners.scenario.pulse_period)),
        real("corners.window", FIELD(corners.scenario.window)),
        real("corners.toggle_rate", FIELD(corners.scenario.toggle_rate)),
        count("corners.histogram_bins", FIELD(corners.histogram_bins)),

        count("monte-carlo.samples", FIELD(monte_carlo.samples)),
        real("monte-carlo.sigma_vth", FIELD(monte_carlo.sigma_vth)),
        real("monte-carlo.sigma_wl", FIELD(monte_carlo.sigma_wl)),
        count("monte-carlo.seed", FIELD(monte_carlo.seed)),
        flag("monte-carlo.latency", FIELD(monte_carlo.latency)),
        real("monte-carlo.edge_time", FIELD(monte_carlo.edge_time)),
        real("monte-carlo.window", FIELD(monte_carlo.window)),

        optional_real("classify.resolution", &ClassifySettings::resolution),
        real("classify.ramp_fraction", FIELD(classify.ramp_fraction)),
        real("classify.sample_period", FIELD(classify.sample_period)),

        real("power.toggle_rate", FIELD(power.toggle_rate)),
        count("power.toggling_outputs", FIELD(power.toggling_outputs)),

        real("resolution.i_m_ratio", FIELD(resolution.i_m_ratio)),
        real("resolution.fixed_v", FIELD(resolution.fixed_v)),
    };
    return keys;
}

#undef FIELD

const Key* find_key(const std::string& path)
{
    for (const auto& k : registry())
        if (k.path == path)
            return &k;
    return nullptr;
}

bool known_section(const std::string& name)
{
    const std::string prefix = name + ".";
    return std::any_of(registry().begin(), registry().end(),
                       [&](const Key& k) { return k.path.compare(0, prefix.size(), prefix) == 0; });
}

// Strips a trailing "; comment" or "# comment" from a value.
std::string strip_comment(const std::string& value)
{
    const auto pos = value.find_first_of(";#");
    return trim(pos == std::string::npos ? value : value.substr(0, pos));
}

} // namespace

SimConfig default_config()
{
    return SimConfig{};
}

void set_config_value(SimConfig& cfg, const std::string& key_path, const std::string& value)
{
    const Key* key = find_key(key_path);
    if (!key)
        throw ConfigError("unknown config key '" + key_path + "'");
    key->set(cfg, key_path, trim(value));
}

std::string get_config_value(const SimConfig& cfg, const std::string& key_path)
{
    const Key* key = find_key(key_path);
    if (!key)
        throw ConfigError("unknown config key '" + key_path + "'");
    return key->get(cfg);
}

void validate(const SimConfig& cfg)
{
    validate(cfg.network);
    validate(cfg.transient);

    const auto& set = cfg.corners.set;
    if (set.processes.empty())
        throw ConfigError("corners.processes must not be empty");
    if (set.supplies.empty())
        throw ConfigError("corners.supplies must not be empty");
    if (set.temperatures_c.empty())
        throw ConfigError("corners.temperatures_c must not be empty");
    for (double v : set.supplies)
        if (!(v > 0))
            throw ConfigError("corners.supplies entries must be > 0");
    for (double t : set.temperatures_c)
        if (!(t > -273.15))
            throw ConfigError("corners.temperatures_c entries must be above absolute zero");
    const auto& sc = cfg.corners.scenario;
    if (sc.pulsed_cell >= cfg.network.k_cells)
        throw ConfigError("corners.pulsed_cell must be < network.k_cells");
    if (!(sc.window > 0))
        throw ConfigError("corners.window must be > 0");
    if (!(sc.toggle_rate >= 0))
        throw ConfigError("corners.toggle_rate must be >= 0");
    if (cfg.corners.histogram_bins < 1)
        throw ConfigError("corners.histogram_bins must be >= 1");

    const auto& mc = cfg.monte_carlo;
    if (mc.samples < 1)
        throw ConfigError("monte-carlo.samples must be >= 1");
    if (!(mc.sigma_vth >= 0))
        throw ConfigError("monte-carlo.sigma_vth must be >= 0");
    if (!(mc.sigma_wl >= 0))
        throw ConfigError("monte-carlo.sigma_wl must be >= 0");
    if (!(mc.window > 0))
        throw ConfigError("monte-carlo.window must be > 0");
    if (!(mc.edge_time >= 0))
        throw ConfigError("monte-carlo.edge_time must be >= 0");

    const auto& cl = cfg.classify;
    if (cl.resolution && !(*cl.resolution >= 0))
        throw ConfigError("classify.resolution must be >= 0");
    if (!(cl.ramp_fraction > 0 && cl.ramp_fraction < 1))
        throw ConfigError("classify.ramp_fraction must be in (0, 1)");
    if (!(cl.sample_period > 0))
        throw ConfigError("classify.sample_period must be > 0");

    if (!(cfg.power.toggle_rate >= 0))
        throw ConfigError("power.toggle_rate must be >= 0");
    if (cfg.power.toggling_outputs > cfg.network.k_cells)
        throw ConfigError("power.toggling_outputs must be <= network.k_cells");

    if (!(cfg.resolution.i_m_ratio > 0 && cfg.resolution.i_m_ratio < 1))
        throw ConfigError("resolution.i_m_ratio must be in (0, 1)");
    if (!(cfg.resolution.fixed_v >= 0 && cfg.resolution.fixed_v < cfg.network.vdd))
        throw ConfigError("resolution.fixed_v must be in [0, network.vdd)");
}

SimConfig parse_config(std::string_view text, const std::string& source)
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in{std::string(text)};
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(source + ":" + std::to_string(e.line()) + ": " + e.message());
    }

    SimConfig cfg = default_config();
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw ConfigError(source + ": key '" + section + "' outside a section");
        if (!known_section(section))
            throw ConfigError(source + ": unknown section [" + section + "]");
        for (const auto& [key, node] : body) {
            const std::string path = section + "." + key;
            if (!find_key(path))
                throw ConfigError(source + ": unknown config key '" + path + "'");
            set_config_value(cfg, path, strip_comment(node.data()));
        }
    }
    validate(cfg);
    return cfg;
}

SimConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

std::string to_config_text(const SimConfig& cfg)
{
    std::string out;
    std::string section;
    for (const auto& k : registry()) {
        const auto dot = k.path.find('.');
        const std::string s = k.path.substr(0, dot);
        if (s != section) {
            out += (section.empty() ? "[" : "\n[") + s + "]\n";
            section = s;
        }
        out += k.path.substr(dot + 1) + " = " + k.get(cfg) + "\n";
    }
    return out;
}

std::vector<std::string> config_keys()
{
    std::vector<std::string> out;
    for (const auto& k : registry())
        out.push_back(k.path);
    return out;
}

std::string resolve_config_path(const std::string& explicit_path)
{
    if (!explicit_path.empty())
        return explicit_path;
    if (const char* env = std::getenv("WTA_CONFIG"))
        return env;
    return {};
}

} // namespace wta
