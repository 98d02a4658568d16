#include "device_model.hpp"

#include "errors.hpp"

#include <cmath>
#include <string>

namespace wta {

namespace {

void require(bool ok, const char* key, const char* rule)
{
    if (!ok)
        throw ConfigError(std::string(key) + " " + rule);
}

void check_geometry(const Geometry& g, const char* name, bool width_may_be_zero)
{
    const std::string base = std::string("sizes.") + name;
    if (!(g.length_nm > 0))
        throw ConfigError(base + " length must be > 0");
    if (width_may_be_zero ? !(g.width_nm >= 0) : !(g.width_nm > 0))
        throw ConfigError(base + (width_may_be_zero ? " width must be >= 0" : " width must be > 0"));
}

} // namespace

void validate(const DeviceParams& p, bool comparator)
{
    require(p.i_zero > 0, "device.i_zero", "must be > 0");
    require(p.w_over_l > 0, "device.w_over_l", "must be > 0");
    require(p.n_slope >= 1, "device.n_slope", "must be >= 1");
    require(p.temperature > 0, "device.temperature", "must be > 0");
    require(std::isfinite(p.v_th), "device.v_th", "must be finite");
    require(p.mirror_gain > 0, "device.mirror_gain", "must be > 0");
    if (comparator) {
        require(p.lambda_clm > 0, "device.lambda_clm", "must be > 0");
        require(p.beta > 0, "device.beta", "must be > 0");
        require(p.overdrive > 0, "device.overdrive", "must be > 0");
    }
}

void validate(const TransistorSizes& s)
{
    check_geometry(s.m1, "m1", false);
    check_geometry(s.m2, "m2", false);
    check_geometry(s.m3, "m3", false);
    check_geometry(s.m4, "m4", false);
    check_geometry(s.mf, "mf", true);
}

double thermal_voltage(double temperature)
{
    if (!(temperature > 0))
        throw DomainError("thermal_voltage: temperature must be > 0 K, got " + std::to_string(temperature));
    return constants::boltzmann * temperature / constants::electron_charge;
}

double slope_voltage(const DeviceParams& p)
{
    return p.n_slope * thermal_voltage(p.temperature);
}

ClampedCurrent subthreshold_current_clamped(const DeviceParams& p, double v_gs)
{
    double arg = v_gs / slope_voltage(p);
    bool saturated = false;
    if (arg > constants::max_exponent) {
        arg = constants::max_exponent;
        saturated = true;
    } else if (arg < -constants::max_exponent) {
        arg = -constants::max_exponent;
        saturated = true;
    }
    return {p.i_zero * p.w_over_l * std::exp(arg), saturated};
}

double subthreshold_current(const DeviceParams& p, double v_gs)
{
    const auto c = subthreshold_current_clamped(p, v_gs);
    if (c.saturated)
        throw SaturationError("subthreshold_current: exponent v_gs/(n U_T) outside +-700 at v_gs = "
                              + std::to_string(v_gs) + " V");
    return c.value;
}

DeviceParams with_input_geometry(DeviceParams p, const TransistorSizes& sizes)
{
    p.w_over_l = sizes.m1.ratio();
    return p;
}

double feedback_ratio(const TransistorSizes& sizes)
{
    if (sizes.mf.width_nm <= 0)
        return 0.0;
    return sizes.mf.ratio() / sizes.m1.ratio();
}

} // namespace wta
