#pragma once

#include <compare>

namespace wta {

namespace constants {
inline constexpr double boltzmann = 1.380649e-23;        // J/K
inline constexpr double electron_charge = 1.602176634e-19; // C
inline constexpr double max_exponent = 700.0;             // |arg| bound for exp()
} // namespace constants

// Subthreshold input device plus the comparator-stage (M4) parameters.
// Defaults are the nominal TT card.
struct DeviceParams {
    double i_zero = 1e-12;      // A, zero-bias current per unit W/L
    double w_over_l = 1.0;      // input device W/L
    double n_slope = 1.5;
    double temperature = 300.0; // K
    double v_th = 0.35;         // V
    double lambda_clm = 0.1;    // 1/V
    double beta = 200e-6;       // A/V^2
    double mirror_gain = 1.0;   // M2:M3
    double overdrive = 0.2;     // V_GS4 - V_th4, V

    bool operator==(const DeviceParams&) const = default;
};

struct Geometry {
    double width_nm = 0.0;
    double length_nm = 0.0;

    double ratio() const { return width_nm / length_nm; }
    bool operator==(const Geometry&) const = default;
};

// One cell: M1 input, M2/M3 mirror, M4 comparator load, Mf feedback.
struct TransistorSizes {
    Geometry m1{350, 60};
    Geometry m2{500, 60};
    Geometry m3{500, 60};
    Geometry m4{500, 60};
    Geometry mf{120, 60};

    bool operator==(const TransistorSizes&) const = default;
};

// Throws ConfigError naming the offending field. The comparator fields are
// only checked when `comparator` is set.
void validate(const DeviceParams& p, bool comparator = true);
void validate(const TransistorSizes& s);

double thermal_voltage(double temperature);

// n * U_T for the device.
double slope_voltage(const DeviceParams& p);

struct ClampedCurrent {
    double value;
    bool saturated;
};

// I_o (W/L) exp(v_gs / (n U_T)) with the exponent clamped to +-700.
ClampedCurrent subthreshold_current_clamped(const DeviceParams& p, double v_gs);

// Same, but throws SaturationError when the exponent had to be clamped.
double subthreshold_current(const DeviceParams& p, double v_gs);

// Copy of `p` whose W/L is that of the M1 input device in `sizes`.
DeviceParams with_input_geometry(DeviceParams p, const TransistorSizes& sizes);

// (W_f/L_f) / (W_1/L_1); zero when the feedback device has zero width.
double feedback_ratio(const TransistorSizes& sizes);

} // namespace wta
