#pragma once

#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace wta {

struct DcLevel {
    double level = 0.0;
};

// SPICE PULSE semantics: v1 until delay, ramp to v2 over rise, hold for width,
// ramp back over fall, repeat every period.
struct Pulse {
    double v1 = 0.0;
    double v2 = 1.2;
    double delay = 0.0;
    double rise = 10e-12;
    double fall = 10e-12;
    double width = 150e-9;
    double period = 300e-9;
};

struct Sine {
    double offset = 0.6;
    double amplitude = 0.6;
    double frequency = 0.5e6;
    double delay = 0.0;
    double phase = 0.0; // rad
};

struct Triangle {
    double v_low = 0.0;
    double v_high = 1.2;
    double period = 2e-6;
    double delay = 0.0;
};

// Linear interpolation between (time, value) breakpoints, held flat outside.
struct PiecewiseLinear {
    std::vector<std::pair<double, double>> points;
};

class Stimulus {
public:
    using Shape = std::variant<DcLevel, Pulse, Sine, Triangle, PiecewiseLinear>;

    Stimulus(Shape shape); // NOLINT: implicit by intent, each shape is a stimulus
    template <class S>
        requires std::is_constructible_v<Shape, S>
    Stimulus(S shape) : Stimulus(Shape(std::move(shape))) {} // NOLINT
    static Stimulus dc(double level) { return Stimulus(DcLevel{level}); }

    double value_at(double t) const;
    // Lowest and highest value the waveform can take.
    std::pair<double, double> range() const;
    const Shape& shape() const { return shape_; }
    std::string kind() const;

private:
    Shape shape_;
};

// Throws ConfigError if any waveform leaves [low, high].
void check_within_rails(const Stimulus& s, double low, double high);

} // namespace wta
