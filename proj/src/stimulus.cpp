#include "stimulus.hpp"

#include "errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace wta {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

void check(const Pulse& p)
{
    if (!(p.rise > 0 && p.fall > 0 && p.width >= 0 && p.period > 0 && p.delay >= 0))
        throw ConfigError("pulse: rise/fall/period must be > 0, width/delay >= 0");
    if (p.rise + p.width + p.fall > p.period)
        throw ConfigError("pulse: rise + width + fall exceeds period");
}

void check(const Sine& s)
{
    if (!(s.frequency > 0 && s.amplitude >= 0 && s.delay >= 0))
        throw ConfigError("sine: frequency must be > 0, amplitude/delay >= 0");
}

void check(const Triangle& t)
{
    if (!(t.period > 0 && t.delay >= 0 && t.v_high >= t.v_low))
        throw ConfigError("triangle: period must be > 0, v_high >= v_low");
}

void check(const PiecewiseLinear& w)
{
    if (w.points.empty())
        throw ConfigError("piecewise-linear: no breakpoints");
    for (std::size_t i = 1; i < w.points.size(); ++i)
        if (!(w.points[i].first > w.points[i - 1].first))
            throw ConfigError("piecewise-linear: breakpoint times must be strictly increasing");
}

void check(const DcLevel&) {}

} // namespace

Stimulus::Stimulus(Shape shape) : shape_(std::move(shape))
{
    std::visit([](const auto& s) { check(s); }, shape_);
}

double Stimulus::value_at(double t) const
{
    return std::visit(
        overloaded{
            [](const DcLevel& d) { return d.level; },
            [t](const Pulse& p) {
                if (t < p.delay)
                    return p.v1;
                const double local = std::fmod(t - p.delay, p.period);
                if (local < p.rise)
                    return p.v1 + (p.v2 - p.v1) * local / p.rise;
                if (local < p.rise + p.width)
                    return p.v2;
                if (local < p.rise + p.width + p.fall)
                    return p.v2 + (p.v1 - p.v2) * (local - p.rise - p.width) / p.fall;
                return p.v1;
            },
            [t](const Sine& s) {
                const double local = std::max(0.0, t - s.delay);
                return s.offset + s.amplitude * std::sin(2 * std::numbers::pi * s.frequency * local + s.phase);
            },
            [t](const Triangle& w) {
                if (t < w.delay)
                    return w.v_low;
                const double phase = std::fmod(t - w.delay, w.period) / w.period;
                const double up = phase < 0.5 ? 2 * phase : 2 - 2 * phase;
                return w.v_low + (w.v_high - w.v_low) * up;
            },
            [t](const PiecewiseLinear& w) {
                const auto& pts = w.points;
                if (t <= pts.front().first)
                    return pts.front().second;
                if (t >= pts.back().first)
                    return pts.back().second;
                const auto hi = std::upper_bound(pts.begin(), pts.end(), t,
                                                 [](double x, const auto& p) { return x < p.first; });
                const auto lo = hi - 1;
                const double f = (t - lo->first) / (hi->first - lo->first);
                return lo->second + f * (hi->second - lo->second);
            },
        },
        shape_);
}

std::pair<double, double> Stimulus::range() const
{
    return std::visit(overloaded{
                          [](const DcLevel& d) { return std::pair{d.level, d.level}; },
                          [](const Pulse& p) { return std::pair{std::min(p.v1, p.v2), std::max(p.v1, p.v2)}; },
                          [](const Sine& s) { return std::pair{s.offset - s.amplitude, s.offset + s.amplitude}; },
                          [](const Triangle& w) { return std::pair{w.v_low, w.v_high}; },
                          [](const PiecewiseLinear& w) {
                              const auto [lo, hi] = std::minmax_element(
                                  w.points.begin(), w.points.end(),
                                  [](const auto& a, const auto& b) { return a.second < b.second; });
                              return std::pair{lo->second, hi->second};
                          },
                      },
                      shape_);
}

std::string Stimulus::kind() const
{
    static constexpr const char* names[] = {"dc", "pulse", "sine", "triangle", "piecewise-linear"};
    return names[shape_.index()];
}

void check_within_rails(const Stimulus& s, double low, double high)
{
    const auto [lo, hi] = s.range();
    if (lo < low || hi > high)
        throw ConfigError(s.kind() + " stimulus spans [" + std::to_string(lo) + ", " + std::to_string(hi)
                          + "] V, outside rails [" + std::to_string(low) + ", " + std::to_string(high) + "]");
}

} // namespace wta
