#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace wta {

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Counter-based standard normal draws: each (sample, cell, stream) key maps to
// its own value, so results do not depend on evaluation order or threading.
class KeyedNormal {
public:
    explicit KeyedNormal(std::uint64_t seed) : seed_(splitmix64(seed)) {}

    double operator()(std::uint64_t sample, std::uint64_t cell, std::uint64_t stream) const
    {
        const std::uint64_t h1 = splitmix64(seed_ ^ splitmix64(sample ^ splitmix64(cell ^ splitmix64(stream))));
        const std::uint64_t h2 = splitmix64(h1 ^ 0xd1b54a32d192ed03ULL);
        constexpr double scale = 0x1.0p-53;
        const double u1 = static_cast<double>((h1 >> 11) + 1) * scale; // (0, 1]
        const double u2 = static_cast<double>(h2 >> 11) * scale;       // [0, 1)
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t seed_;
};

} // namespace wta
