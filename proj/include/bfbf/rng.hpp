#pragma once
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace bfbf
{

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent stream for (seed, trial).
inline Rng make_stream(std::uint64_t seed, std::uint64_t trial = 0)
{
    return Rng(splitmix64(seed ^ trial));
}

// Uniform in [0,1) from the top 53 bits; portable across standard libraries.
inline double uniform01(Rng &g)
{
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Circularly-symmetric complex Gaussian with E|z|^2 = 1 (Box-Muller).
inline std::complex<double> complex_normal(Rng &g)
{
    double u = uniform01(g);
    while (u <= 0.0)
        u = uniform01(g);
    const double v = uniform01(g);
    const double rad = std::sqrt(-std::log(u));
    const double ang = 2.0 * std::numbers::pi * v;
    return {rad * std::cos(ang), rad * std::sin(ang)};
}

} // namespace bfbf
