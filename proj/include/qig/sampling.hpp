#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "qig/geometry.hpp"

namespace qig {

// Log-spaced grid over [lo, hi], endpoints included.
inline std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g(static_cast<std::size_t>(n));
    const double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < n; ++i)
        g[static_cast<std::size_t>(i)] =
            std::exp(llo + (lhi - llo) * i / (n - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

inline std::vector<double> lin_grid(double lo, double hi, int n) {
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    return g;
}

// splitmix64, used only to derive deterministic sequence offsets from seeds.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline double unit_from_seed(std::uint64_t seed) {
    return static_cast<double>(mix64(seed) >> 11) * 0x1.0p-53;
}

inline double halton(std::uint64_t i, std::uint64_t base) {
    double f = 1.0, r = 0.0;
    for (std::uint64_t n = i + 1; n > 0; n /= base) {
        f /= static_cast<double>(base);
        r += f * static_cast<double>(n % base);
    }
    return r;
}

// Acklam's inverse normal CDF, refined with one Halley step. Plenty for
// direction placement; not used where high accuracy matters.
double inverse_normal_cdf(double p);

// k-th unit direction of a low-discrepancy sequence on S^{n-1}.
// n = 2 uses the golden-angle rotation; higher n maps Halton points
// through the normal quantile and normalizes. The seed rotates the
// sequence deterministically.
Vec sphere_direction(int n, std::uint64_t k, std::uint64_t seed);

std::vector<Vec> sphere_directions(int n, int count, std::uint64_t seed);

}  // namespace qig
