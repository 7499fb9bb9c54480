#include "qig/sampling.hpp"

namespace qig {

double inverse_normal_cdf(double p) {
    // Acklam's rational approximation.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1 - plow;
    double x;
    if (p < plow) {
        double q = std::sqrt(-2 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
             c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    } else if (p <= phigh) {
        double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r +
             a[5]) *
            q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
    } else {
        double q = std::sqrt(-2 * std::log(1 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
              c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    // One Halley refinement.
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = e * std::sqrt(2 * M_PI) * std::exp(x * x / 2);
    return x - u / (1 + x * u / 2);
}

Vec sphere_direction(int n, std::uint64_t k, std::uint64_t seed) {
    if (n == 2) {
        static const double golden = 0.6180339887498949;
        const double shift = unit_from_seed(seed);
        double frac = std::fmod(shift + golden * static_cast<double>(k), 1.0);
        const double theta = 2.0 * M_PI * frac;
        return vec2(std::cos(theta), std::sin(theta));
    }
    static const std::uint64_t primes[] = {2,  3,  5,  7,  11, 13,
                                           17, 19, 23, 29, 31, 37};
    const std::uint64_t skip = mix64(seed) % 997;
    Vec v(n);
    double norm2 = 0.0;
    for (int j = 0; j < n; ++j) {
        double u = halton(k + skip, primes[j % 12]);
        u = std::min(std::max(u, 1e-12), 1.0 - 1e-12);
        v(j) = inverse_normal_cdf(u);
        norm2 += v(j) * v(j);
    }
    if (norm2 < 1e-300) {
        v.setZero();
        v(0) = 1.0;
        return v;
    }
    return v / std::sqrt(norm2);
}

std::vector<Vec> sphere_directions(int n, int count, std::uint64_t seed) {
    std::vector<Vec> dirs;
    dirs.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k)
        dirs.push_back(sphere_direction(n, static_cast<std::uint64_t>(k), seed));
    return dirs;
}

}  // namespace qig
