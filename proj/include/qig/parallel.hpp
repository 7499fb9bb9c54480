#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

// Deterministic data-parallel reductions.
//
// Every reduction partitions [0,n) into blocks whose layout depends only
// on n, accumulates each block serially, then folds the per-block results
// in index order. The result is bit-identical for any thread count, and
// the *_serial variants run the exact same blocking, so parallel and
// serial outputs can be compared exactly in tests.

namespace qig::par {

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

namespace detail {
inline std::size_t block_count(std::size_t n) {
    if (n <= 64) return n == 0 ? 0 : 1;
    std::size_t blocks = (n + 1023) / 1024;
    return blocks < 64 ? 64 : blocks;
}
}  // namespace detail

// sum_{i<n} f(i), fixed blocking, blocks folded in order.
template <class F>
double block_sum(std::size_t n, F&& f) {
    const std::size_t nb = detail::block_count(n);
    if (nb == 0) return 0.0;
    std::vector<double> partial(nb, 0.0);
#pragma omp parallel for schedule(static)
    for (std::int64_t b = 0; b < static_cast<std::int64_t>(nb); ++b) {
        const std::size_t lo = static_cast<std::size_t>(b) * n / nb;
        const std::size_t hi = (static_cast<std::size_t>(b) + 1) * n / nb;
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += f(i);
        partial[static_cast<std::size_t>(b)] = s;
    }
    double total = 0.0;
    for (double s : partial) total += s;
    return total;
}

template <class F>
double block_sum_serial(std::size_t n, F&& f) {
    const std::size_t nb = detail::block_count(n);
    if (nb == 0) return 0.0;
    std::vector<double> partial(nb, 0.0);
    for (std::size_t b = 0; b < nb; ++b) {
        const std::size_t lo = b * n / nb;
        const std::size_t hi = (b + 1) * n / nb;
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += f(i);
        partial[b] = s;
    }
    double total = 0.0;
    for (double s : partial) total += s;
    return total;
}

struct MaxResult {
    double value;
    std::size_t index;
};

// max_{i<n} f(i); ties resolved toward the lowest index.
template <class F>
MaxResult block_max(std::size_t n, F&& f) {
    const std::size_t nb = detail::block_count(n);
    if (nb == 0) return {-1e308, 0};
    std::vector<MaxResult> partial(nb, {-1e308, 0});
#pragma omp parallel for schedule(static)
    for (std::int64_t b = 0; b < static_cast<std::int64_t>(nb); ++b) {
        const std::size_t lo = static_cast<std::size_t>(b) * n / nb;
        const std::size_t hi = (static_cast<std::size_t>(b) + 1) * n / nb;
        MaxResult best{-1e308, lo};
        for (std::size_t i = lo; i < hi; ++i) {
            const double v = f(i);
            if (v > best.value) best = {v, i};
        }
        partial[static_cast<std::size_t>(b)] = best;
    }
    MaxResult best = partial[0];
    for (std::size_t b = 1; b < nb; ++b)
        if (partial[b].value > best.value) best = partial[b];
    return best;
}

template <class F>
MaxResult block_max_serial(std::size_t n, F&& f) {
    const std::size_t nb = detail::block_count(n);
    if (nb == 0) return {-1e308, 0};
    std::vector<MaxResult> partial(nb, {-1e308, 0});
    for (std::size_t b = 0; b < nb; ++b) {
        const std::size_t lo = b * n / nb;
        const std::size_t hi = (b + 1) * n / nb;
        MaxResult best{-1e308, lo};
        for (std::size_t i = lo; i < hi; ++i) {
            const double v = f(i);
            if (v > best.value) best = {v, i};
        }
        partial[b] = best;
    }
    MaxResult best = partial[0];
    for (std::size_t b = 1; b < nb; ++b)
        if (partial[b].value > best.value) best = partial[b];
    return best;
}

template <class F>
MaxResult block_min(std::size_t n, F&& f) {
    MaxResult r = block_max(n, [&](std::size_t i) { return -f(i); });
    return {-r.value, r.index};
}

// Plain parallel loop over [0,n); bodies must be independent.
template <class F>
void for_each(std::size_t n, F&& f) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i)
        f(static_cast<std::size_t>(i));
}

}  // namespace qig::par
