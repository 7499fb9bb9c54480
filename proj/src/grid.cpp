#include "qig/grid.hpp"

#include <cmath>
#include <sstream>

#include "qig/parallel.hpp"

namespace qig {

GridFunction::GridFunction(int n, double side, Point orig)
    : N(n), h(side / n), origin(orig) {
    if (n < 2) throw ParamError("GridFunction: N >= 2 required");
    v.assign(static_cast<std::size_t>(n + 1) * (n + 1), 0.0);
}

void GridFunction::fill(const BoundaryData& g) {
    for (int i = 0; i <= N; ++i)
        for (int j = 0; j <= N; ++j) at(i, j) = g(node(i, j));
}

GridFunction GridFunction::inner_half() const {
    if (N % 4 != 0)
        throw ParamError("inner_half: N must be divisible by 4");
    const int off = N / 4;
    GridFunction inner(N / 2, h * (N / 2), node(off, off));
    for (int i = 0; i <= N / 2; ++i)
        for (int j = 0; j <= N / 2; ++j)
            inner.at(i, j) = at(off + i, off + j);
    return inner;
}

GradientField discrete_gradient(const GridFunction& u) {
    GradientField f;
    f.N = u.N;
    f.h = u.h;
    f.origin = u.origin;
    f.g.resize(static_cast<std::size_t>(u.N) * u.N);
    const int N = u.N;
    par::for_each(static_cast<std::size_t>(N) * N, [&](std::size_t c) {
        const int i = static_cast<int>(c) / N;
        const int j = static_cast<int>(c) % N;
        f.g[c] = {(u.at(i + 1, j) - u.at(i, j)) / u.h,
                  (u.at(i, j + 1) - u.at(i, j)) / u.h};
    });
    return f;
}

double energy(const Lagrangian& F, const GridFunction& u) {
    const int N = u.N;
    const double h2 = u.h * u.h;
    const GradientField du = discrete_gradient(u);
    const double e =
        par::block_sum(static_cast<std::size_t>(N) * N, [&](std::size_t c) {
            const int i = static_cast<int>(c) / N;
            const int j = static_cast<int>(c) % N;
            const auto& g = du.g[c];
            return F(u.cell_center(i, j), vec2(g[0], g[1])) * h2;
        });
    if (!std::isfinite(e))
        throw EvalError("energy: non-finite integrand on the patch");
    return e;
}

double energy_serial(const Lagrangian& F, const GridFunction& u) {
    const int N = u.N;
    const double h2 = u.h * u.h;
    const GradientField du = discrete_gradient(u);
    const double e = par::block_sum_serial(
        static_cast<std::size_t>(N) * N, [&](std::size_t c) {
            const int i = static_cast<int>(c) / N;
            const int j = static_cast<int>(c) % N;
            const auto& g = du.g[c];
            return F(u.cell_center(i, j), vec2(g[0], g[1])) * h2;
        });
    if (!std::isfinite(e))
        throw EvalError("energy_serial: non-finite integrand on the patch");
    return e;
}

double modular_energy(const PhiFunction& phi, const GridFunction& u) {
    const int N = u.N;
    const double h2 = u.h * u.h;
    const GradientField du = discrete_gradient(u);
    return par::block_sum(static_cast<std::size_t>(N) * N,
                          [&](std::size_t c) {
                              const int i = static_cast<int>(c) / N;
                              const int j = static_cast<int>(c) % N;
                              const auto& g = du.g[c];
                              const double mag =
                                  std::hypot(g[0], g[1]);
                              return phi(u.cell_center(i, j), mag) * h2;
                          });
}

}  // namespace qig
