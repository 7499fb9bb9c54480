#pragma once

#include <array>
#include <functional>
#include <vector>

#include "qig/models.hpp"

namespace qig {

using BoundaryData = std::function<double(Point)>;

// Scalar field on a uniform square grid patch: N cells per side,
// (N+1)^2 nodes, Dirichlet trace on the border nodes.
struct GridFunction {
    int N = 0;
    double h = 0.0;
    Point origin;  // lower-left corner

    std::vector<double> v;  // node values, index i*(N+1)+j

    GridFunction() = default;
    GridFunction(int n, double side, Point orig);

    double& at(int i, int j) { return v[idx(i, j)]; }
    double at(int i, int j) const { return v[idx(i, j)]; }
    std::size_t idx(int i, int j) const {
        return static_cast<std::size_t>(i) * (N + 1) +
               static_cast<std::size_t>(j);
    }
    Point node(int i, int j) const {
        return {origin.x + h * i, origin.y + h * j};
    }
    Point cell_center(int i, int j) const {
        return {origin.x + h * (i + 0.5), origin.y + h * (j + 0.5)};
    }
    bool is_boundary(int i, int j) const {
        return i == 0 || j == 0 || i == N || j == N;
    }
    double side() const { return h * N; }

    void fill(const BoundaryData& g);  // sample g at every node
    // Central sub-patch spanning index range [N/4, 3N/4] (N % 4 == 0).
    GridFunction inner_half() const;
};

// Forward-difference gradient per cell, anchored at the lower-left node;
// exact for affine data.
struct GradientField {
    int N = 0;
    double h = 0.0;
    Point origin;
    std::vector<std::array<double, 2>> g;  // cell index i*N+j

    const std::array<double, 2>& at(int i, int j) const {
        return g[static_cast<std::size_t>(i) * N + j];
    }
    Point cell_center(int i, int j) const {
        return {origin.x + h * (i + 0.5), origin.y + h * (j + 0.5)};
    }
};

GradientField discrete_gradient(const GridFunction& u);

// Midpoint quadrature of the integrand over the patch. Serial and
// OpenMP paths share the exact blocked reduction.
double energy(const Lagrangian& F, const GridFunction& u);
double energy_serial(const Lagrangian& F, const GridFunction& u);

// Modular integral int phi(x, |Du|) dx over the patch cells.
double modular_energy(const PhiFunction& phi, const GridFunction& u);

}  // namespace qig
