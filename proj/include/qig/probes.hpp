#pragma once

#include <utility>
#include <vector>

#include "qig/grid.hpp"
#include "qig/growth.hpp"

namespace qig {

struct HolderFit {
    double alpha = 0.0;
    double residual = 0.0;  // RMS of the log-log fit
    bool zero_oscillation = false;
    bool clamped = false;
    bool dropped_largest = false;
    std::vector<std::pair<double, double>> table;  // (rho, osc)
};

// log-log least squares of nodal oscillation against radius over nested
// discrete balls. Radii must resolve (rho >= 4h), at least 4 of them
// spanning a decade. The largest radius is dropped when its fit residual
// is 3x the others (boundary contamination).
HolderFit holder_exponent(const GridFunction& f, Point center,
                          const std::vector<double>& radii);

// Excess-decay variant for gradient fields: mean |Du - mean(Du)| over
// B_rho, normalized by the largest-ball mean of |Du|, fitted against
// tau = rho/rho_max.
HolderFit gradient_excess_decay(const GradientField& du, Point center,
                                const std::vector<double>& radii);

struct HigherIntegrabilityReport {
    double sigma = 0.0;           // largest sigma under the ratio cap
    double ratio = 0.0;           // LHS/RHS at that sigma
    double rhs = 0.0;             // phi^-_{B2r}(avg |Du|) + 1
    std::vector<double> sigma_grid;
    std::vector<double> lhs;      // nondecreasing in sigma
    bool monotone = false;
};

// Reverse-Holder style ratio: LHS(s) = (avg_{B_r} phi(x,|Du|)^{1+s})^{1/(1+s)}
// against phi^-_{B_2r}(avg_{B_2r} |Du|) + 1. Requires B_2r inside the
// patch, |B_2r| <= 1 and the modular bound int phi(x,|Du|) <= 1; those
// are the estimate's hypotheses and their violation is an error.
HigherIntegrabilityReport higher_integrability(
    const PhiFunction& phi, const GridFunction& u, Point center, double r,
    const std::vector<double>& sigma_grid = {}, double cap = 10.0);

struct EnergyComparisonReport {
    // item (1): avg phi(.,|Du|) <= power-mean <= c (phi^- (avg|Du|) + 1)
    double u_jensen = 0.0;  // first ratio; holds with constant 1
    double u_c = 0.0;
    double u_cbar = 0.0;    // against phibar(avg|Du|) + 1
    // item (2): same structure for ubar with exponent 1 + sigma/2
    double ubar_jensen = 0.0;
    double ubar_c = 0.0;
    // item (3): avg_{B_r} |Dubar| <= c (avg_{B_2r} |Du| + 1)
    double gradient_c = 0.0;
    bool pass = false;
};

// Evaluates both sides of the three energy inequalities on a solved
// pair: u on the outer patch, ubar on its central half.
EnergyComparisonReport energy_comparison_suite(const PhiFunction& phi, const PhiFunction& phibar,
                            const GridFunction& u, const GridFunction& ubar,
                            double sigma);

}  // namespace qig
