#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "qig/models.hpp"
#include "qig/phi.hpp"

namespace qig {

// Positive sampled function on a log t-grid read as a piecewise power
// law (linear in log-log), with power-law extrapolation past the grid.
struct PiecewisePower {
    std::vector<double> knots;   // increasing, > 0
    std::vector<double> values;  // > 0
    double exp_below = 1.0;
    double exp_above = 1.0;

    double value(double t) const;
    double slope_at(double t) const;  // local log-log slope
    double max_slope() const;
    double min_slope() const;
};

struct ConvexifyResult {
    PiecewisePower psi;        // convex, (Inc)_p / (Dec)_q1 compliant
    double q1 = 0.0;           // largest log-log slope actually achieved
    double equivalence = 1.0;  // two-sided ratio to the input samples
};

// Greatest-convex-minorant pipeline: lower hull of the samples in
// log-log coordinates, then a running-max correction so values/t^p is
// nondecreasing and (optionally) a running-min correction capping the
// upper exponent. All segment slopes land in [p, q1], which makes the
// output convex in t as well. Inputs whose aInc(1) constant exceeds
// `reject_L` cannot be equivalently convexified and are rejected.
ConvexifyResult convexify(const std::vector<double>& t,
                          const std::vector<double>& psi, double p,
                          double q_cap = 0.0, double reject_L = 1e6);

// Growth function of one spatial point: psi-tilde plus the normalized
// antiderivative phi(t) = p * int_0^t psi~(s)/s ds, with phi' = p psi~/t.
// The normalization makes phi reproduce int_0^t psi' exactly on pure
// power data.
struct PhiCurve {
    PiecewisePower psi;
    std::vector<double> phi_at_knots;
    double p = 2.0;

    double value(double t) const;
    double slope(double t) const;
};

struct GrowthGrid {
    double t_lo = 1e-6;
    double t_hi = 1e6;
    int t_count = 97;
    int x_per_side = 9;  // ignored for autonomous fields
    int directions = 64;
    std::uint64_t seed = 0;
    // Replaces phi' by its log-averaged antiderivative int_0^t phi'/s ds,
    // which is differentiable; only needed by consumers that want a
    // second derivative of the growth function. Changes phi' at most by
    // the factor band [min(1, 1/(q1-1)), max(1, 1/(p1-1))].
    bool c2_upgrade = false;
};

struct GrowthSampleRef {
    Point x;
    double t = 0.0;
    int direction = 0;
};

struct GrowthResiduals {
    // (3.1)-side: largest (|A| + |xi||D_xi A|) / phi' over the samples;
    // the certificate asserts the growth bound with this constant.
    double growth_constant = 0.0;
    GrowthSampleRef growth_worst;
    // (3.2)-side: smallest quadratic-form ratio; equals nu.
    double ellipticity_min = 0.0;
    GrowthSampleRef ellipticity_worst;
};

class GrowthCertificate {
  public:
    double p1 = 2.0;
    double q1 = 2.0;
    // nu: min over samples of (inf quadform of D_xi A) |xi| / phi'.
    // Lambda: max over samples of |xi| |D_xi A| / phi' (jacobian norm),
    // so nu/Lambda is the sphere-eigenvalue ratio for radial fields.
    double nu = 0.0;
    double Lambda = 0.0;
    GrowthResiduals residuals;
    double c1 = 0.0;  // two-sided constant of phi ~ A^(-1), 0 = unset
    double c2 = 0.0;  // two-sided constant of phi ~ F, 0 = unset
    GrowthGrid grid;
    bool autonomous = true;

    PhiFunction phi() const;
    PhiFunction phi_prime() const;
    double phi_value(Point x, double t) const;
    double phi_slope(Point x, double t) const;

    const std::vector<Point>& lattice() const;
    std::size_t nearest(Point x) const;
    std::vector<std::size_t> lattice_in_ball(const Ball& b) const;

    // inf/sup of phi over the lattice points inside a ball (nearest
    // point when the ball captures none).
    double phi_inf_ball(const Ball& b, double t) const;
    double phi_sup_ball(const Ball& b, double t) const;
    double phi_slope_inf_ball(const Ball& b, double t) const;
    // left inverse of t -> phi_inf_ball(b, t)
    double phi_inf_ball_inverse(const Ball& b, double s) const;

    // Certificate built around an explicit integrand (used by tests and
    // by approximation code when an analytic phi is already at hand).
    static GrowthCertificate from_phi(PhiFunction phi, double p1, double q1,
                                      double nu, double Lambda);

    struct Data;
    std::shared_ptr<const Data> data;
};

// sup_{|xi|=t} |xi| |D_xi A(x,xi)| over low-discrepancy directions.
double extract_psi_prime(const VectorField& A, Point x, double t,
                         int directions, std::uint64_t seed = 0);

// Extraction pipeline: sample psi-prime on an (x,t) grid, integrate,
// convexify per x, integrate again for phi, then fit the growth and
// ellipticity constants over the same samples. Throws EvalError when the
// quadratic form of D_xi A is nonpositive at a sample.
GrowthCertificate build_growth_function(const VectorField& A,
                                        const GrowthGrid& grid = {});
GrowthCertificate build_growth_function(const Lagrangian& F,
                                        const GrowthGrid& grid = {});

struct EquivalenceReport {
    // phi <= c_lower * (A . xi)   and   |xi||A| <= c_upper * phi
    double c_lower = 0.0;
    double c_upper = 0.0;
    double c = 0.0;  // max of the two; the K-choice uses 2c
};

EquivalenceReport check_equivalences(const GrowthCertificate& cert,
                                     const VectorField& A,
                                     const GrowthGrid& grid = {});
EquivalenceReport check_equivalences(const GrowthCertificate& cert,
                                     const Lagrangian& F,
                                     const GrowthGrid& grid = {});

struct MonotonicityReport {
    double constant = 0.0;  // smallest LHS/RHS ratio over sampled pairs
    bool pass = false;
    Point worst_x;
};

// (A(x,xi)-A(x,xi~)).(xi-xi~) >= c phi'(x,|xi|+|xi~|)/(|xi|+|xi~|) |xi-xi~|^2
// fitted over sampled pairs; nonpositive left side for xi != xi~ is a
// monotonicity failure.
MonotonicityReport check_monotonicity(const VectorField& A,
                                      const GrowthCertificate& cert,
                                      int pairs_per_x = 256,
                                      std::uint64_t seed = 0);

}  // namespace qig
