#pragma once

#include "qig/growth.hpp"
#include "qig/models.hpp"
#include "qig/phi.hpp"

namespace qig {

// C^1 cubic and C^2 quintic smoothsteps on [0,1].
struct Cubic {
    static double value(double u);
    static double d1(double u);
    static double d2(double u);
};
struct Quintic {
    static double value(double u);
    static double d1(double u);
    static double d2(double u);
};

// Transition function on [lo, hi]: 1 -> 0 (down) or 0 -> 1 (up), exact
// constants outside the window so annulus identities hold bitwise.
class Eta {
  public:
    enum class Shape { CubicDown, CubicUp, QuinticDown };

    Eta() = default;
    Eta(Shape shape, double lo, double hi);
    double value(double t) const;
    double d1(double t) const;
    double d2(double t) const;

  private:
    Shape shape_ = Shape::CubicDown;
    double lo_ = 0.0, hi_ = 1.0;
};

// eta_3(t) = int_0^t h(s)/s^2 ds with h a quintic ramp from 0 to t2 over
// [t2/2, 3 t2/4]; closed-form antiderivative (polynomial / s^2 per
// segment integrates to powers and a log).
class EtaIntegral {
  public:
    EtaIntegral() = default;
    explicit EtaIntegral(double t2);
    double value(double t) const;
    double d1(double t) const;  // h(t)/t^2
    double d2(double t) const;  // h'(t)/t^2 - 2 h(t)/t^3
    double h(double t) const;
    double h_slope_max() const;  // must stay <= 10

  private:
    double t2_ = 1.0, a_ = 0.5, b_ = 0.75;
    double antiderivative(double u) const;  // in the ramp variable
    double value_at_b_ = 0.0;
};

struct ApproximationBundle {
    Point x0;
    double r = 0.0;  // ball radius when built by the comparison pipeline
    double t1 = 0.0, t2 = 0.0;
    double a1 = 0.0, a2 = 0.0;  // phi'(x0, t1), phi'(x0, t2)
    double p = 2.0, q1 = 2.0;
    double nu = 0.0, Lambda = 0.0;
    double LambdaBar = 0.0;
    double nuBar = 0.0;  // Lagrangian case only
    double eta_bound_C = 0.0;  // achieved eta + t|eta'| + t^2|eta''| bound
    PhiFunction phibar;
    VectorField abar;
    Lagrangian fbar;
    bool has_abar = false;
    bool has_fbar = false;
};

// Piecewise growth envelope anchored at x0: p-power head matched at t1,
// phi(x0, .) in the middle, p-power tail matched at t2. The anchors make
// the derivative continuous at both thresholds.
PhiFunction build_phibar(const GrowthCertificate& cert, Point x0, double t1,
                         double t2);

struct PhibarChecks {
    bool hypothesis_ok = false;  // phi^+ <= Ltilde phi^- on [t1,t2]
    double hypothesis_worst = 0.0;
    // (1) exact monotonicity of phibar'/t^(p-1) and /t^(q1-1)
    double prime_inc_constant = 0.0;
    double prime_dec_constant = 0.0;
    bool prime_pass = false;
    // (2) on [t1,t2]: phibar - phi(x0,.) is the constant head offset
    // a1 t1/p - phi(x0,t1) >= 0 (zero exactly when the local exponent at
    // t1 is p, which is the only case where the literal upper bound
    // phibar <= phi(x0,.) can hold); ratio capped by q1/p. The lower
    // bound Ltilde^-1 phi(x,.) <= phibar holds as stated.
    double mid_offset = 0.0;     // a1 t1/p - phi(x0,t1)
    double mid_identity = 0.0;   // max deviation from the constant offset
    double mid_upper = 0.0;      // max phibar/phi(x0,.), <= q1/p
    double ball_lower = 0.0;      // max phi(x,.)/(Ltilde phibar), <= 1
    bool mid_pass = false;
    // (3) phibar <= (q1/p) Ltilde phi on [t1, inf)
    double envelope_factor = 0.0;  // max phibar/phi
    double envelope_bound = 0.0;   // (q1/p) Ltilde
    bool envelope_pass = false;
    // (4) theta0(x,t) = phi(x, phibar^-1(t)): A0, aInc(1), aDec(q1/p)
    double compose_a0 = 0.0;
    double compose_ainc = 0.0;
    double compose_adec = 0.0;
    bool compose_pass = false;
    bool pass = false;
};

PhibarChecks check_phibar(const GrowthCertificate& cert,
                               const PhiFunction& phibar, double Ltilde,
                               const Ball& ball, double t1, double t2);

// Equation-side approximant (transition-spliced frozen nonlinearity).
ApproximationBundle build_abar(const VectorField& A,
                               const GrowthCertificate& cert, Point x0,
                               double t1, double t2);

// Functional-side approximant; nuBar and LambdaBar are calibrated by a
// bounded bisection loop until the transition shells certify elliptic.
ApproximationBundle build_fbar(const Lagrangian& F,
                               const GrowthCertificate& cert, Point x0,
                               double t1, double t2);

struct IntervalGrowth {
    std::string name;
    double nu = 0.0;      // min quadform |xi| / phibar'
    double Lambda = 0.0;  // max |xi||D A| / phibar'
    double growth_constant = 0.0;     // max (|A| + |xi||D A|) / phibar'
};

struct ApproxGrowthReport {
    std::vector<IntervalGrowth> intervals;
    double nu = 0.0;
    double Lambda = 0.0;
    double growth_constant = 0.0;
    bool pass = false;
    std::string failed_interval;
};

// Growth-function residuals of the approximant against phibar, sampled
// densely on each transition shell separately so an ellipticity failure
// names its interval.
ApproxGrowthReport verify_growth_of_approx(const VectorField& abar,
                                           const PhiFunction& phibar,
                                           double t1, double t2,
                                           int dirs = 32,
                                           std::uint64_t seed = 0);

// Nondegenerate regularization pair: A_eps(xi) = A((eps/|xi|+1)xi)
// |xi|/(eps+|xi|), phibar_eps'(t) = phibar'(eps+t) t/(eps+t).
// eps = 0 returns the inputs unchanged.
std::pair<VectorField, PhiFunction> regularize(const VectorField& abar,
                                               const PhiFunction& phibar,
                                               double eps);

// The field half of the pair, usable on its own (the solver swaps it in
// on near-degenerate cells).
VectorField regularize_field(const VectorField& abar, double eps);

}  // namespace qig
