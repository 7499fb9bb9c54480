#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qig/geometry.hpp"
#include "qig/sampling.hpp"

namespace qig {

struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RangeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct WindowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ParamError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Declared structure constants of an integrand: exponent window
// 1 < p_lo <= q_hi and the almost-monotonicity constant L >= 1.
struct PhiMeta {
    double p_lo = 0.0;  // 0 = undeclared
    double q_hi = 0.0;
    double L = 1.0;
    bool has_exponents() const { return p_lo > 0.0 && q_hi > 0.0; }
};

// Orlicz-type integrand phi(x,t), t >= 0, possibly x-dependent.
// `slope` is the right-derivative in t; when a model supplies none,
// scale-aware central differences are used.
class PhiFunction {
  public:
    using Fn = std::function<double(Point, double)>;

    PhiFunction() = default;
    PhiFunction(Fn value, Fn slope, PhiMeta meta, bool autonomous)
        : value_(std::move(value)),
          slope_(std::move(slope)),
          meta_(meta),
          autonomous_(autonomous) {}

    static PhiFunction make(Fn value, Fn slope, PhiMeta meta = {}) {
        return PhiFunction(std::move(value), std::move(slope), meta, false);
    }
    static PhiFunction make_autonomous(std::function<double(double)> value,
                                       std::function<double(double)> slope,
                                       PhiMeta meta = {});

    double operator()(Point x, double t) const { return value_(x, t); }
    double deriv(Point x, double t) const;
    bool autonomous() const { return autonomous_; }
    const PhiMeta& meta() const { return meta_; }
    PhiMeta& meta() { return meta_; }
    bool valid() const { return static_cast<bool>(value_); }

  private:
    Fn value_;
    Fn slope_;
    PhiMeta meta_;
    bool autonomous_ = false;
};

enum class Condition { A0, aInc, aDec, Inc, Dec };

std::string to_string(Condition c);

// Sample set for condition sweeps: a log t-grid times spatial points.
struct SampleGrid {
    std::vector<double> t;
    std::vector<Point> x;

    // Default windows follow the t in (0, inf) reading of the conditions:
    // extreme scales are where power-type violations show up.
    static SampleGrid standard(int t_points = 97, double t_lo = 1e-6,
                               double t_hi = 1e6, int x_per_side = 5);
    static SampleGrid autonomous(int t_points = 97, double t_lo = 1e-6,
                                 double t_hi = 1e6);
};

struct ConditionWitness {
    Point x;
    double t = 0.0;
    double s = 0.0;
};

struct ConditionReport {
    Condition condition = Condition::A0;
    double gamma = 0.0;
    bool pass = false;
    // Smallest L making the condition's inequality hold on the samples.
    double witnessed_constant = 1.0;
    ConditionWitness witness;  // pair attaining the constant
    std::optional<ConditionWitness> counterexample;
};

// Sweeps phi(x,t)/t^gamma over the sample grid and reports the smallest
// admissible almost-monotonicity constant, or a violating pair. For A0
// the inequality is 1/L <= phi(x,1) <= L. Pass/fail is judged against
// `declared_L` (defaults: 1 for Inc/Dec, meta L otherwise) with 1e-9
// slack for floating-point monotonicity.
ConditionReport check_condition(const PhiFunction& phi, Condition cond,
                                double gamma, const SampleGrid& grid,
                                double declared_L = 0.0);

struct InverseOptions {
    double hi_limit = 1e300;
    double rel_tol = 1e-12;
};

// Left-continuous inverse inf{tau >= 0 : phi(x,tau) >= s} by bracketed
// bisection on the increasing evaluation.
double left_inverse(const PhiFunction& phi, Point x, double s,
                    const InverseOptions& opts = {});

struct ConjugateOptions {
    double window_limit = 1e12;
    double rel_tol = 1e-10;
};

// Legendre-Fenchel conjugate sup_{tau>=0} (s*tau - phi(x,tau)): coarse
// log-grid scan, then golden-section refinement around the maximizer
// (the objective is unimodal for convex phi).
double conjugate(const PhiFunction& phi, Point x, double s,
                 const ConjugateOptions& opts = {});

// phi(x,t) + phi*(x,s) - t*s; nonnegative up to tolerance.
double young_gap(const PhiFunction& phi, Point x, double t, double s);

struct DerivativeBoundsReport {
    // t*phi'(x,t) / phi(x,t) range over the samples; bounded by the
    // declared exponent window when one is present.
    double ratio_min = 0.0;
    double ratio_max = 0.0;
    bool mid_pass = false;
    // worst normalized slack of phi*(x, phi'(x,t)) <= t*phi'(x,t)
    double conjugate_worst = 0.0;
    bool compose_pass = false;
    bool pass = false;
};

DerivativeBoundsReport check_derivative_bounds(const PhiFunction& phi, const SampleGrid& grid);

struct SplitResidual {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;  // lhs/rhs, 0 when both sides vanish
};

// Both sides of the quasiconvexity split
//   phi(|u-v|) <= C { kappa [phi(|u|)+phi(|v|)]
//                     + kappa^-1 phi'(|u|+|v|)/(|u|+|v|) |u-v|^2 }.
// The implicit C over a sample set is the max of the returned ratio.
SplitResidual quasiconvexity_split(const PhiFunction& phi, const Vec& u,
                                   const Vec& v, double kappa);

}  // namespace qig
