#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qig/geometry.hpp"
#include "qig/phi.hpp"

namespace qig {

// Scalar coefficient field on the closed unit square, extended to the
// plane by nearest-point projection. Profiles cover the cases used by
// the model families: constant, linear in x1, a Holder bump around a
// center, and a smoothstep ramp in x1.
struct ScalarField {
    enum class Kind { Constant, Linear, HolderBump, Smoothstep, Custom };

    Kind kind = Kind::Constant;
    double base = 0.0;   // additive offset
    double scale = 0.0;  // profile amplitude, or Holder seminorm (custom)
    double beta = 1.0;   // Holder exponent (bump and custom profiles)
    Point center{0.5, 0.5};
    double edge0 = 0.0, edge1 = 1.0;  // smoothstep ramp window in x1
    std::function<double(Point)> fn;  // custom profile only

    static ScalarField constant(double v) {
        ScalarField f;
        f.kind = Kind::Constant;
        f.base = v;
        return f;
    }
    static ScalarField linear(double base, double slope) {
        ScalarField f;
        f.kind = Kind::Linear;
        f.base = base;
        f.scale = slope;
        return f;
    }
    static ScalarField holder_bump(double base, double seminorm, double beta,
                                   Point center = {0.5, 0.5}) {
        ScalarField f;
        f.kind = Kind::HolderBump;
        f.base = base;
        f.scale = seminorm;
        f.beta = beta;
        f.center = center;
        return f;
    }
    static ScalarField smoothstep(double base, double scale, double edge0,
                                  double edge1) {
        ScalarField f;
        f.kind = Kind::Smoothstep;
        f.base = base;
        f.scale = scale;
        f.edge0 = edge0;
        f.edge1 = edge1;
        return f;
    }
    // Arbitrary callable with declared Holder data (seminorm, beta) for
    // the analytic modulus; not serializable to config files.
    static ScalarField custom(std::function<double(Point)> fn,
                              double seminorm, double beta) {
        ScalarField f;
        f.kind = Kind::Custom;
        f.fn = std::move(fn);
        f.scale = seminorm;
        f.beta = beta;
        return f;
    }

    double operator()(Point p) const;
    // Analytic modulus of continuity over distance r within the square.
    double modulus(double r) const;
    double min_value() const;
    double max_value() const;
    bool is_constant() const { return kind == Kind::Constant || scale == 0.0; }
};

struct StructureConstants {
    double p = 2.0;
    double q = 2.0;
    double L = 1.0;
};

// Nonlinearity A(x, xi) with jacobian D_xi A away from xi = 0.
struct VectorField {
    int dim = 2;
    std::function<Vec(Point, const Vec&)> eval;
    std::function<Mat(Point, const Vec&)> jac;
    StructureConstants sc;
    bool autonomous = false;

    Vec operator()(Point x, const Vec& xi) const { return eval(x, xi); }
    Mat jacobian(Point x, const Vec& xi) const;
    VectorField frozen(Point x0) const;  // x -> A(x0, .)
};

// Scalar integrand F(x, xi) with gradient and (xi != 0) Hessian.
struct Lagrangian {
    int dim = 2;
    std::function<double(Point, const Vec&)> eval;
    std::function<Vec(Point, const Vec&)> grad;
    std::function<Mat(Point, const Vec&)> hess;
    StructureConstants sc;
    bool autonomous = false;

    double operator()(Point x, const Vec& xi) const { return eval(x, xi); }
    VectorField derivative() const;  // A := D_xi F
    Lagrangian frozen(Point x0) const;
};

// xi-to-vector map, the common shape of the continuity conditions'
// argument G (A^(-1) is vector-valued, F is treated as 1-dimensional).
struct GMap {
    int dim = 2;
    std::function<Vec(Point, const Vec&)> eval;
    bool autonomous = false;
};

// A^(-1)(x, xi) := |xi| A(x, xi).
GMap a_minus_one(const VectorField& A);
GMap g_of_lagrangian(const Lagrangian& F);

struct ModelSpec {
    std::string family;  // p_laplace | variable_exponent | double_phase |
                         // orlicz_double_phase | aniso_quartic
    int dim = 2;
    double p = 2.0;
    double q = 0.0;
    ScalarField exponent = ScalarField::constant(2.0);     // p(x)
    ScalarField coefficient = ScalarField::constant(0.0);  // a(x)
    ScalarField weight = ScalarField::constant(1.0);       // gamma(x)
    // Keeps the quartic argument un-normalized (xi_1^4+...+xi_n^4 instead
    // of its fourth root); breaks sphere-wise ellipticity and exists for
    // demonstrating exactly that.
    bool literal_quartic = false;
};

struct Model {
    ModelSpec spec;
    VectorField A;
    Lagrangian F;  // valid iff variational
    bool variational = false;
};

// Constructs the named family with analytic derivatives.
// Parameter ranges are enforced; violations throw ParamError naming the
// offending bound.
Model build_model(const ModelSpec& spec);

struct FamilyInfo {
    std::string name;
    std::string parameters;
    std::string description;
};
std::vector<FamilyInfo> model_registry();

struct QuasiIsotropySample {
    Point x;
    double t = 0.0;
};

struct QuasiIsotropyReport {
    double L = 0.0;  // smallest admissible constant found
    QuasiIsotropySample worst;
    bool elliptic = true;  // false if a sampled jacobian was singular
    QuasiIsotropySample failure;
};

// Assumption-style sweep: over every sampled sphere {|xi| = t} the
// largest jacobian norm must be controlled by the smallest quadratic
// form, uniformly in x and t. Reports the constant actually attained.
QuasiIsotropyReport check_quasi_isotropy(const VectorField& A,
                                         const std::vector<Point>& xs,
                                         const std::vector<double>& radii,
                                         int directions,
                                         std::uint64_t seed = 0);

// Finite-difference jacobian used by consistency tests.
Mat fd_jacobian(const VectorField& A, Point x, const Vec& xi, double h);

}  // namespace qig
