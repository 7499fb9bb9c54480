#include "qig/models.hpp"

#include <cmath>

#include "qig/sampling.hpp"

namespace qig {

namespace {

double smoothstep01(double u) {
    u = std::clamp(u, 0.0, 1.0);
    return u * u * (3.0 - 2.0 * u);
}

// f(x, t) radial in xi: value/slope/curvature of t -> f(t) give the
// gradient and Hessian of xi -> f(|xi|).
struct RadialDerivs {
    double f = 0.0, df = 0.0, ddf = 0.0;
};

Mat radial_hess(const Vec& xi, const RadialDerivs& d) {
    const double t = xi.norm();
    const int n = static_cast<int>(xi.size());
    Vec e = xi / t;
    Mat proj = e * e.transpose();
    return d.ddf * proj + (d.df / t) * (Mat::Identity(n, n) - proj);
}

}  // namespace

double ScalarField::operator()(Point p) const {
    p = clamp_to_domain(p);
    switch (kind) {
        case Kind::Constant: return base;
        case Kind::Linear: return base + scale * p.x;
        case Kind::HolderBump:
            return base + scale * std::pow(dist(p, center), beta);
        case Kind::Smoothstep:
            return base +
                   scale * smoothstep01((p.x - edge0) / (edge1 - edge0));
        case Kind::Custom: return fn(p);
    }
    return base;
}

double ScalarField::modulus(double r) const {
    r = std::max(r, 0.0);
    switch (kind) {
        case Kind::Constant: return 0.0;
        case Kind::Linear: return std::abs(scale) * std::min(r, 1.0);
        case Kind::HolderBump:
        case Kind::Custom:
            return std::abs(scale) * std::pow(std::min(r, M_SQRT2), beta);
        case Kind::Smoothstep:
            return std::abs(scale) *
                   std::min(1.0, 1.5 * r / std::max(1e-12, edge1 - edge0));
    }
    return 0.0;
}

double ScalarField::min_value() const {
    double m = (*this)({0.0, 0.0});
    for (int i = 0; i <= 64; ++i)
        for (int j = 0; j <= 64; ++j)
            m = std::min(m, (*this)({i / 64.0, j / 64.0}));
    return m;
}

double ScalarField::max_value() const {
    double m = (*this)({0.0, 0.0});
    for (int i = 0; i <= 64; ++i)
        for (int j = 0; j <= 64; ++j)
            m = std::max(m, (*this)({i / 64.0, j / 64.0}));
    return m;
}

Mat VectorField::jacobian(Point x, const Vec& xi) const {
    if (jac) return jac(x, xi);
    return fd_jacobian(*this, x, xi, std::max(1e-7, 1e-6 * xi.norm()));
}

VectorField VectorField::frozen(Point x0) const {
    VectorField out = *this;
    out.autonomous = true;
    auto e = eval;
    out.eval = [e, x0](Point, const Vec& xi) { return e(x0, xi); };
    if (jac) {
        auto j = jac;
        out.jac = [j, x0](Point, const Vec& xi) { return j(x0, xi); };
    }
    return out;
}

VectorField Lagrangian::derivative() const {
    VectorField A;
    A.dim = dim;
    A.sc = sc;
    A.autonomous = autonomous;
    A.eval = grad;
    A.jac = hess;
    return A;
}

Lagrangian Lagrangian::frozen(Point x0) const {
    Lagrangian out = *this;
    out.autonomous = true;
    auto e = eval;
    out.eval = [e, x0](Point, const Vec& xi) { return e(x0, xi); };
    auto g = grad;
    out.grad = [g, x0](Point, const Vec& xi) { return g(x0, xi); };
    auto h = hess;
    out.hess = [h, x0](Point, const Vec& xi) { return h(x0, xi); };
    return out;
}

GMap a_minus_one(const VectorField& A) {
    GMap g;
    g.dim = A.dim;
    g.autonomous = A.autonomous;
    auto e = A.eval;
    g.eval = [e](Point x, const Vec& xi) -> Vec {
        const double t = xi.norm();
        if (t == 0.0) return Vec::Zero(xi.size());
        return t * e(x, xi);
    };
    return g;
}

GMap g_of_lagrangian(const Lagrangian& F) {
    GMap g;
    g.dim = F.dim;
    g.autonomous = F.autonomous;
    auto e = F.eval;
    g.eval = [e](Point x, const Vec& xi) -> Vec {
        Vec v(1);
        v(0) = e(x, xi);
        return v;
    };
    return g;
}

Mat fd_jacobian(const VectorField& A, Point x, const Vec& xi, double h) {
    const int n = static_cast<int>(xi.size());
    Mat J(n, n);
    for (int j = 0; j < n; ++j) {
        Vec lo = xi, hi = xi;
        lo(j) -= h;
        hi(j) += h;
        J.col(j) = (A(x, hi) - A(x, lo)) / (2.0 * h);
    }
    return J;
}

namespace {

Model make_p_laplace(const ModelSpec& spec) {
    const double p = spec.p;
    if (!(p > 1.0)) throw ParamError("p_laplace: requires p > 1");
    Model m;
    m.spec = spec;
    m.variational = true;
    const int n = spec.dim;
    m.F.dim = n;
    m.F.autonomous = true;
    m.F.sc = {p, p, 1.0};
    m.F.eval = [p](Point, const Vec& xi) { return std::pow(xi.norm(), p) / p; };
    m.F.grad = [p, n](Point, const Vec& xi) -> Vec {
        const double t = xi.norm();
        if (t == 0.0) return Vec::Zero(n);
        return std::pow(t, p - 2.0) * xi;
    };
    m.F.hess = [p](Point, const Vec& xi) -> Mat {
        RadialDerivs d;
        const double t = xi.norm();
        d.df = std::pow(t, p - 1.0);
        d.ddf = (p - 1.0) * std::pow(t, p - 2.0);
        return radial_hess(xi, d);
    };
    m.A = m.F.derivative();
    return m;
}

Model make_variable_exponent(const ModelSpec& spec) {
    ScalarField pf = spec.exponent;
    const double pmin = pf.min_value(), pmax = pf.max_value();
    if (!(pmin > 1.0))
        throw ParamError("variable_exponent: requires inf p(x) > 1");
    Model m;
    m.spec = spec;
    m.variational = true;
    const int n = spec.dim;
    const double L =
        std::max({pmax - 1.0, 1.0 / (pmin - 1.0), 1.0});
    m.F.dim = n;
    m.F.sc = {pmin, pmax, L};
    m.F.autonomous = pf.is_constant();
    m.F.eval = [pf](Point x, const Vec& xi) {
        const double p = pf(x);
        return std::pow(xi.norm(), p) / p;
    };
    m.F.grad = [pf, n](Point x, const Vec& xi) -> Vec {
        const double t = xi.norm();
        if (t == 0.0) return Vec::Zero(n);
        return std::pow(t, pf(x) - 2.0) * xi;
    };
    m.F.hess = [pf](Point x, const Vec& xi) -> Mat {
        const double p = pf(x);
        RadialDerivs d;
        const double t = xi.norm();
        d.df = std::pow(t, p - 1.0);
        d.ddf = (p - 1.0) * std::pow(t, p - 2.0);
        return radial_hess(xi, d);
    };
    m.A = m.F.derivative();
    return m;
}

Model make_double_phase(const ModelSpec& spec, bool orlicz) {
    const double p = spec.p, q = spec.q > 0.0 ? spec.q : spec.p;
    if (!(p > 1.0 && q >= p))
        throw ParamError("double_phase: requires 1 < p <= q");
    ScalarField a = spec.coefficient;
    if (a.min_value() < 0.0)
        throw ParamError("double_phase: requires a(x) >= 0");
    if (a.kind == ScalarField::Kind::HolderBump &&
        !(a.beta > 0.0 && a.beta <= 1.0))
        throw ParamError("double_phase: requires beta in (0,1]");

    // Radial profile f(x,t) = g(t) + a(x) t^q with g(t) = t^p for the
    // plain phase and g(t) = t^p log(e+t) for the Orlicz variant.
    auto g3 = [p, orlicz](double t) -> RadialDerivs {
        RadialDerivs d;
        if (!orlicz) {
            d.f = std::pow(t, p);
            d.df = p * std::pow(t, p - 1.0);
            d.ddf = p * (p - 1.0) * std::pow(t, p - 2.0);
            return d;
        }
        const double lg = std::log1p(t / M_E) + 1.0;  // log(e+t)
        const double tp = std::pow(t, p);
        d.f = tp * lg;
        d.df = p * std::pow(t, p - 1.0) * lg + tp / (M_E + t);
        d.ddf = p * (p - 1.0) * std::pow(t, p - 2.0) * lg +
                2.0 * p * std::pow(t, p - 1.0) / (M_E + t) -
                tp / ((M_E + t) * (M_E + t));
        return d;
    };

    Model m;
    m.spec = spec;
    m.variational = true;
    const int n = spec.dim;
    const double amax = a.max_value();
    const double qeff = orlicz ? std::max(q, p + 0.25) : q;
    m.F.dim = n;
    m.F.sc = {p, qeff, std::max(1.0, (1.0 + amax) * q * (q + 1.0))};
    m.F.autonomous = a.is_constant();
    m.F.eval = [g3, a, q](Point x, const Vec& xi) {
        const double t = xi.norm();
        return g3(t).f + a(x) * std::pow(t, q);
    };
    m.F.grad = [g3, a, q, n](Point x, const Vec& xi) -> Vec {
        const double t = xi.norm();
        if (t == 0.0) return Vec::Zero(n);
        const double df = g3(t).df + a(x) * q * std::pow(t, q - 1.0);
        return (df / t) * xi;
    };
    m.F.hess = [g3, a, q](Point x, const Vec& xi) -> Mat {
        const double t = xi.norm();
        const double ax = a(x);
        RadialDerivs d = g3(t);
        d.df += ax * q * std::pow(t, q - 1.0);
        d.ddf += ax * q * (q - 1.0) * std::pow(t, q - 2.0);
        return radial_hess(xi, d);
    };
    m.A = m.F.derivative();
    return m;
}

Model make_aniso_quartic(const ModelSpec& spec) {
    const double p = spec.p, q = spec.q > 0.0 ? spec.q : spec.p;
    if (!(p > 1.0 && q >= p))
        throw ParamError("aniso_quartic: requires 1 < p <= q");
    ScalarField a = spec.coefficient;
    ScalarField w = spec.weight;
    if (a.min_value() < 0.0)
        throw ParamError("aniso_quartic: requires a(x) >= 0");
    if (!(w.min_value() > 0.0))
        throw ParamError("aniso_quartic: requires inf gamma(x) > 0");
    const bool literal = spec.literal_quartic;

    auto H = [p, q](double ax, double t) -> RadialDerivs {
        RadialDerivs d;
        d.f = std::pow(t, p) + ax * std::pow(t, q);
        d.df = p * std::pow(t, p - 1.0) + ax * q * std::pow(t, q - 1.0);
        d.ddf = p * (p - 1.0) * std::pow(t, p - 2.0) +
                ax * q * (q - 1.0) * std::pow(t, q - 2.0);
        return d;
    };

    Model m;
    m.spec = spec;
    m.variational = true;
    const int n = spec.dim;
    m.F.dim = n;
    m.F.sc = {p, q,
              std::max(1.0, 4.0 * w.max_value() / w.min_value() *
                                (1.0 + a.max_value()) * q * (q + 1.0))};
    m.F.autonomous = a.is_constant() && w.is_constant();

    // Default argument of H: m(xi) = (xi_1^4+...+xi_n^4 + |xi|^4)^(1/4).
    // The raw quartic sum alone has zero curvature along the coordinate
    // axes, which destroys sphere-wise ellipticity; the |xi|^4 blend
    // keeps the anisotropy and the 1-homogeneity while staying uniformly
    // elliptic. The literal flag feeds H the raw sum.
    auto quartic_sum = [literal](const Vec& xi) {
        double s = 0.0;
        for (int i = 0; i < xi.size(); ++i) s += std::pow(xi(i), 4);
        if (!literal) s += std::pow(xi.squaredNorm(), 2);
        return s;
    };
    // c_i = d(s)/d(xi_i) / 4
    auto s_grad4 = [literal](const Vec& xi) -> Vec {
        Vec c(xi.size());
        for (int i = 0; i < xi.size(); ++i) c(i) = std::pow(xi(i), 3);
        if (!literal) c += xi.squaredNorm() * xi;
        return c;
    };

    m.F.eval = [H, a, w, quartic_sum, literal](Point x, const Vec& xi) {
        const double s = quartic_sum(xi);
        const double arg = literal ? s : std::pow(s, 0.25);
        return w(x) * H(a(x), arg).f;
    };
    m.F.grad = [H, a, w, quartic_sum, s_grad4, literal, n](
                   Point x, const Vec& xi) -> Vec {
        const double s = quartic_sum(xi);
        if (s == 0.0) return Vec::Zero(n);
        const Vec c = s_grad4(xi);
        if (literal) {
            const RadialDerivs d = H(a(x), s);
            return w(x) * d.df * 4.0 * c;
        }
        const double mval = std::pow(s, 0.25);
        const RadialDerivs d = H(a(x), mval);
        // D m = c / m^3
        return w(x) * d.df / (mval * mval * mval) * c;
    };
    m.F.hess = [H, a, w, quartic_sum, s_grad4, literal, n](
                   Point x, const Vec& xi) -> Mat {
        const double s = quartic_sum(xi);
        const Vec c = s_grad4(xi);
        // d2s(i,j)/4 = 3 xi_i^2 delta_ij (+ |xi|^2 delta_ij + 2 xi_i xi_j)
        Mat d2s4 = Mat::Zero(n, n);
        for (int i = 0; i < n; ++i) d2s4(i, i) = 3.0 * xi(i) * xi(i);
        if (!literal) {
            d2s4 += 2.0 * (xi * xi.transpose());
            const double n2 = xi.squaredNorm();
            for (int i = 0; i < n; ++i) d2s4(i, i) += n2;
        }
        if (literal) {
            const RadialDerivs d = H(a(x), s);
            return w(x) * (16.0 * d.ddf * (c * c.transpose()) +
                           4.0 * d.df * d2s4);
        }
        const double mval = std::pow(s, 0.25);
        const RadialDerivs d = H(a(x), mval);
        const double m3 = mval * mval * mval;
        const double m7 = m3 * m3 * mval;
        const Vec dm = c / m3;
        const Mat d2m = d2s4 / m3 - 3.0 * (c * c.transpose()) / m7;
        return w(x) * (d.ddf * (dm * dm.transpose()) + d.df * d2m);
    };
    m.A = m.F.derivative();
    return m;
}

}  // namespace

Model build_model(const ModelSpec& spec) {
    if (spec.dim < 2) throw ParamError("model: requires dim >= 2");
    if (spec.family == "p_laplace") return make_p_laplace(spec);
    if (spec.family == "variable_exponent")
        return make_variable_exponent(spec);
    if (spec.family == "double_phase") return make_double_phase(spec, false);
    if (spec.family == "orlicz_double_phase")
        return make_double_phase(spec, true);
    if (spec.family == "aniso_quartic") return make_aniso_quartic(spec);
    std::string families;
    for (const auto& f : model_registry()) families += " " + f.name;
    throw ParamError("unknown model family '" + spec.family +
                     "'; known families:" + families);
}

std::vector<FamilyInfo> model_registry() {
    return {
        {"p_laplace", "p",
         "isotropic power growth, A = |xi|^(p-2) xi"},
        {"variable_exponent", "exponent field p(x) > 1",
         "A(x,xi) = |xi|^(p(x)-2) xi with F = |xi|^p(x)/p(x)"},
        {"double_phase", "p <= q, coefficient field a(x) >= 0",
         "F(x,xi) = |xi|^p + a(x)|xi|^q"},
        {"orlicz_double_phase", "p <= q, coefficient field a(x) >= 0",
         "F(x,xi) = |xi|^p log(e+|xi|) + a(x)|xi|^q"},
        {"aniso_quartic",
         "p <= q, coefficient a(x) >= 0, weight gamma(x) > 0",
         "F(x,xi) = gamma(x) H(x, (xi_1^4+...+xi_n^4+|xi|^4)^(1/4))"},
    };
}

QuasiIsotropyReport check_quasi_isotropy(const VectorField& A,
                                         const std::vector<Point>& xs,
                                         const std::vector<double>& radii,
                                         int directions, std::uint64_t seed) {
    if (directions < 16)
        throw ParamError("check_quasi_isotropy: needs >= 16 directions");
    const auto dirs = sphere_directions(A.dim, directions, seed);
    QuasiIsotropyReport rep;
    for (const Point& x : xs) {
        for (double t : radii) {
            double top = 0.0;
            double bottom = std::numeric_limits<double>::infinity();
            for (const Vec& e : dirs) {
                Mat J = A.jacobian(x, t * e);
                top = std::max(top, operator_norm(J));
                bottom = std::min(bottom, quadform_range(J)[0]);
            }
            if (!(bottom > 0.0)) {
                rep.elliptic = false;
                rep.failure = {x, t};
                rep.L = std::numeric_limits<double>::infinity();
                return rep;
            }
            const double ratio = top / bottom;
            if (ratio > rep.L) {
                rep.L = ratio;
                rep.worst = {x, t};
            }
        }
    }
    return rep;
}

}  // namespace qig
