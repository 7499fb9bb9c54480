#include "qig/approx.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "qig/sampling.hpp"

namespace qig {

double Cubic::value(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    return u * u * (3.0 - 2.0 * u);
}
double Cubic::d1(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    return 6.0 * u * (1.0 - u);
}
double Cubic::d2(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    return 6.0 - 12.0 * u;
}

double Quintic::value(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}
double Quintic::d1(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    return 30.0 * u * u * (1.0 - u) * (1.0 - u);
}
double Quintic::d2(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    return 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u);
}

Eta::Eta(Shape shape, double lo, double hi) : shape_(shape), lo_(lo), hi_(hi) {
    if (!(hi > lo)) throw ParamError("Eta: empty transition interval");
}

double Eta::value(double t) const {
    const double u = (t - lo_) / (hi_ - lo_);
    switch (shape_) {
        case Shape::CubicDown:
            return std::clamp(1.0 - Cubic::value(u), 0.0, 1.0);
        case Shape::CubicUp: return Cubic::value(u);
        case Shape::QuinticDown:
            return std::clamp(1.0 - Quintic::value(u), 0.0, 1.0);
    }
    return 0.0;
}

double Eta::d1(double t) const {
    const double w = hi_ - lo_;
    const double u = (t - lo_) / w;
    switch (shape_) {
        case Shape::CubicDown: return -Cubic::d1(u) / w;
        case Shape::CubicUp: return Cubic::d1(u) / w;
        case Shape::QuinticDown: return -Quintic::d1(u) / w;
    }
    return 0.0;
}

double Eta::d2(double t) const {
    const double w = hi_ - lo_;
    const double u = (t - lo_) / w;
    switch (shape_) {
        case Shape::CubicDown: return -Cubic::d2(u) / (w * w);
        case Shape::CubicUp: return Cubic::d2(u) / (w * w);
        case Shape::QuinticDown: return -Quintic::d2(u) / (w * w);
    }
    return 0.0;
}

EtaIntegral::EtaIntegral(double t2) : t2_(t2), a_(t2 / 2.0), b_(0.75 * t2) {
    if (!(t2 > 0.0)) throw ParamError("EtaIntegral: t2 > 0 required");
    value_at_b_ = 4.0 * antiderivative(1.0);
}

double EtaIntegral::antiderivative(double u) const {
    // int_0^u Q(v)/(2+v)^2 dv with Q the quintic step, in the ramp
    // variable u = (s-a)/w; a = 2w always, so the form is universal.
    // The u, u^2, u^3 coefficients cancel against the log and rational
    // parts (h has a triple zero at u = 0), rendering evaluation stable.
    return -412.0 * u + 71.0 * u * u - 13.0 * u * u * u +
           1.5 * u * u * u * u + 1080.0 * std::log1p(0.5 * u) -
           256.0 * u / (2.0 + u);
}

double EtaIntegral::h(double t) const {
    if (t <= a_) return 0.0;
    if (t >= b_) return t2_;
    return t2_ * Quintic::value((t - a_) / (b_ - a_));
}

double EtaIntegral::h_slope_max() const {
    return t2_ * (15.0 / 8.0) / (b_ - a_);
}

double EtaIntegral::value(double t) const {
    if (t <= a_) return 0.0;
    if (t <= b_) return 4.0 * antiderivative((t - a_) / (b_ - a_));
    return value_at_b_ + t2_ * (1.0 / b_ - 1.0 / t);
}

double EtaIntegral::d1(double t) const {
    if (t <= a_) return 0.0;
    return h(t) / (t * t);
}

double EtaIntegral::d2(double t) const {
    if (t <= a_) return 0.0;
    double hp = 0.0;
    if (t > a_ && t < b_) hp = t2_ * Quintic::d1((t - a_) / (b_ - a_)) / (b_ - a_);
    return hp / (t * t) - 2.0 * h(t) / (t * t * t);
}

PhiFunction build_phibar(const GrowthCertificate& cert, Point x0, double t1,
                         double t2) {
    if (!(t1 > 0.0 && t1 < 1.0 && t2 > 1.0))
        throw ParamError("build_phibar: requires 0 < t1 < 1 < t2");
    const double p = cert.p1;
    const double a1 = cert.phi_slope(x0, t1);
    const double a2 = cert.phi_slope(x0, t2);
    const double phi_t1 = cert.phi_value(x0, t1);
    const double phi_t2 = cert.phi_value(x0, t2);
    const double head = a1 * t1 / p;  // phibar(t1)
    const double mid_at_t2 = head + (phi_t2 - phi_t1);
    auto cert_copy = cert;

    auto slope = [cert_copy, x0, t1, t2, a1, a2, p](double t) {
        if (t <= t1) return a1 * std::pow(t / t1, p - 1.0);
        if (t >= t2) return a2 * std::pow(t / t2, p - 1.0);
        return cert_copy.phi_slope(x0, t);
    };
    auto value = [cert_copy, x0, t1, t2, a1, a2, p, head, phi_t1,
                  mid_at_t2](double t) {
        if (t <= t1) return a1 * t1 / p * std::pow(t / t1, p);
        if (t <= t2) return head + cert_copy.phi_value(x0, t) - phi_t1;
        return mid_at_t2 + a2 * t2 / p * (std::pow(t / t2, p) - 1.0);
    };
    PhiMeta meta{p, cert.q1, 2.0};
    return PhiFunction::make_autonomous(value, slope, meta);
}

PhibarChecks check_phibar(const GrowthCertificate& cert,
                               const PhiFunction& phibar, double Ltilde,
                               const Ball& ball, double t1, double t2) {
    PhibarChecks rep;
    const Point x0 = ball.center;
    const double p = cert.p1, q1 = cert.q1;
    const Point origin{0, 0};

    // hypothesis: phi^+ <= Ltilde phi^- on [t1, t2]
    rep.hypothesis_worst = 0.0;
    for (double t : log_grid(t1, t2, 33)) {
        const double lo = cert.phi_inf_ball(ball, t);
        const double hi = cert.phi_sup_ball(ball, t);
        if (lo > 0.0) rep.hypothesis_worst =
            std::max(rep.hypothesis_worst, hi / lo);
    }
    rep.hypothesis_ok = rep.hypothesis_worst <= Ltilde * (1.0 + 1e-9);

    // (1) phibar' satisfies Inc(p-1) and Dec(q1-1) exactly
    {
        PhiFunction prime = PhiFunction::make_autonomous(
            [phibar, origin](double t) { return phibar.deriv(origin, t); },
            nullptr, {});
        SampleGrid g = SampleGrid::autonomous(97, t1 / 100.0, t2 * 100.0);
        auto inc = check_condition(prime, Condition::Inc, p - 1.0, g);
        auto dec = check_condition(prime, Condition::Dec, q1 - 1.0, g);
        rep.prime_inc_constant = inc.witnessed_constant;
        rep.prime_dec_constant = dec.witnessed_constant;
        rep.prime_pass = inc.pass && dec.pass;
    }

    // (2) on [t1,t2]: phibar - phi(x0,.) == head offset, ratio <= q1/p,
    // and phi(x,.) <= Ltilde phibar
    {
        const double offset =
            phibar(origin, t1) - cert.phi_value(x0, t1);
        double up = 0.0, low = 0.0, ident = 0.0;
        for (double t : log_grid(t1, t2, 33)) {
            const double pb = phibar(origin, t);
            const double ph = cert.phi_value(x0, t);
            up = std::max(up, pb / ph);
            ident = std::max(ident, std::abs((pb - ph) - offset) /
                                        (1.0 + pb));
            low = std::max(low,
                           cert.phi_sup_ball(ball, t) / (Ltilde * pb));
        }
        rep.mid_offset = offset;
        rep.mid_identity = ident;
        rep.mid_upper = up;
        rep.ball_lower = low;
        rep.mid_pass = offset >= -1e-12 && ident <= 1e-9 &&
                         up <= q1 / p * (1.0 + 1e-9) && low <= 1.0 + 1e-9;
    }

    // (3) phibar <= (q1/p) Ltilde phi(x, .) on [t1, inf)
    {
        rep.envelope_bound = q1 / p * Ltilde;
        double worst = 0.0;
        for (double t : log_grid(t1, 1e4 * t2, 65)) {
            const double pb = phibar(origin, t);
            const double lo = cert.phi_inf_ball(ball, t);
            if (lo > 0.0) worst = std::max(worst, pb / lo);
        }
        rep.envelope_factor = worst;
        rep.envelope_pass = worst <= rep.envelope_bound * (1.0 + 1e-9);
    }

    // (4) theta0(x,t) = phi(x, phibar^-1(t))
    {
        auto cert_copy = cert;
        auto pb = phibar;
        PhiFunction theta = PhiFunction::make(
            [cert_copy, pb](Point x, double t) {
                const double tau = left_inverse(pb, {0, 0}, t);
                return cert_copy.phi_value(x, tau);
            },
            nullptr, {});
        SampleGrid g;
        g.t = log_grid(phibar(origin, t1 / 4.0), phibar(origin, 4.0 * t2),
                       49);
        const auto idx = cert.lattice_in_ball(ball);
        for (auto i : idx) g.x.push_back(cert.lattice()[i]);
        auto a0 = check_condition(theta, Condition::A0, 0.0, g, 1e300);
        auto ainc = check_condition(theta, Condition::aInc, 1.0, g, 1e300);
        auto adec =
            check_condition(theta, Condition::aDec, q1 / p, g, 1e300);
        rep.compose_a0 = a0.witnessed_constant;
        rep.compose_ainc = ainc.witnessed_constant;
        rep.compose_adec = adec.witnessed_constant;
        const double cap =
            std::max(4.0, 4.0 * Ltilde * q1 / p * cert.Lambda *
                              std::max(1.0, 1.0 / cert.nu));
        rep.compose_pass = rep.compose_a0 <= cap && rep.compose_ainc <= cap &&
                         rep.compose_adec <= cap;
    }

    rep.pass = rep.hypothesis_ok && rep.prime_pass && rep.mid_pass &&
               rep.envelope_pass && rep.compose_pass;
    return rep;
}

namespace {

// D_xi(eta(|xi|) |xi|^(p-2) xi), the tensor identity shared by the power
// terms of both approximants.
Mat power_term_jacobian(const Vec& xi, double p, double eta, double etad) {
    const double t = xi.norm();
    const int n = static_cast<int>(xi.size());
    const Vec e = xi / t;
    const Mat outer = e * e.transpose();
    const double tp2 = std::pow(t, p - 2.0);
    return etad * tp2 * t * outer + (p - 2.0) * eta * tp2 * outer +
           eta * tp2 * Mat::Identity(n, n);
}

struct FbarTerms {
    double nuBar;
    double LambdaBar;
    double c1;  // a1 / t1^(p-1)
    double c2;  // a2 / t2^(p-1)
    double p;
    Eta eta1, eta2;
    EtaIntegral eta3;
    Lagrangian F0;  // frozen F(x0, .)
};

double fbar_value(const FbarTerms& T, const Vec& xi) {
    const double t = xi.norm();
    double out = 0.0;
    const double e1 = T.eta1.value(t);
    if (e1 != 0.0) out += T.nuBar * e1 * T.c1 * std::pow(t, T.p);
    const double e2 = T.eta2.value(t);
    if (e2 != 0.0) out += e2 * T.F0({0, 0}, xi);
    const double e3 = T.eta3.value(t);
    if (e3 != 0.0) out += T.LambdaBar * e3 * T.c2 * std::pow(t, T.p);
    return out;
}

Vec fbar_grad(const FbarTerms& T, const Vec& xi) {
    const double t = xi.norm();
    const int n = static_cast<int>(xi.size());
    if (t == 0.0) return Vec::Zero(n);
    Vec out = Vec::Zero(n);
    // power terms: d/dxi [eta(t) t^p] = (eta' t + p eta) t^(p-2) xi
    const double e1 = T.eta1.value(t), e1d = T.eta1.d1(t);
    if (e1 != 0.0 || e1d != 0.0)
        out += T.nuBar * T.c1 * (e1d * t + T.p * e1) *
               std::pow(t, T.p - 2.0) * xi;
    const double e2 = T.eta2.value(t), e2d = T.eta2.d1(t);
    if (e2 != 0.0 || e2d != 0.0) {
        if (e2d != 0.0)
            out += e2d * T.F0({0, 0}, xi) / t * xi;
        if (e2 != 0.0) out += e2 * T.F0.grad({0, 0}, xi);
    }
    const double e3 = T.eta3.value(t), e3d = T.eta3.d1(t);
    if (e3 != 0.0 || e3d != 0.0)
        out += T.LambdaBar * T.c2 * (e3d * t + T.p * e3) *
               std::pow(t, T.p - 2.0) * xi;
    return out;
}

Mat radial_scalar_hessian(const Vec& xi, double g1, double g2) {
    // Hessian of xi -> g(|xi|) given g'(t)=g1, g''(t)=g2
    const double t = xi.norm();
    const int n = static_cast<int>(xi.size());
    const Vec e = xi / t;
    const Mat outer = e * e.transpose();
    return g2 * outer + g1 / t * (Mat::Identity(n, n) - outer);
}

Mat fbar_hess(const FbarTerms& T, const Vec& xi) {
    const double t = xi.norm();
    const int n = static_cast<int>(xi.size());
    Mat out = Mat::Zero(n, n);
    // g(t) = eta(t) t^p terms
    auto add_power = [&](double coef, const double e, const double ed,
                         const double edd) {
        if (e == 0.0 && ed == 0.0 && edd == 0.0) return;
        const double tp = std::pow(t, T.p);
        const double g1 = ed * tp + T.p * e * std::pow(t, T.p - 1.0);
        const double g2 = edd * tp + 2.0 * T.p * ed * std::pow(t, T.p - 1.0) +
                          T.p * (T.p - 1.0) * e * std::pow(t, T.p - 2.0);
        out += coef * radial_scalar_hessian(xi, g1, g2);
    };
    add_power(T.nuBar * T.c1, T.eta1.value(t), T.eta1.d1(t), T.eta1.d2(t));
    add_power(T.LambdaBar * T.c2, T.eta3.value(t), T.eta3.d1(t),
              T.eta3.d2(t));

    const double e2 = T.eta2.value(t), e2d = T.eta2.d1(t),
                 e2dd = T.eta2.d2(t);
    if (e2 != 0.0 || e2d != 0.0 || e2dd != 0.0) {
        const Vec e = xi / t;
        const Mat outer = e * e.transpose();
        const double f = T.F0({0, 0}, xi);
        const Vec df = T.F0.grad({0, 0}, xi);
        if (e2dd != 0.0 || e2d != 0.0) {
            out += e2dd * f * outer;
            out += e2d * (e * df.transpose() + df * e.transpose());
            out += e2d * f / t * (Mat::Identity(n, n) - outer);
        }
        if (e2 != 0.0) out += e2 * T.F0.hess({0, 0}, xi);
    }
    return out;
}

double eta_triple_bound(const Eta& eta, double lo, double hi) {
    double c = 0.0;
    for (double t : log_grid(lo / 4.0, hi * 4.0, 257))
        c = std::max(c, eta.value(t) + t * std::abs(eta.d1(t)) +
                            t * t * std::abs(eta.d2(t)));
    return c;
}

}  // namespace

ApproximationBundle build_abar(const VectorField& A,
                               const GrowthCertificate& cert, Point x0,
                               double t1, double t2) {
    if (!(t1 > 0.0 && t1 < 1.0 && t2 > 1.0))
        throw ParamError("build_abar: requires 0 < t1 < 1 < t2");
    ApproximationBundle b;
    b.x0 = x0;
    b.t1 = t1;
    b.t2 = t2;
    b.p = cert.p1;
    b.q1 = cert.q1;
    b.nu = cert.nu;
    b.Lambda = cert.Lambda;
    b.a1 = cert.phi_slope(x0, t1);
    b.a2 = cert.phi_slope(x0, t2);
    b.LambdaBar = std::pow(2.0, b.q1 - b.p + 3.0) * b.Lambda /
                  std::min(b.p - 1.0, 1.0);
    b.phibar = build_phibar(cert, x0, t1, t2);

    const Eta eta1(Eta::Shape::CubicDown, t1, 2.0 * t1);
    const Eta eta2(Eta::Shape::CubicDown, t2, 2.0 * t2);
    const Eta eta3(Eta::Shape::CubicUp, 0.5 * t2, t2);
    b.eta_bound_C = std::max({eta_triple_bound(eta1, t1, 2 * t1),
                              eta_triple_bound(eta2, t2, 2 * t2),
                              eta_triple_bound(eta3, t2 / 2, t2)});

    const double c1 = b.a1 / std::pow(t1, b.p - 1.0);
    const double c2 = b.a2 / std::pow(t2, b.p - 1.0);
    const double nu8 = b.nu / 8.0;
    const double lam = b.LambdaBar;
    const double p = b.p;
    const VectorField A0 = A.frozen(x0);
    const int n = A.dim;

    VectorField abar;
    abar.dim = n;
    abar.autonomous = true;
    abar.sc = {p, b.q1, A.sc.L};
    abar.eval = [eta1, eta2, eta3, c1, c2, nu8, lam, p, A0, n](
                    Point, const Vec& xi) -> Vec {
        const double t = xi.norm();
        if (t == 0.0) return Vec::Zero(n);
        Vec out = Vec::Zero(n);
        const double e1 = eta1.value(t);
        if (e1 != 0.0) out += nu8 * e1 * c1 * std::pow(t, p - 2.0) * xi;
        const double e2 = eta2.value(t);
        if (e2 != 0.0) out += e2 * A0({0, 0}, xi);
        const double e3 = eta3.value(t);
        if (e3 != 0.0) out += lam * e3 * c2 * std::pow(t, p - 2.0) * xi;
        return out;
    };
    abar.jac = [eta1, eta2, eta3, c1, c2, nu8, lam, p, A0, n](
                   Point, const Vec& xi) -> Mat {
        const double t = xi.norm();
        Mat out = Mat::Zero(n, n);
        const double e1 = eta1.value(t), e1d = eta1.d1(t);
        if (e1 != 0.0 || e1d != 0.0)
            out += nu8 * c1 * power_term_jacobian(xi, p, e1, e1d);
        const double e2 = eta2.value(t), e2d = eta2.d1(t);
        if (e2 != 0.0 || e2d != 0.0) {
            if (e2d != 0.0)
                out += e2d / t * (A0({0, 0}, xi) * xi.transpose());
            if (e2 != 0.0) out += e2 * A0.jacobian({0, 0}, xi);
        }
        const double e3 = eta3.value(t), e3d = eta3.d1(t);
        if (e3 != 0.0 || e3d != 0.0)
            out += lam * c2 * power_term_jacobian(xi, p, e3, e3d);
        return out;
    };
    b.abar = std::move(abar);
    b.has_abar = true;
    return b;
}

ApproximationBundle build_fbar(const Lagrangian& F,
                               const GrowthCertificate& cert, Point x0,
                               double t1, double t2) {
    if (!(t1 > 0.0 && t1 < 1.0 && t2 > 1.0))
        throw ParamError("build_fbar: requires 0 < t1 < 1 < t2");
    ApproximationBundle b;
    b.x0 = x0;
    b.t1 = t1;
    b.t2 = t2;
    b.p = cert.p1;
    b.q1 = cert.q1;
    b.nu = cert.nu;
    b.Lambda = cert.Lambda;
    b.a1 = cert.phi_slope(x0, t1);
    b.a2 = cert.phi_slope(x0, t2);
    b.phibar = build_phibar(cert, x0, t1, t2);

    FbarTerms T{b.nu / 8.0,
                std::pow(2.0, b.q1 - b.p + 3.0) * b.Lambda /
                    std::min(b.p - 1.0, 1.0),
                b.a1 / std::pow(t1, b.p - 1.0),
                b.a2 / std::pow(t2, b.p - 1.0),
                b.p,
                Eta(Eta::Shape::QuinticDown, t1, 2.0 * t1),
                Eta(Eta::Shape::QuinticDown, t2, 2.0 * t2),
                EtaIntegral(t2),
                F.frozen(x0)};
    const int n = F.dim;
    const auto dirs = sphere_directions(n, 16, 0);
    const PhiFunction& pb = b.phibar;
    const Point origin{0, 0};

    // Shell ellipticity with the current (nuBar, LambdaBar).
    auto shell_min = [&](double lo, double hi) {
        double worst = std::numeric_limits<double>::infinity();
        for (double t : log_grid(lo, hi, 17)) {
            const double dphi = pb.deriv(origin, t);
            for (const Vec& e : dirs) {
                const Mat H = fbar_hess(T, t * e);
                worst =
                    std::min(worst, quadform_range(H)[0] * t / dphi);
            }
        }
        return worst;
    };

    // "nuBar small enough": the (t1, 2t1] shell must keep a definite
    // fraction of the frozen ellipticity (the negative eta-derivative
    // terms scale with nuBar, so halving converges); mirror with
    // LambdaBar large enough on (t2, 2t2]. Both loops are bounded. The
    // 0.6 nu floor keeps the certified constants uniform in (t1, t2).
    const double target = 0.6 * b.nu;
    int steps = 0;
    while (shell_min(t1 * 1.0001, 2.0 * t1) < target && steps < 40) {
        T.nuBar *= 0.5;
        ++steps;
    }
    if (steps >= 40) {
        std::ostringstream os;
        os << "build_fbar: lower-shell calibration failed (worst ratio "
           << shell_min(t1 * 1.0001, 2.0 * t1) << " at nuBar=" << T.nuBar
           << ")";
        throw EvalError(os.str());
    }
    steps = 0;
    while (shell_min(t2 * 1.0001, 2.0 * t2) < target && steps < 40) {
        T.LambdaBar *= 2.0;
        ++steps;
    }
    if (steps >= 40)
        throw EvalError("build_fbar: upper-shell calibration failed");
    b.nuBar = T.nuBar;
    b.LambdaBar = T.LambdaBar;

    double etaC = 0.0;
    for (double t : log_grid(t1 / 4.0, 8.0 * t2, 257)) {
        etaC = std::max(etaC, T.eta1.value(t) + t * std::abs(T.eta1.d1(t)) +
                                  t * t * std::abs(T.eta1.d2(t)));
        etaC = std::max(etaC, T.eta2.value(t) + t * std::abs(T.eta2.d1(t)) +
                                  t * t * std::abs(T.eta2.d2(t)));
        etaC = std::max(etaC, T.eta3.value(t) + t * std::abs(T.eta3.d1(t)) +
                                  t * t * std::abs(T.eta3.d2(t)));
    }
    b.eta_bound_C = etaC;

    Lagrangian fbar;
    fbar.dim = n;
    fbar.autonomous = true;
    fbar.sc = {b.p, b.q1, F.sc.L};
    fbar.eval = [T](Point, const Vec& xi) { return fbar_value(T, xi); };
    fbar.grad = [T](Point, const Vec& xi) { return fbar_grad(T, xi); };
    fbar.hess = [T](Point, const Vec& xi) { return fbar_hess(T, xi); };
    b.fbar = std::move(fbar);
    b.has_fbar = true;
    return b;
}

ApproxGrowthReport verify_growth_of_approx(const VectorField& abar,
                                           const PhiFunction& phibar,
                                           double t1, double t2, int dirs_n,
                                           std::uint64_t seed) {
    ApproxGrowthReport rep;
    const auto dirs = sphere_directions(abar.dim, dirs_n, seed);
    const Point origin{0, 0};
    struct Case {
        const char* name;
        double lo, hi;
    };
    const Case cases[] = {
        {"(0,t1]", t1 / 64.0, t1},       {"(t1,2t1]", t1 * 1.0001, 2 * t1},
        {"annulus", 2 * t1, t2 / 2},     {"(t2/2,t2]", t2 / 2 * 1.0001, t2},
        {"(t2,2t2]", t2 * 1.0001, 2 * t2}, {"tail", 2 * t2, 32 * t2},
    };
    rep.nu = std::numeric_limits<double>::infinity();
    for (const Case& c : cases) {
        IntervalGrowth ig;
        ig.name = c.name;
        ig.nu = std::numeric_limits<double>::infinity();
        for (double t : log_grid(c.lo, c.hi, 25)) {
            const double dphi = phibar.deriv(origin, t);
            for (const Vec& e : dirs) {
                const Vec xi = t * e;
                const Mat J = abar.jacobian(origin, xi);
                const double opn = operator_norm(J);
                const double qmin = quadform_range(J)[0];
                const double amag = abar(origin, xi).norm();
                ig.nu = std::min(ig.nu, qmin * t / dphi);
                ig.Lambda = std::max(ig.Lambda, opn * t / dphi);
                ig.growth_constant = std::max(ig.growth_constant, (amag + opn * t) / dphi);
            }
        }
        if (!(ig.nu > 0.0) && rep.failed_interval.empty())
            rep.failed_interval = c.name;
        rep.nu = std::min(rep.nu, ig.nu);
        rep.Lambda = std::max(rep.Lambda, ig.Lambda);
        rep.growth_constant = std::max(rep.growth_constant, ig.growth_constant);
        rep.intervals.push_back(std::move(ig));
    }
    rep.pass = rep.nu > 0.0 && std::isfinite(rep.Lambda);
    return rep;
}

VectorField regularize_field(const VectorField& abar, double eps) {
    if (eps < 0.0 || eps >= 0.5)
        throw ParamError("regularize: eps in [0, 1/2) required");
    if (eps == 0.0) return abar;
    const int n = abar.dim;
    VectorField out;
    out.dim = n;
    out.autonomous = abar.autonomous;
    out.sc = abar.sc;
    const VectorField base = abar;
    out.eval = [base, eps, n](Point x, const Vec& xi) -> Vec {
        const double t = xi.norm();
        if (t == 0.0) return Vec::Zero(n);
        const Vec arg = (eps / t + 1.0) * xi;
        return base(x, arg) * (t / (eps + t));
    };
    out.jac = [base, eps, n](Point x, const Vec& xi) -> Mat {
        const double t = xi.norm();
        const Vec e = xi / t;
        const Mat outer = e * e.transpose();
        const Vec arg = (eps / t + 1.0) * xi;
        const double s = t / (eps + t);
        const Mat Dpsi =
            (1.0 + eps / t) * Mat::Identity(n, n) - (eps / t) * outer;
        const Vec ds = eps / ((eps + t) * (eps + t)) * e;
        return s * base.jacobian(x, arg) * Dpsi +
               base(x, arg) * ds.transpose();
    };
    return out;
}

std::pair<VectorField, PhiFunction> regularize(const VectorField& abar,
                                               const PhiFunction& phibar,
                                               double eps) {
    if (eps < 0.0 || eps >= 0.5)
        throw ParamError("regularize: eps in [0, 1/2) required");
    if (eps == 0.0) return {abar, phibar};

    auto pb = phibar;
    auto slope_eps = [pb, eps](Point, double t) {
        return pb.deriv({0, 0}, eps + t) * t / (eps + t);
    };
    auto value_eps = [slope_eps](Point x, double t) {
        // composite Simpson; the integrand is smooth and bounded
        const int m = 512;
        const double h = t / m;
        double s = 0.0;
        for (int k = 0; k <= m; ++k) {
            const double w = (k == 0 || k == m) ? 1.0 : (k % 2 ? 4.0 : 2.0);
            s += w * slope_eps(x, k * h);
        }
        return s * h / 3.0;
    };
    PhiFunction phi_eps =
        PhiFunction::make(value_eps, slope_eps, phibar.meta());
    return {regularize_field(abar, eps), std::move(phi_eps)};
}

}  // namespace qig
