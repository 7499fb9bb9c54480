#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qig/approx.hpp"
#include "qig/sampling.hpp"

using namespace qig;

namespace {

Model make(const std::string& family, double p, double q = 0.0) {
    ModelSpec s;
    s.family = family;
    s.p = p;
    s.q = q;
    if (family == "double_phase" || family == "orlicz_double_phase")
        s.coefficient = ScalarField::linear(0.0, 1.0);
    if (family == "aniso_quartic") {
        s.coefficient = ScalarField::constant(0.5);
        s.weight = ScalarField::constant(1.0);
    }
    return build_model(s);
}

GrowthGrid fast_grid(int per_side = 1) {
    GrowthGrid g;
    g.t_count = 49;
    g.x_per_side = per_side;
    g.directions = 32;
    return g;
}

// analytic double phase certificate for the branch arithmetic oracle
GrowthCertificate analytic_dp_cert() {
    PhiFunction phi = PhiFunction::make(
        [](Point x, double t) {
            const double a = std::clamp(x.x, 0.0, 1.0);
            return t * t + a * t * t * t;
        },
        [](Point x, double t) {
            const double a = std::clamp(x.x, 0.0, 1.0);
            return 2.0 * t + 3.0 * a * t * t;
        },
        {2.0, 3.0, 1.0});
    return GrowthCertificate::from_phi(std::move(phi), 2.0, 3.0, 1.0, 1.0);
}

}  // namespace

TEST_CASE("eta shapes satisfy the slope bounds") {
    const double t1 = 0.3, t2 = 5.0;
    const Eta e1(Eta::Shape::CubicDown, t1, 2 * t1);
    const Eta e3(Eta::Shape::CubicUp, t2 / 2, t2);
    const Eta q1(Eta::Shape::QuinticDown, t1, 2 * t1);
    CHECK(e1.value(t1 * 0.999) == 1.0);
    CHECK(e1.value(2 * t1) == 0.0);
    CHECK(e3.value(t2 / 2) == 0.0);
    CHECK(e3.value(t2) == 1.0);
    for (double t : lin_grid(0.0, 3 * t2, 600)) {
        CHECK(e1.d1(t) <= 0.0);
        CHECK(e1.d1(t) >= -2.0 / t1);
        CHECK(e3.d1(t) >= 0.0);
        CHECK(e3.d1(t) <= 4.0 / t2);
        CHECK(std::abs(q1.d1(t)) * t1 + std::abs(q1.d2(t)) * t1 * t1 <=
              10.0);
    }
}

TEST_CASE("eta integral ramp") {
    const double t2 = 4.0;
    const EtaIntegral eta3(t2);
    CHECK(eta3.value(t2 / 2) == 0.0);
    CHECK(eta3.h_slope_max() <= 10.0);
    // closed form against Simpson quadrature
    for (double t : {0.55 * t2, 0.7 * t2, t2, 3.0 * t2}) {
        const int n = 4096;
        double acc = 0.0;
        const double lo = t2 / 2, hi = t;
        for (int k = 0; k <= n; ++k) {
            const double s = lo + (hi - lo) * k / n;
            const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
            acc += w * eta3.h(s) / (s * s);
        }
        acc *= (hi - lo) / (3.0 * n);
        CHECK(eta3.value(t) == doctest::Approx(acc).epsilon(1e-8));
    }
    // eta3(t2) >= 1/3 by the tail-lower-bound argument
    CHECK(eta3.value(t2) >= 1.0 / 3.0 - 1e-12);
}

TEST_CASE("phibar branches and anchor continuity") {
    const auto cert = analytic_dp_cert();
    const Point x0{1.0, 0.0};  // a(x0) = 1
    const double t1 = 0.5, t2 = 2.0;
    const auto pb = build_phibar(cert, x0, t1, t2);
    const Point o{0, 0};

    // a1 = phi'(x0, 1/2) = 2(0.5) + 3(0.25) = 1.75
    CHECK(pb.deriv(o, t1) == doctest::Approx(1.75).epsilon(1e-12));
    // below t1 the p-power branch: phibar'(0.25) = (1.75/0.5) 0.25
    CHECK(pb.deriv(o, 0.25) == doctest::Approx(0.875).epsilon(1e-12));
    // middle branch equals phi(x0, .) up to the head offset
    CHECK(pb.deriv(o, 1.3) == doctest::Approx(2 * 1.3 + 3 * 1.69));

    // derivative continuity at both thresholds to 1e-12
    for (double t : {t1, t2}) {
        const double lo = pb.deriv(o, t * (1.0 - 1e-9));
        const double hi = pb.deriv(o, t * (1.0 + 1e-9));
        CHECK(lo == doctest::Approx(hi).epsilon(1e-6));
    }
    // middle branch: phibar - phi(x0,.) is the constant head offset
    // a1 t1/p - phi(x0,t1), and the ratio stays below q1/p
    const double offset = 1.75 * 0.5 / 2.0 - cert.phi_value(x0, t1);
    CHECK(offset >= 0.0);
    for (double t : lin_grid(t1, t2, 40)) {
        CHECK(pb(o, t) - cert.phi_value(x0, t) ==
              doctest::Approx(offset).epsilon(1e-10));
        CHECK(pb(o, t) <=
              cert.q1 / cert.p1 * cert.phi_value(x0, t) + 1e-12);
    }

    // autonomous power: phibar == phi identically
    ModelSpec s;
    s.family = "p_laplace";
    s.p = 2.0;
    const auto cert2 = build_growth_function(make("p_laplace", 2.0).A);
    const auto pb2 = build_phibar(cert2, {0.5, 0.5}, 0.25, 4.0);
    for (double t : log_grid(1e-3, 1e3, 17))
        CHECK(pb2(o, t) ==
              doctest::Approx(cert2.phi_value({0.5, 0.5}, t)).epsilon(1e-10));

    CHECK_THROWS_AS(build_phibar(cert, x0, 1.5, 2.0), ParamError);
}

TEST_CASE("prop 5.1 autonomous sanity") {
    const auto cert = build_growth_function(make("p_laplace", 2.0).A);
    const auto pb = build_phibar(cert, {0.5, 0.5}, 0.25, 4.0);
    const auto rep =
        check_phibar(cert, pb, 1.0, Ball{{0.5, 0.5}, 0.1}, 0.25, 4.0);
    CHECK(rep.pass);
    CHECK(rep.hypothesis_worst == doctest::Approx(1.0));
    CHECK(rep.prime_inc_constant <= 1.0 + 1e-9);
    CHECK(rep.mid_upper <= 1.0 + 1e-9);
    CHECK(rep.envelope_factor <= rep.envelope_bound + 1e-9);
}

TEST_CASE("abar branch arithmetic") {
    // p_laplace p=2, nu = Lambda = 1: at |xi| = 1/4 < t1 = 1/2,
    // a1/t1 = 1 and Abar = (1/8 + 1) xi
    const Model m = make("p_laplace", 2.0);
    const auto cert = build_growth_function(m.A);
    const auto b = build_abar(m.A, cert, {0.5, 0.5}, 0.5, 2.0);
    CHECK(b.LambdaBar == doctest::Approx(8.0));
    const Vec xi = vec2(0.25, 0.0);
    const Vec out = b.abar({0, 0}, xi);
    CHECK((out - 1.125 * xi).norm() < 1e-12);

    SUBCASE("annulus identity is exact") {
        const auto dirs = sphere_directions(2, 8, 3);
        for (double t : lin_grid(2.0 * b.t1, b.t2 / 2.0, 9)) {
            for (const auto& e : dirs) {
                const Vec v1 = b.abar({0, 0}, t * e);
                const Vec v2 = m.A({0.5, 0.5}, t * e);
                CHECK(v1(0) == v2(0));
                CHECK(v1(1) == v2(1));
            }
        }
    }
    SUBCASE("jacobian matches finite differences across shells") {
        for (double t : {0.3, 0.6, 0.9, 1.5, 2.5, 3.5, 5.0}) {
            const Vec xi2 = t * vec2(std::cos(0.7), std::sin(0.7));
            const Mat J = b.abar.jacobian({0, 0}, xi2);
            const Mat Jfd = fd_jacobian(b.abar, {0, 0}, xi2, 1e-7);
            CHECK((J - Jfd).norm() <= 1e-5 * (1.0 + J.norm()));
        }
    }
}

TEST_CASE("abar growth certificate") {
    const Model m = make("double_phase", 2.0, 3.0);
    const auto cert = build_growth_function(m.A, fast_grid(5));
    const Point x0{0.5, 0.5};
    const auto b = build_abar(m.A, cert, x0, 0.25, 4.0);
    const auto rep = verify_growth_of_approx(b.abar, b.phibar, b.t1, b.t2);
    CHECK(rep.pass);
    CHECK(rep.nu > 0.0);
    // the lower transition shell keeps at least half the ellipticity
    for (const auto& iv : rep.intervals)
        if (iv.name == "(t1,2t1]") CHECK(iv.nu >= cert.nu / 2.0 - 1e-9);
}

TEST_CASE("fbar construction") {
    const Model m = make("double_phase", 2.0, 3.0);
    const auto cert = build_growth_function(m.F, fast_grid(5));
    const Point x0{0.5, 0.5};
    const auto b = build_fbar(m.F, cert, x0, 0.25, 4.0);
    REQUIRE(b.has_fbar);
    CHECK(b.nuBar > 0.0);
    CHECK(b.nuBar <= cert.nu / 8.0 + 1e-12);
    CHECK(b.eta_bound_C < 40.0);

    SUBCASE("annulus identity") {
        for (double t : lin_grid(2.0 * b.t1, b.t2 / 2.0, 7)) {
            const Vec xi = t * vec2(0.6, 0.8);
            CHECK(b.fbar({0, 0}, xi) == m.F(x0, xi));
        }
    }
    SUBCASE("gradient and hessian consistency across shells") {
        for (double t : {0.2, 0.3, 0.45, 1.0, 2.2, 3.0, 3.5, 5.0, 9.0}) {
            const Vec xi = t * vec2(std::cos(1.1), std::sin(1.1));
            const Vec g = b.fbar.grad({0, 0}, xi);
            Vec gfd(2);
            const double h = 1e-7 * std::max(1.0, t);
            for (int k = 0; k < 2; ++k) {
                Vec lo = xi, hi = xi;
                lo(k) -= h;
                hi(k) += h;
                gfd(k) = (b.fbar({0, 0}, hi) - b.fbar({0, 0}, lo)) / (2 * h);
            }
            CHECK((g - gfd).norm() <= 1e-5 * (1.0 + g.norm()));
            const Mat H = b.fbar.hess({0, 0}, xi);
            const Mat Hfd = fd_jacobian(b.fbar.derivative(), {0, 0}, xi,
                                        1e-6 * std::max(1.0, t));
            CHECK((H - Hfd).norm() <= 1e-4 * (1.0 + H.norm()));
        }
    }
    SUBCASE("growth certificate of the derivative") {
        const auto rep = verify_growth_of_approx(b.fbar.derivative(),
                                                 b.phibar, b.t1, b.t2);
        CHECK(rep.pass);
    }
}

TEST_CASE("parameter sweep keeps constants within 2x") {
    const Model m = make("p_laplace", 3.0);
    const auto cert = build_growth_function(m.A);
    double nu_lo = 1e300, nu_hi = 0.0, lam_lo = 1e300, lam_hi = 0.0;
    for (double t1 : {0.005, 0.05, 0.5})
        for (double t2 : {2.0, 20.0, 200.0}) {
            const auto b = build_abar(m.A, cert, {0.5, 0.5}, t1, t2);
            const auto rep =
                verify_growth_of_approx(b.abar, b.phibar, t1, t2);
            REQUIRE(rep.pass);
            nu_lo = std::min(nu_lo, rep.nu);
            nu_hi = std::max(nu_hi, rep.nu);
            lam_lo = std::min(lam_lo, rep.Lambda);
            lam_hi = std::max(lam_hi, rep.Lambda);
        }
    CHECK(nu_hi / nu_lo < 2.0);
    CHECK(lam_hi / lam_lo < 2.0);
}

TEST_CASE("regularize") {
    const Model m = make("p_laplace", 2.0);
    const auto cert = build_growth_function(m.A);
    const auto b = build_abar(m.A, cert, {0.5, 0.5}, 0.25, 4.0);

    SUBCASE("identity fixed point for A(xi) = xi") {
        // on the annulus Abar(xi) = xi and the regularization cancels
        auto [areg, preg] = regularize(b.abar, b.phibar, 0.1);
        const Vec xi = vec2(0.8, 0.3);
        CHECK((areg({0, 0}, xi) - b.abar({0, 0}, xi)).norm() < 1e-12);
    }
    SUBCASE("eps = 0 returns inputs") {
        auto [areg, preg] = regularize(b.abar, b.phibar, 0.0);
        const Vec xi = vec2(0.01, 0.02);
        CHECK((areg({0, 0}, xi) - b.abar({0, 0}, xi)).norm() == 0.0);
    }
    SUBCASE("p = 3 magnitude at |xi| = eps") {
        const Model m3 = make("p_laplace", 3.0);
        const double eps = 0.01;
        const auto a3 = regularize_field(m3.A, eps);
        const Vec xi = eps * vec2(1.0, 0.0);
        // |A((2 eps) e)| |xi|/(eps+|xi|) = (2 eps)^2 / 2 = 2 eps^2
        CHECK(a3({0, 0}, xi).norm() ==
              doctest::Approx(2.0 * eps * eps).epsilon(1e-12));
    }
    SUBCASE("regularized growth bounds and pointwise convergence") {
        const Model m3 = make("p_laplace", 3.0);
        const auto cert3 = build_growth_function(m3.A);
        const auto b3 = build_abar(m3.A, cert3, {0.5, 0.5}, 0.25, 4.0);
        auto [areg, preg] = regularize(b3.abar, b3.phibar, 0.05);
        const Point o{0, 0};
        const double LamBar = b3.LambdaBar;
        for (double t : log_grid(1e-3, 10.0, 17)) {
            const Vec xi = t * vec2(0.28, 0.96);
            const double lhs = areg(o, xi).norm() +
                               t * operator_norm(areg.jacobian(o, xi));
            CHECK(lhs <= 6.0 * LamBar * preg.deriv(o, t) + 1e-9);
        }
        // A_eps -> A as eps -> 0 on compact sets
        const Vec xi = vec2(0.4, 0.1);
        std::vector<double> diffs;
        for (double eps : {0.2, 0.01, 1e-4, 1e-6}) {
            const auto ae = regularize_field(b3.abar, eps);
            diffs.push_back((ae(o, xi) - b3.abar(o, xi)).norm());
        }
        CHECK(diffs.back() < 1e-5);
        CHECK(diffs.back() < diffs.front());
    }
}

TEST_CASE("degenerate thresholds recover the frozen field") {
    // t1 -> 0, t2 -> inf: the approximant equals A(x0, .) on compacts
    const Model m = make("double_phase", 2.0, 3.0);
    GrowthGrid g;
    g.t_count = 49;
    g.x_per_side = 5;
    g.directions = 32;
    const auto cert = build_growth_function(m.A, g);
    const Point x0{0.5, 0.5};
    const auto b = build_abar(m.A, cert, x0, 1e-5, 1e5);
    for (double t : log_grid(1e-3, 1e3, 13)) {
        const Vec xi = t * vec2(0.6, -0.8);
        CHECK((b.abar({0, 0}, xi) - m.A(x0, xi)).norm() == 0.0);
    }
}
