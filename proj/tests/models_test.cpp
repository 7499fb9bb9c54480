#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qig/models.hpp"
#include "qig/sampling.hpp"

using namespace qig;

namespace {

ModelSpec dp_spec(double p, double q) {
    ModelSpec s;
    s.family = "double_phase";
    s.p = p;
    s.q = q;
    s.coefficient = ScalarField::linear(0.0, 1.0);
    return s;
}

void check_derivative_consistency(const Model& m, Point x) {
    const auto dirs = sphere_directions(m.A.dim, 8, 7);
    for (double t : log_grid(1e-3, 1e3, 7)) {
        for (const auto& e : dirs) {
            const Vec xi = t * e;
            // jacobian against finite differences of eval
            const Mat J = m.A.jacobian(x, xi);
            const Mat Jfd = fd_jacobian(m.A, x, xi, 1e-6 * std::max(1.0, t));
            CHECK((J - Jfd).norm() <=
                  1e-5 * std::max(1.0, J.norm()) + 1e-9);
            if (m.variational) {
                // gradient against finite differences of F
                const Vec g = m.F.grad(x, xi);
                Vec gfd(m.F.dim);
                const double h = 1e-6 * std::max(1.0, t);
                for (int k = 0; k < m.F.dim; ++k) {
                    Vec lo = xi, hi = xi;
                    lo(k) -= h;
                    hi(k) += h;
                    gfd(k) = (m.F(x, hi) - m.F(x, lo)) / (2.0 * h);
                }
                CHECK((g - gfd).norm() <=
                      1e-5 * std::max(1.0, g.norm()) + 1e-9);
                const Mat H = m.F.hess(x, xi);
                CHECK((H - H.transpose()).norm() <= 1e-12 * (1 + H.norm()));
            }
        }
    }
}

}  // namespace

TEST_CASE("p_laplace basics") {
    ModelSpec s;
    s.family = "p_laplace";
    s.p = 2.0;
    const Model m = build_model(s);
    const Point x{0.3, 0.7};
    const Vec xi = vec2(0.4, -1.1);
    CHECK((m.A(x, xi) - xi).norm() == doctest::Approx(0.0));
    CHECK((m.A.jacobian(x, xi) - Mat::Identity(2, 2)).norm() ==
          doctest::Approx(0.0));
    CHECK(m.A(x, vec2(0, 0)).norm() == 0.0);

    // p = 3: eigenvalues of D_xi A on |xi| = t are {2t, t}
    s.p = 3.0;
    const Model m3 = build_model(s);
    const double t = 0.8;
    const Mat J = m3.A.jacobian(x, vec2(t, 0.0));
    const auto range = quadform_range(J);
    CHECK(range[0] == doctest::Approx(t).epsilon(1e-12));
    CHECK(range[1] == doctest::Approx(2.0 * t).epsilon(1e-12));
    check_derivative_consistency(m3, x);
}

TEST_CASE("double phase arithmetic and consistency") {
    const Model m = build_model(dp_spec(2.0, 3.0));
    // F((0.5, 0), (1,0)) = 1 + 0.5 * 1 = 1.5
    CHECK(m.F({0.5, 0.0}, vec2(1, 0)) == doctest::Approx(1.5));
    check_derivative_consistency(m, {0.5, 0.25});
    CHECK(m.F({0.1, 0.1}, vec2(0, 0)) == 0.0);
    CHECK(m.F.grad({0.1, 0.1}, vec2(0, 0)).norm() == 0.0);
}

TEST_CASE("variable exponent validity and consistency") {
    ModelSpec s;
    s.family = "variable_exponent";
    s.exponent = ScalarField::linear(2.0, 0.3);
    const Model m = build_model(s);
    check_derivative_consistency(m, {0.6, 0.4});

    ModelSpec bad = s;
    bad.exponent = ScalarField::linear(0.9, 0.0);
    CHECK_THROWS_AS(build_model(bad), ParamError);
}

TEST_CASE("orlicz double phase consistency") {
    ModelSpec s = dp_spec(2.0, 3.0);
    s.family = "orlicz_double_phase";
    const Model m = build_model(s);
    check_derivative_consistency(m, {0.2, 0.9});
}

TEST_CASE("aniso quartic consistency and invalid params") {
    ModelSpec s;
    s.family = "aniso_quartic";
    s.p = 2.0;
    s.q = 2.5;
    s.coefficient = ScalarField::holder_bump(0.2, 0.5, 0.5);
    s.weight = ScalarField::constant(1.2);
    const Model m = build_model(s);
    check_derivative_consistency(m, {0.4, 0.4});

    ModelSpec bad = s;
    bad.weight = ScalarField::constant(0.0);
    CHECK_THROWS_AS(build_model(bad), ParamError);
    bad = s;
    bad.coefficient = ScalarField::constant(-0.1);
    CHECK_THROWS_AS(build_model(bad), ParamError);
}

TEST_CASE("a_minus_one") {
    ModelSpec s;
    s.family = "p_laplace";
    s.p = 2.0;
    const Model m = build_model(s);
    const GMap g = a_minus_one(m.A);
    CHECK((g.eval({0, 0}, vec2(2, 0)) - vec2(4, 0)).norm() ==
          doctest::Approx(0.0));
    CHECK(g.eval({0, 0}, vec2(0, 0)).norm() == 0.0);

    // p = 3: |xi| A = |xi|^2 xi
    s.p = 3.0;
    const Model m3 = build_model(s);
    const GMap g3 = a_minus_one(m3.A);
    const Vec v = g3.eval({0, 0}, vec2(1, 1));
    CHECK((v - 2.0 * vec2(1, 1)).norm() < 1e-12);
}

TEST_CASE("quasi isotropy sweep") {
    std::vector<Point> xs{{0.25, 0.25}, {0.75, 0.5}};
    const auto radii = log_grid(1e-2, 1e2, 5);

    ModelSpec s;
    s.family = "p_laplace";
    s.p = 2.0;
    auto rep = check_quasi_isotropy(build_model(s).A, xs, radii, 32);
    CHECK(rep.elliptic);
    CHECK(rep.L == doctest::Approx(1.0).epsilon(1e-9));

    s.p = 3.0;
    rep = check_quasi_isotropy(build_model(s).A, xs, radii, 32);
    CHECK(rep.L == doctest::Approx(2.0).epsilon(1e-9));

    // invariance under rescaling A -> cA
    ModelSpec q;
    q.family = "aniso_quartic";
    q.p = 2.0;
    q.q = 2.5;
    q.coefficient = ScalarField::constant(0.5);
    const Model base = build_model(q);
    VectorField scaled = base.A;
    auto ev = base.A.eval;
    auto jc = base.A.jac;
    scaled.eval = [ev](Point x, const Vec& xi) -> Vec {
        return 3.0 * ev(x, xi);
    };
    scaled.jac = [jc](Point x, const Vec& xi) -> Mat {
        return 3.0 * jc(x, xi);
    };
    const auto r1 = check_quasi_isotropy(base.A, xs, radii, 32);
    const auto r2 = check_quasi_isotropy(scaled, xs, radii, 32);
    CHECK(r1.L == doctest::Approx(r2.L).epsilon(1e-9));
    // homogeneity: with a pure power H the sphere ratio is constant in t
    ModelSpec hom = q;
    hom.coefficient = ScalarField::constant(0.0);
    const Model mh = build_model(hom);
    const auto ra = check_quasi_isotropy(mh.A, xs, {0.1}, 64);
    const auto rb = check_quasi_isotropy(mh.A, xs, {10.0}, 64);
    CHECK(ra.L == doctest::Approx(rb.L).epsilon(1e-6));

    // the literal quartic breaks sphere-wise ellipticity
    q.literal_quartic = true;
    const auto lit = check_quasi_isotropy(build_model(q).A, xs, radii, 64);
    CHECK(lit.L > 100.0);
}

TEST_CASE("registry") {
    CHECK(model_registry().size() >= 5);
    ModelSpec s;
    s.family = "no_such_family";
    CHECK_THROWS_WITH_AS(build_model(s),
                         doctest::Contains("p_laplace"), ParamError);
}

TEST_CASE("general dimension support") {
    ModelSpec s;
    s.family = "aniso_quartic";
    s.dim = 3;
    s.p = 2.0;
    s.q = 2.5;
    s.coefficient = ScalarField::constant(0.3);
    s.weight = ScalarField::constant(1.0);
    const Model m = build_model(s);
    const Point x{0.4, 0.6};
    Vec xi(3);
    xi << 0.5, -0.3, 0.8;
    const Mat J = m.A.jacobian(x, xi);
    const Mat Jfd = fd_jacobian(m.A, x, xi, 1e-6);
    CHECK((J - Jfd).norm() <= 1e-5 * (1.0 + J.norm()));
    const auto rep = check_quasi_isotropy(m.A, {x}, {0.5, 2.0}, 64);
    CHECK(rep.elliptic);
    CHECK(rep.L < 50.0);
}

TEST_CASE("custom coefficient field") {
    ModelSpec s;
    s.family = "double_phase";
    s.p = 2.0;
    s.q = 3.0;
    s.coefficient = ScalarField::custom(
        [](Point p) { return 0.5 + 0.25 * std::sin(3.0 * p.x) *
                                       std::cos(2.0 * p.y); },
        0.25 * 3.6, 1.0);
    const Model m = build_model(s);
    CHECK(m.F({0.5, 0.5}, vec2(1, 0)) > 1.0);
    CHECK(s.coefficient.modulus(0.1) > 0.0);
}
