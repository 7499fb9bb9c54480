#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qig/phi.hpp"

using namespace qig;

namespace {

PhiFunction power_phi(double p) {
    return PhiFunction::make_autonomous(
        [p](double t) { return std::pow(t, p); },
        [p](double t) { return p * std::pow(t, p - 1.0); },
        {p, p, 1.0});
}

PhiFunction double_phase_phi(double p, double q, double a) {
    return PhiFunction::make_autonomous(
        [=](double t) { return std::pow(t, p) + a * std::pow(t, q); },
        [=](double t) {
            return p * std::pow(t, p - 1.0) + a * q * std::pow(t, q - 1.0);
        },
        {p, q, 1.0});
}

}  // namespace

TEST_CASE("check_condition on pure powers") {
    const auto grid = SampleGrid::autonomous();
    const auto phi = power_phi(2.0);

    auto inc2 = check_condition(phi, Condition::Inc, 2.0, grid);
    CHECK(inc2.pass);
    CHECK(inc2.witnessed_constant == doctest::Approx(1.0));

    auto ainc3 = check_condition(phi, Condition::aInc, 3.0, grid);
    CHECK_FALSE(ainc3.pass);
    REQUIRE(ainc3.counterexample.has_value());
    // t^2/t^3 is decreasing: any witnessed pair has t < s
    CHECK(ainc3.counterexample->t < ainc3.counterexample->s);

    auto dec2 = check_condition(phi, Condition::Dec, 2.0, grid);
    CHECK(dec2.pass);
    auto a0 = check_condition(phi, Condition::A0, 0.0, grid);
    CHECK(a0.pass);
    CHECK(a0.witnessed_constant == doctest::Approx(1.0));
}

TEST_CASE("check_condition x-dependent double phase") {
    // phi(x,t) = t^p + a(x) t^q with a >= 0: ratio to t^p is
    // 1 + a(x) t^(q-p), nondecreasing, so Inc(p) passes with L = 1.
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
    const auto grid = SampleGrid::standard();
    auto incp = check_condition(phi, Condition::Inc, 2.0, grid);
    CHECK(incp.pass);
    CHECK(incp.witnessed_constant <= 1.0 + 1e-9);
    auto decq = check_condition(phi, Condition::Dec, 3.0, grid);
    CHECK(decq.pass);
}

TEST_CASE("check_condition monotone in gamma") {
    // Inc(gamma) with L = 1 implies aInc(gamma') for gamma' <= gamma.
    const auto grid = SampleGrid::autonomous();
    const auto phi = double_phase_phi(2.0, 3.0, 0.5);
    REQUIRE(check_condition(phi, Condition::Inc, 2.0, grid).pass);
    for (double g : {2.0, 1.5, 1.0, 0.5})
        CHECK(check_condition(phi, Condition::aInc, g, grid, 1.0 + 1e-9)
                  .pass);
}

TEST_CASE("evaluation errors carry the sample") {
    PhiFunction bad = PhiFunction::make_autonomous(
        [](double t) { return t > 1e3 ? std::nan("") : t * t; }, nullptr,
        {});
    CHECK_THROWS_AS(
        check_condition(bad, Condition::Inc, 2.0, SampleGrid::autonomous()),
        EvalError);
}

TEST_CASE("left_inverse") {
    const Point o{0, 0};
    const auto sq = power_phi(2.0);
    CHECK(left_inverse(sq, o, 4.0) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(left_inverse(sq, o, 0.0) == 0.0);

    // bisection oracle: phi(t) = t^3 + t^5 hits 2 exactly at t = 1
    const auto cubic5 = PhiFunction::make_autonomous(
        [](double t) { return std::pow(t, 3) + std::pow(t, 5); }, nullptr,
        {3.0, 5.0, 1.0});
    CHECK(left_inverse(cubic5, o, 2.0) ==
          doctest::Approx(1.0).epsilon(1e-10));

    // inverse composed with evaluation is the identity
    for (double t : {1e-3, 0.37, 1.0, 42.0}) {
        const double s = sq(o, t);
        CHECK(left_inverse(sq, o, s) == doctest::Approx(t).epsilon(1e-9));
    }

    InverseOptions tight;
    tight.hi_limit = 8.0;
    CHECK_THROWS_AS(left_inverse(sq, o, 1e6, tight), RangeError);
}

TEST_CASE("conjugate") {
    const Point o{0, 0};
    // t^p/p conjugates to s^p'/p'
    const auto half_sq = PhiFunction::make_autonomous(
        [](double t) { return 0.5 * t * t; }, [](double t) { return t; },
        {2.0, 2.0, 1.0});
    CHECK(conjugate(half_sq, o, 3.0) == doctest::Approx(4.5).epsilon(1e-9));

    const auto linear = PhiFunction::make_autonomous(
        [](double t) { return t; }, [](double) { return 1.0; },
        {1.0, 1.0, 1.0});
    CHECK(conjugate(linear, o, 0.5) == doctest::Approx(0.0));
    CHECK(conjugate(linear, o, 1.0) == doctest::Approx(0.0));
    CHECK_THROWS_AS(conjugate(linear, o, 2.0), WindowError);

    // closed form: (t^3/3)^* (1) = 2/3
    const auto cubic3 = PhiFunction::make_autonomous(
        [](double t) { return t * t * t / 3.0; },
        [](double t) { return t * t; }, {3.0, 3.0, 1.0});
    CHECK(conjugate(cubic3, o, 1.0) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-9));

    // conjugate exponent mapping: phi aInc(p), aDec(q) => phi* aInc(q'),
    // aDec(p'); check on the numeric conjugate of a double phase
    const auto dp = double_phase_phi(2.0, 3.0, 1.0);
    PhiFunction star = PhiFunction::make_autonomous(
        [dp, o](double s) { return conjugate(dp, o, s); }, nullptr, {});
    SampleGrid g = SampleGrid::autonomous(33, 1e-3, 1e3);
    CHECK(check_condition(star, Condition::aInc, 3.0 / 2.0, g, 1.1).pass);
    CHECK(check_condition(star, Condition::aDec, 2.0, g, 1.1).pass);
}

TEST_CASE("young gap nonnegative, zero at equality") {
    const Point o{0, 0};
    const auto half_sq = PhiFunction::make_autonomous(
        [](double t) { return 0.5 * t * t; }, [](double t) { return t; },
        {2.0, 2.0, 1.0});
    CHECK(young_gap(half_sq, o, 1.0, 1.0) ==
          doctest::Approx(0.0).epsilon(1e-8));
    CHECK(young_gap(half_sq, o, 2.0, 1.0) == doctest::Approx(0.5));

    const auto cubic3 = PhiFunction::make_autonomous(
        [](double t) { return t * t * t / 3.0; },
        [](double t) { return t * t; }, {3.0, 3.0, 1.0});
    // equality at s = phi'(t)
    CHECK(std::abs(young_gap(cubic3, o, 1.0, 1.0)) < 1e-8);

    // property: gap >= -1e-8 on a (t,s) sweep
    for (double t : log_grid(1e-2, 1e2, 9))
        for (double s : log_grid(1e-2, 1e2, 9))
            CHECK(young_gap(cubic3, o, t, s) >= -1e-8);
}

TEST_CASE("prop0 items") {
    // t phi' = p phi exactly for pure powers
    auto rep = check_derivative_bounds(power_phi(3.0), SampleGrid::autonomous(33));
    CHECK(rep.ratio_min == doctest::Approx(3.0));
    CHECK(rep.ratio_max == doctest::Approx(3.0));
    CHECK(rep.compose_pass);
    CHECK(rep.pass);

    // double phase t^3 + t^5: ratio ranges over [3, 5]
    auto dp = check_derivative_bounds(double_phase_phi(3.0, 5.0, 1.0),
                          SampleGrid::autonomous(33));
    CHECK(dp.ratio_min >= 3.0 - 1e-6);
    CHECK(dp.ratio_max <= 5.0 + 1e-6);
    CHECK(dp.pass);
}

TEST_CASE("quasiconvexity split") {
    const auto sq = power_phi(2.0);
    SUBCASE("coincident points vanish") {
        auto r = quasiconvexity_split(sq, vec2(1.0, 2.0), vec2(1.0, 2.0),
                                      1.0);
        CHECK(r.lhs == 0.0);
        CHECK(r.ratio == 0.0);
    }
    SUBCASE("both zero") {
        auto r = quasiconvexity_split(sq, vec2(0, 0), vec2(0, 0), 1.0);
        CHECK(r.rhs == 0.0);
        CHECK(r.ratio == 0.0);
    }
    SUBCASE("hand value") {
        auto r = quasiconvexity_split(sq, vec2(1, 0), vec2(0, 0), 1.0);
        CHECK(r.lhs == doctest::Approx(1.0));
        CHECK(r.rhs == doctest::Approx(3.0));
    }
    SUBCASE("uniform constant over a sweep") {
        const auto cubic = power_phi(3.0);
        double worst = 0.0;
        int k = 0;
        for (double k1 : {0.25, 1.0, 4.0})
            for (double a : lin_grid(0.0, 6.28, 17))
                for (double ra : log_grid(1e-2, 1e2, 9))
                    for (double rb : log_grid(1e-2, 1e2, 9)) {
                        auto r = quasiconvexity_split(
                            cubic, vec2(ra * std::cos(a), ra * std::sin(a)),
                            vec2(rb, 0.0), k1);
                        worst = std::max(worst, r.ratio);
                        ++k;
                    }
        CHECK(k > 4000);
        CHECK(worst < 8.0);  // uniform implicit constant
    }
}

TEST_CASE("weighted Young variants by rescaling") {
    // ts <= phi(eps^(1/p) t) + phi*(eps^(-1/p) s) is the base gap at
    // rescaled arguments
    const Point o{0, 0};
    const auto cubic3 = PhiFunction::make_autonomous(
        [](double t) { return t * t * t / 3.0; },
        [](double t) { return t * t; }, {3.0, 3.0, 1.0});
    const double p = 3.0;
    for (double eps : {0.1, 0.5, 0.9}) {
        const double a = std::pow(eps, 1.0 / p);
        for (double t : {0.3, 1.0, 4.0}) {
            for (double s : {0.2, 1.0, 5.0}) {
                const double lhs = t * s;
                const double rhs = cubic3(o, a * t) +
                                   conjugate(cubic3, o, s / a);
                CHECK(lhs <= rhs + 1e-8);
            }
        }
    }
}

TEST_CASE("narrow t-grids are rejected") {
    const auto phi = power_phi(2.0);
    SampleGrid g = SampleGrid::autonomous(9, 0.5, 2.0);
    CHECK_THROWS_AS(check_condition(phi, Condition::Inc, 2.0, g),
                    ParamError);
}
