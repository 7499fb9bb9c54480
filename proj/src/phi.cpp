#include "qig/phi.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "qig/parallel.hpp"

namespace qig {

namespace {

std::string fmt_xt(Point x, double t) {
    std::ostringstream os;
    os << "(x=(" << x.x << "," << x.y << "), t=" << t << ")";
    return os.str();
}

void require_finite(double v, Point x, double t, const char* what) {
    if (!std::isfinite(v)) {
        throw EvalError(std::string(what) + " non-finite at " + fmt_xt(x, t));
    }
}

}  // namespace

PhiFunction PhiFunction::make_autonomous(std::function<double(double)> value,
                                         std::function<double(double)> slope,
                                         PhiMeta meta) {
    Fn v = [f = std::move(value)](Point, double t) { return f(t); };
    Fn s;
    if (slope) s = [f = std::move(slope)](Point, double t) { return f(t); };
    return PhiFunction(std::move(v), std::move(s), meta, true);
}

double PhiFunction::deriv(Point x, double t) const {
    if (slope_) return slope_(x, t);
    const double h = std::max(1e-8, 1e-6 * t);
    if (t < h) return (value_(x, t + h) - value_(x, t)) / h;
    return (value_(x, t + h) - value_(x, t - h)) / (2.0 * h);
}

std::string to_string(Condition c) {
    switch (c) {
        case Condition::A0: return "A0";
        case Condition::aInc: return "aInc";
        case Condition::aDec: return "aDec";
        case Condition::Inc: return "Inc";
        case Condition::Dec: return "Dec";
    }
    return "?";
}

SampleGrid SampleGrid::standard(int t_points, double t_lo, double t_hi,
                                int x_per_side) {
    SampleGrid g;
    g.t = log_grid(t_lo, t_hi, t_points);
    for (int i = 0; i < x_per_side; ++i)
        for (int j = 0; j < x_per_side; ++j)
            g.x.push_back({static_cast<double>(i) / (x_per_side - 1),
                           static_cast<double>(j) / (x_per_side - 1)});
    return g;
}

SampleGrid SampleGrid::autonomous(int t_points, double t_lo, double t_hi) {
    SampleGrid g;
    g.t = log_grid(t_lo, t_hi, t_points);
    g.x.push_back({0.0, 0.0});
    return g;
}

ConditionReport check_condition(const PhiFunction& phi, Condition cond,
                                double gamma, const SampleGrid& grid,
                                double declared_L) {
    if (cond != Condition::A0) {
        if (grid.t.size() < 2)
            throw ParamError("check_condition: need at least 2 t-samples");
        if (grid.t.back() < 100.0 * grid.t.front())
            throw ParamError(
                "check_condition: t-grid must span at least two decades");
    }
    if (declared_L <= 0.0) {
        declared_L = (cond == Condition::Inc || cond == Condition::Dec)
                         ? 1.0
                         : std::max(1.0, phi.meta().L);
    }

    struct PerX {
        double L = 1.0;
        double t = 0.0, s = 0.0;
    };
    const std::size_t nx = grid.x.size();
    std::vector<PerX> best(nx);
    std::vector<std::string> errors(nx);

    par::for_each(nx, [&](std::size_t xi) {
        const Point x = grid.x[xi];
        PerX b;
        try {
            if (cond == Condition::A0) {
                const double v = phi(x, 1.0);
                require_finite(v, x, 1.0, "phi");
                if (v <= 0.0) {
                    b.L = std::numeric_limits<double>::infinity();
                    b.t = 1.0;
                } else {
                    b.L = std::max(v, 1.0 / v);
                    b.t = 1.0;
                }
            } else {
                const std::size_t nt = grid.t.size();
                std::vector<double> g(nt);
                for (std::size_t i = 0; i < nt; ++i) {
                    const double t = grid.t[i];
                    const double v = phi(x, t);
                    require_finite(v, x, t, "phi");
                    g[i] = v / std::pow(t, gamma);
                    require_finite(g[i], x, t, "phi/t^gamma");
                }
                const bool inc =
                    (cond == Condition::aInc || cond == Condition::Inc);
                // aInc: g(t) <= L g(s) for t < s; smallest L is the max of
                // g(t_i) over the suffix minimum. aDec mirrors it.
                if (inc) {
                    std::vector<double> sufmin(nt);
                    std::vector<std::size_t> sufarg(nt);
                    sufmin[nt - 1] = g[nt - 1];
                    sufarg[nt - 1] = nt - 1;
                    for (std::size_t i = nt - 1; i-- > 0;) {
                        if (g[i] < sufmin[i + 1]) {
                            sufmin[i] = g[i];
                            sufarg[i] = i;
                        } else {
                            sufmin[i] = sufmin[i + 1];
                            sufarg[i] = sufarg[i + 1];
                        }
                    }
                    b.L = 1.0;
                    b.t = grid.t[0];
                    b.s = grid.t[nt - 1];
                    for (std::size_t i = 0; i + 1 < nt; ++i) {
                        const double ratio =
                            sufmin[i + 1] > 0.0
                                ? g[i] / sufmin[i + 1]
                                : std::numeric_limits<double>::infinity();
                        if (ratio > b.L) {
                            b.L = ratio;
                            b.t = grid.t[i];
                            b.s = grid.t[sufarg[i + 1]];
                        }
                    }
                } else {
                    std::vector<double> sufmax(nt);
                    std::vector<std::size_t> sufarg(nt);
                    sufmax[nt - 1] = g[nt - 1];
                    sufarg[nt - 1] = nt - 1;
                    for (std::size_t i = nt - 1; i-- > 0;) {
                        if (g[i] > sufmax[i + 1]) {
                            sufmax[i] = g[i];
                            sufarg[i] = i;
                        } else {
                            sufmax[i] = sufmax[i + 1];
                            sufarg[i] = sufarg[i + 1];
                        }
                    }
                    b.L = 1.0;
                    b.t = grid.t[0];
                    b.s = grid.t[nt - 1];
                    for (std::size_t i = 0; i + 1 < nt; ++i) {
                        const double ratio =
                            g[i] > 0.0
                                ? sufmax[i + 1] / g[i]
                                : std::numeric_limits<double>::infinity();
                        if (ratio > b.L) {
                            b.L = ratio;
                            b.t = grid.t[i];
                            b.s = grid.t[sufarg[i + 1]];
                        }
                    }
                }
            }
        } catch (const EvalError& e) {
            errors[xi] = e.what();
        }
        best[xi] = b;
    });

    for (const auto& e : errors)
        if (!e.empty()) throw EvalError(e);

    auto worst = par::block_max_serial(
        nx, [&](std::size_t i) { return best[i].L; });
    ConditionReport rep;
    rep.condition = cond;
    rep.gamma = gamma;
    rep.witnessed_constant = worst.value;
    rep.witness = {grid.x[worst.index], best[worst.index].t,
                   best[worst.index].s};
    rep.pass = worst.value <= declared_L * (1.0 + 1e-9);
    if (!rep.pass) rep.counterexample = rep.witness;
    return rep;
}

double left_inverse(const PhiFunction& phi, Point x, double s,
                    const InverseOptions& opts) {
    if (!std::isfinite(s)) throw ParamError("left_inverse: s not finite");
    if (s <= 0.0) return 0.0;
    double lo = 0.0, hi = 1.0;
    while (phi(x, hi) < s) {
        lo = hi;
        hi *= 2.0;
        if (hi > opts.hi_limit)
            throw RangeError(
                "left_inverse: target not attained below hi_limit; enlarge "
                "the search interval");
    }
    while (hi - lo > opts.rel_tol * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        if (phi(x, mid) >= s)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

double conjugate(const PhiFunction& phi, Point x, double s,
                 const ConjugateOptions& opts) {
    if (s < 0.0) throw ParamError("conjugate: s must be nonnegative");
    if (s == 0.0) return 0.0;
    const auto objective = [&](double tau) { return s * tau - phi(x, tau); };

    // Coarse scan; widen the window until the maximizer is interior.
    double hi = 1.0;
    const int per_decade = 16;
    for (;;) {
        const double lo = 1e-9;
        const int n =
            static_cast<int>(per_decade * std::log10(hi / lo)) + 2;
        std::vector<double> taus = log_grid(lo, hi, n);
        taus.insert(taus.begin(), 0.0);
        std::size_t bi = 0;
        double bv = objective(0.0);
        for (std::size_t i = 1; i < taus.size(); ++i) {
            const double v = objective(taus[i]);
            require_finite(v, x, taus[i], "conjugate objective");
            if (v > bv) {
                bv = v;
                bi = i;
            }
        }
        if (bi + 1 < taus.size()) {
            // interior (or at zero): refine by golden section
            const double a = bi == 0 ? 0.0 : taus[bi - 1];
            const double b = taus[bi + 1];
            const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
            double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
            double f1 = objective(x1), f2 = objective(x2);
            double lo2 = a, hi2 = b;
            while (hi2 - lo2 > opts.rel_tol * std::max(1.0, hi2)) {
                if (f1 < f2) {
                    lo2 = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo2 + gr * (hi2 - lo2);
                    f2 = objective(x2);
                } else {
                    hi2 = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi2 - gr * (hi2 - lo2);
                    f1 = objective(x1);
                }
            }
            const double refined = objective(0.5 * (lo2 + hi2));
            return std::max(0.0, std::max(bv, refined));
        }
        hi *= 16.0;
        if (hi > opts.window_limit)
            throw WindowError(
                "conjugate: supremum not localized within the search window");
    }
}

double young_gap(const PhiFunction& phi, Point x, double t, double s) {
    return phi(x, t) + conjugate(phi, x, s) - t * s;
}

DerivativeBoundsReport check_derivative_bounds(const PhiFunction& phi, const SampleGrid& grid) {
    DerivativeBoundsReport rep;
    rep.ratio_min = std::numeric_limits<double>::infinity();
    rep.ratio_max = 0.0;
    rep.conjugate_worst = -std::numeric_limits<double>::infinity();
    for (const Point& x : grid.x) {
        for (double t : grid.t) {
            const double v = phi(x, t);
            const double d = phi.deriv(x, t);
            require_finite(v, x, t, "phi");
            require_finite(d, x, t, "phi'");
            if (v > 0.0) {
                const double ratio = t * d / v;
                rep.ratio_min = std::min(rep.ratio_min, ratio);
                rep.ratio_max = std::max(rep.ratio_max, ratio);
            }
            const double star = conjugate(phi, x, d);
            const double slack = (star - t * d) / (1.0 + t * d);
            rep.conjugate_worst = std::max(rep.conjugate_worst, slack);
        }
    }
    const PhiMeta& m = phi.meta();
    if (m.has_exponents()) {
        const double tol = 1e-6;
        rep.mid_pass = rep.ratio_min >= m.p_lo * (1.0 - tol) - tol &&
                         rep.ratio_max <= m.q_hi * (1.0 + tol) + tol;
    } else {
        rep.mid_pass = std::isfinite(rep.ratio_max) && rep.ratio_min > 0.0;
    }
    rep.compose_pass = rep.conjugate_worst <= 1e-8;
    rep.pass = rep.mid_pass && rep.compose_pass;
    return rep;
}

SplitResidual quasiconvexity_split(const PhiFunction& phi, const Vec& u,
                                   const Vec& v, double kappa) {
    if (kappa <= 0.0) throw ParamError("quasiconvexity_split: kappa > 0");
    SplitResidual r;
    const Point o{0.0, 0.0};
    const double du = (u - v).norm();
    const double nu = u.norm(), nv = v.norm();
    r.lhs = phi(o, du);
    const double sum = nu + nv;
    double second = 0.0;
    if (sum > 0.0) second = phi.deriv(o, sum) / sum * du * du;
    r.rhs = kappa * (phi(o, nu) + phi(o, nv)) + second / kappa;
    r.ratio = r.rhs > 0.0 ? r.lhs / r.rhs : 0.0;
    return r;
}

}  // namespace qig
