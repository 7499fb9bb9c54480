#include "qig/growth.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "qig/parallel.hpp"
#include "qig/sampling.hpp"

namespace qig {

namespace {

std::size_t segment_of(const std::vector<double>& knots, double t) {
    // largest k with knots[k] <= t, clamped to a valid segment index
    auto it = std::upper_bound(knots.begin(), knots.end(), t);
    if (it == knots.begin()) return 0;
    std::size_t k = static_cast<std::size_t>(it - knots.begin()) - 1;
    return std::min(k, knots.size() - 2);
}

double power_integral(double v0, double t0, double gamma, double t1) {
    // int_{t0}^{t1} v0 (s/t0)^gamma ds
    const double g1 = gamma + 1.0;
    if (std::abs(g1) < 1e-12) return v0 * t0 * std::log(t1 / t0);
    return v0 * t0 * (std::pow(t1 / t0, g1) - 1.0) / g1;
}

}  // namespace

double PiecewisePower::value(double t) const {
    if (t <= 0.0) return 0.0;
    if (t <= knots.front())
        return values.front() * std::pow(t / knots.front(), exp_below);
    if (t >= knots.back())
        return values.back() * std::pow(t / knots.back(), exp_above);
    const std::size_t k = segment_of(knots, t);
    const double g = std::log(values[k + 1] / values[k]) /
                     std::log(knots[k + 1] / knots[k]);
    return values[k] * std::pow(t / knots[k], g);
}

double PiecewisePower::slope_at(double t) const {
    if (t < knots.front()) return exp_below;
    if (t >= knots.back()) return exp_above;
    const std::size_t k = segment_of(knots, t);
    return std::log(values[k + 1] / values[k]) /
           std::log(knots[k + 1] / knots[k]);
}

double PiecewisePower::max_slope() const {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < knots.size(); ++k)
        m = std::max(m, std::log(values[k + 1] / values[k]) /
                            std::log(knots[k + 1] / knots[k]));
    return m;
}

double PiecewisePower::min_slope() const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < knots.size(); ++k)
        m = std::min(m, std::log(values[k + 1] / values[k]) /
                            std::log(knots[k + 1] / knots[k]));
    return m;
}

ConvexifyResult convexify(const std::vector<double>& t,
                          const std::vector<double>& psi, double p,
                          double q_cap, double reject_L) {
    const std::size_t n = t.size();
    if (n < 2 || psi.size() != n)
        throw ParamError("convexify: need matching samples, >= 2 points");
    std::vector<double> u(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(t[i] > 0.0 && psi[i] > 0.0))
            throw ParamError("convexify: samples must be positive");
        if (i > 0 && t[i] <= t[i - 1])
            throw ParamError("convexify: t-grid must be increasing");
        u[i] = std::log(t[i]);
        w[i] = std::log(psi[i]);
    }

    // aInc(1) screen: values/t must be almost increasing within reject_L.
    {
        double sufmin = psi[n - 1] / t[n - 1];
        double worst = 1.0;
        for (std::size_t i = n - 1; i-- > 0;) {
            const double g = psi[i] / t[i];
            worst = std::max(worst, g / sufmin);
            sufmin = std::min(sufmin, g);
        }
        if (worst > reject_L)
            throw ParamError(
                "convexify: input violates aInc(1) beyond the declared "
                "constant; cannot convexify equivalently");
    }

    // Lower convex hull in log-log coordinates.
    std::vector<std::size_t> hull;
    for (std::size_t i = 0; i < n; ++i) {
        while (hull.size() >= 2) {
            const std::size_t a = hull[hull.size() - 2];
            const std::size_t b = hull[hull.size() - 1];
            const double cross = (u[b] - u[a]) * (w[i] - w[a]) -
                                 (w[b] - w[a]) * (u[i] - u[a]);
            if (cross <= 0.0)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(i);
    }
    std::vector<double> wt(n);  // hull evaluated at every sample
    for (std::size_t h = 0; h + 1 < hull.size(); ++h) {
        const std::size_t a = hull[h], b = hull[h + 1];
        const double s = (w[b] - w[a]) / (u[b] - u[a]);
        for (std::size_t i = a; i <= b; ++i) wt[i] = w[a] + s * (u[i] - u[a]);
    }
    if (hull.size() == 1) wt = w;

    // (Inc)_p: running max of log(psi~) - p log t.
    double run = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        run = std::max(run, wt[i] - p * u[i]);
        wt[i] = run + p * u[i];
    }
    // optional (Dec)_q cap: running min of log(psi~) - q log t.
    if (q_cap > 0.0) {
        double runmin = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            runmin = std::min(runmin, wt[i] - q_cap * u[i]);
            wt[i] = runmin + q_cap * u[i];
        }
    }

    ConvexifyResult out;
    out.psi.knots = t;
    out.psi.values.resize(n);
    double equiv = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        out.psi.values[i] = std::exp(wt[i]);
        equiv = std::max(equiv, std::exp(std::abs(wt[i] - w[i])));
    }
    out.psi.exp_below = p;
    out.q1 = std::max(out.psi.max_slope(), p);
    out.psi.exp_above = out.q1;
    out.equivalence = equiv;
    return out;
}

double PhiCurve::value(double t) const {
    const auto& knots = psi.knots;
    if (t <= 0.0) return 0.0;
    if (t <= knots.front()) return psi.value(t);  // pure power head
    if (t >= knots.back()) {
        const double g = psi.exp_above;
        return phi_at_knots.back() +
               p * power_integral(psi.values.back() / knots.back(),
                                  knots.back(), g - 1.0, t);
    }
    const std::size_t k = segment_of(knots, t);
    const double g = std::log(psi.values[k + 1] / psi.values[k]) /
                     std::log(knots[k + 1] / knots[k]);
    return phi_at_knots[k] +
           p * power_integral(psi.values[k] / knots[k], knots[k], g - 1.0, t);
}

double PhiCurve::slope(double t) const {
    if (t <= 0.0) return 0.0;
    return p * psi.value(t) / t;
}

struct GrowthCertificate::Data {
    bool use_explicit = false;
    PhiFunction explicit_phi;
    std::vector<Point> lattice;
    std::vector<PhiCurve> curves;
    int x_per_side = 1;
    double p = 2.0;
};

namespace {

PhiCurve make_phi_curve(PiecewisePower psi, double p) {
    PhiCurve c;
    c.p = p;
    c.psi = std::move(psi);
    const auto& knots = c.psi.knots;
    const std::size_t n = knots.size();
    c.phi_at_knots.resize(n);
    // phi(t0) = p * int_0^{t0} of the power head / s = head value itself
    c.phi_at_knots[0] = c.psi.values[0];
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double g = std::log(c.psi.values[k + 1] / c.psi.values[k]) /
                         std::log(knots[k + 1] / knots[k]);
        c.phi_at_knots[k + 1] =
            c.phi_at_knots[k] + p * power_integral(c.psi.values[k] / knots[k],
                                                   knots[k], g - 1.0,
                                                   knots[k + 1]);
    }
    return c;
}

// Log-averaged derivative upgrade: the new slope int_0^t phi'(s)/s ds is
// differentiable across the knots. The integral is exact per power
// segment; the result is resampled onto the same knots.
PhiCurve c2_upgrade_curve(const PhiCurve& c) {
    const auto& knots = c.psi.knots;
    const std::size_t n = knots.size();
    const double p = c.p;
    std::vector<double> slope2(n);
    // head: psi~ = v0 (s/t0)^p, integrand p v0 s^(p-2)/t0^p
    slope2[0] = p * c.psi.values[0] / ((p - 1.0) * knots[0]);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double g = std::log(c.psi.values[k + 1] / c.psi.values[k]) /
                         std::log(knots[k + 1] / knots[k]);
        // int p psi~(s)/s^2 ds over the segment
        slope2[k + 1] =
            slope2[k] + p * power_integral(c.psi.values[k] / (knots[k] *
                                                              knots[k]),
                                           knots[k], g - 2.0, knots[k + 1]);
    }
    PiecewisePower psi2;
    psi2.knots = knots;
    psi2.values.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        psi2.values[i] = slope2[i] * knots[i] / p;
    psi2.exp_below = p;
    psi2.exp_above = std::max(p, psi2.max_slope());
    return make_phi_curve(std::move(psi2), p);
}

std::vector<Point> make_lattice(int per_side) {
    std::vector<Point> xs;
    if (per_side <= 1) {
        xs.push_back({0.5, 0.5});
        return xs;
    }
    for (int i = 0; i < per_side; ++i)
        for (int j = 0; j < per_side; ++j)
            xs.push_back({static_cast<double>(i) / (per_side - 1),
                          static_cast<double>(j) / (per_side - 1)});
    return xs;
}

std::string fmt_sample(Point x, double t) {
    std::ostringstream os;
    os << "x=(" << x.x << "," << x.y << "), t=" << t;
    return os.str();
}

}  // namespace

PhiFunction GrowthCertificate::phi() const {
    auto d = data;
    PhiMeta meta{p1, q1, std::max({2.0, residuals.growth_constant,
                                   nu > 0 ? 1.0 / nu : 1.0})};
    auto self = *this;
    return PhiFunction::make(
        [self](Point x, double t) { return self.phi_value(x, t); },
        [self](Point x, double t) { return self.phi_slope(x, t); }, meta);
}

PhiFunction GrowthCertificate::phi_prime() const {
    PhiMeta meta{p1 - 1.0, q1 - 1.0,
                 std::max({2.0, residuals.growth_constant,
                           nu > 0 ? 1.0 / nu : 1.0})};
    auto self = *this;
    return PhiFunction::make(
        [self](Point x, double t) { return self.phi_slope(x, t); },
        nullptr, meta);
}

double GrowthCertificate::phi_value(Point x, double t) const {
    if (data->use_explicit) return data->explicit_phi(x, t);
    return data->curves[nearest(x)].value(t);
}

double GrowthCertificate::phi_slope(Point x, double t) const {
    if (data->use_explicit) return data->explicit_phi.deriv(x, t);
    return data->curves[nearest(x)].slope(t);
}

const std::vector<Point>& GrowthCertificate::lattice() const {
    return data->lattice;
}

std::size_t GrowthCertificate::nearest(Point x) const {
    const int n = data->x_per_side;
    if (n <= 1) return 0;
    x = clamp_to_domain(x);
    const int i = static_cast<int>(std::lround(x.x * (n - 1)));
    const int j = static_cast<int>(std::lround(x.y * (n - 1)));
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
           static_cast<std::size_t>(j);
}

std::vector<std::size_t> GrowthCertificate::lattice_in_ball(
    const Ball& b) const {
    std::vector<std::size_t> idx;
    const auto& xs = data->lattice;
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (b.contains(xs[i])) idx.push_back(i);
    if (idx.empty()) idx.push_back(nearest(b.center));
    return idx;
}

double GrowthCertificate::phi_inf_ball(const Ball& b, double t) const {
    if (data->use_explicit || autonomous)
        return phi_value(b.center, t);
    double v = std::numeric_limits<double>::infinity();
    for (std::size_t i : lattice_in_ball(b))
        v = std::min(v, data->curves[i].value(t));
    return v;
}

double GrowthCertificate::phi_sup_ball(const Ball& b, double t) const {
    if (data->use_explicit || autonomous)
        return phi_value(b.center, t);
    double v = 0.0;
    for (std::size_t i : lattice_in_ball(b))
        v = std::max(v, data->curves[i].value(t));
    return v;
}

double GrowthCertificate::phi_slope_inf_ball(const Ball& b, double t) const {
    if (data->use_explicit || autonomous)
        return phi_slope(b.center, t);
    double v = std::numeric_limits<double>::infinity();
    for (std::size_t i : lattice_in_ball(b))
        v = std::min(v, data->curves[i].slope(t));
    return v;
}

double GrowthCertificate::phi_inf_ball_inverse(const Ball& b,
                                               double s) const {
    if (s <= 0.0) return 0.0;
    double lo = 0.0, hi = 1.0;
    while (phi_inf_ball(b, hi) < s) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300)
            throw RangeError("phi_inf_ball_inverse: target out of range");
    }
    while (hi - lo > 1e-12 * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        if (phi_inf_ball(b, mid) >= s)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

GrowthCertificate GrowthCertificate::from_phi(PhiFunction phi, double p1,
                                              double q1, double nu,
                                              double Lambda) {
    GrowthCertificate cert;
    auto d = std::make_shared<Data>();
    d->use_explicit = true;
    d->explicit_phi = std::move(phi);
    d->lattice = {{0.5, 0.5}};
    cert.data = std::move(d);
    cert.p1 = p1;
    cert.q1 = q1;
    cert.nu = nu;
    cert.Lambda = Lambda;
    cert.autonomous = cert.data->explicit_phi.autonomous();
    return cert;
}

double extract_psi_prime(const VectorField& A, Point x, double t,
                         int directions, std::uint64_t seed) {
    if (!(t > 0.0)) throw ParamError("extract_psi_prime: t > 0 required");
    if (directions < 16)
        throw ParamError("extract_psi_prime: needs >= 16 directions");
    const auto dirs = sphere_directions(A.dim, directions, seed);
    double best = 0.0;
    for (const Vec& e : dirs)
        best = std::max(best, t * operator_norm(A.jacobian(x, t * e)));
    return best;
}

namespace {

// Per (x,t) sphere statistics shared by the certificate fits.
struct SphereStats {
    double psi_prime = 0.0;   // max |xi| |D A|
    double quad_min = 0.0;    // min quadratic form of D A
    double sum_max = 0.0;     // max (|A| + |xi| |D A|)
    double a_dot_min = 0.0;   // min A(x,te).e
    double a_abs_max = 0.0;   // max |A|
    int worst_dir = 0;
};

}  // namespace

GrowthCertificate build_growth_function(const VectorField& A,
                                        const GrowthGrid& grid) {
    const std::vector<double> ts = log_grid(grid.t_lo, grid.t_hi, grid.t_count);
    const int per_side = A.autonomous ? 1 : grid.x_per_side;
    std::vector<Point> xs = make_lattice(per_side);
    const auto dirs = sphere_directions(A.dim, grid.directions, grid.seed);
    const double p = A.sc.p;

    const std::size_t nx = xs.size(), nt = ts.size();
    std::vector<SphereStats> stats(nx * nt);
    std::vector<PhiCurve> curves(nx);
    std::vector<double> q1x(nx, 0.0);
    std::vector<std::string> errors(nx);

    par::for_each(nx, [&](std::size_t xi) {
        const Point x = xs[xi];
        try {
            std::vector<double> psip(nt);
            for (std::size_t ti = 0; ti < nt; ++ti) {
                const double t = ts[ti];
                SphereStats s;
                s.quad_min = std::numeric_limits<double>::infinity();
                s.a_dot_min = std::numeric_limits<double>::infinity();
                for (std::size_t di = 0; di < dirs.size(); ++di) {
                    const Vec xi_vec = t * dirs[di];
                    const Mat J = A.jacobian(x, xi_vec);
                    const Vec a = A(x, xi_vec);
                    const double opn = operator_norm(J);
                    const double qmin = quadform_range(J)[0];
                    const double amag = a.norm();
                    if (t * opn > s.psi_prime) {
                        s.psi_prime = t * opn;
                        s.worst_dir = static_cast<int>(di);
                    }
                    s.quad_min = std::min(s.quad_min, qmin);
                    s.sum_max = std::max(s.sum_max, amag + t * opn);
                    s.a_dot_min = std::min(s.a_dot_min, a.dot(dirs[di]));
                    s.a_abs_max = std::max(s.a_abs_max, amag);
                }
                if (!(s.quad_min > 0.0)) {
                    errors[xi] = "growth: ellipticity ratio nonpositive at " +
                                 fmt_sample(x, t) + " (A not admissible)";
                    return;
                }
                stats[xi * nt + ti] = s;
                psip[ti] = s.psi_prime;
            }
            // psi(t) = int_0^t psi'; exact per power segment, power head.
            std::vector<double> psi(nt);
            psi[0] = psip[0] * ts[0] / p;
            for (std::size_t k = 0; k + 1 < nt; ++k) {
                const double g = std::log(psip[k + 1] / psip[k]) /
                                 std::log(ts[k + 1] / ts[k]);
                psi[k + 1] =
                    psi[k] + power_integral(psip[k], ts[k], g, ts[k + 1]);
            }
            ConvexifyResult conv = convexify(ts, psi, p);
            q1x[xi] = conv.q1;
            curves[xi] = make_phi_curve(std::move(conv.psi), p);
            if (grid.c2_upgrade) curves[xi] = c2_upgrade_curve(curves[xi]);
        } catch (const std::exception& e) {
            errors[xi] = e.what();
        }
    });
    for (const auto& e : errors)
        if (!e.empty()) throw EvalError(e);

    GrowthCertificate cert;
    auto d = std::make_shared<GrowthCertificate::Data>();
    d->lattice = xs;
    d->curves = std::move(curves);
    d->x_per_side = per_side;
    d->p = p;
    cert.data = std::move(d);
    cert.grid = grid;
    cert.autonomous = A.autonomous;
    cert.p1 = p;
    cert.q1 = std::max(A.sc.q, *std::max_element(q1x.begin(), q1x.end()));

    // Fit the growth and ellipticity constants on the same samples.
    double nu = std::numeric_limits<double>::infinity();
    double lambda = 0.0, growth_constant = 0.0, c_lo = 0.0, c_up = 0.0;
    GrowthSampleRef nu_ref, gc_ref;
    for (std::size_t xi = 0; xi < nx; ++xi) {
        for (std::size_t ti = 0; ti < nt; ++ti) {
            const SphereStats& s = stats[xi * nt + ti];
            const double t = ts[ti];
            const double dphi = cert.data->curves[xi].slope(t);
            const double vphi = cert.data->curves[xi].value(t);
            const double nu_cand = s.quad_min * t / dphi;
            if (nu_cand < nu) {
                nu = nu_cand;
                nu_ref = {xs[xi], t, s.worst_dir};
            }
            lambda = std::max(lambda, s.psi_prime / dphi);
            const double gc_cand = s.sum_max / dphi;
            if (gc_cand > growth_constant) {
                growth_constant = gc_cand;
                gc_ref = {xs[xi], t, s.worst_dir};
            }
            if (s.a_dot_min > 0.0)
                c_lo = std::max(c_lo, vphi / (t * s.a_dot_min));
            c_up = std::max(c_up, t * s.a_abs_max / vphi);
        }
    }
    cert.nu = nu;
    cert.Lambda = lambda;
    cert.residuals.growth_constant = growth_constant;
    cert.residuals.growth_worst = gc_ref;
    cert.residuals.ellipticity_min = nu;
    cert.residuals.ellipticity_worst = nu_ref;
    cert.c1 = std::max(c_lo, c_up);
    return cert;
}

GrowthCertificate build_growth_function(const Lagrangian& F,
                                        const GrowthGrid& grid) {
    GrowthCertificate cert = build_growth_function(F.derivative(), grid);
    cert.c2 = check_equivalences(cert, F, grid).c;
    return cert;
}

EquivalenceReport check_equivalences(const GrowthCertificate& cert,
                                     const VectorField& A,
                                     const GrowthGrid& grid) {
    const auto ts = log_grid(grid.t_lo, grid.t_hi, grid.t_count);
    const auto dirs = sphere_directions(A.dim, grid.directions, grid.seed);
    EquivalenceReport rep;
    for (const Point& x : cert.lattice()) {
        for (double t : ts) {
            const double vphi = cert.phi_value(x, t);
            for (const Vec& e : dirs) {
                const Vec a = A(x, t * e);
                const double dot = t * a.dot(e);
                if (dot <= 0.0)
                    throw EvalError("check_equivalences: A . xi <= 0 at " +
                                    fmt_sample(x, t));
                rep.c_lower = std::max(rep.c_lower, vphi / dot);
                rep.c_upper = std::max(rep.c_upper, t * a.norm() / vphi);
            }
        }
    }
    rep.c = std::max(rep.c_lower, rep.c_upper);
    return rep;
}

EquivalenceReport check_equivalences(const GrowthCertificate& cert,
                                     const Lagrangian& F,
                                     const GrowthGrid& grid) {
    const auto ts = log_grid(grid.t_lo, grid.t_hi, grid.t_count);
    const auto dirs = sphere_directions(F.dim, grid.directions, grid.seed);
    EquivalenceReport rep;
    for (const Point& x : cert.lattice()) {
        for (double t : ts) {
            const double vphi = cert.phi_value(x, t);
            for (const Vec& e : dirs) {
                const double f = F(x, t * e);
                if (f <= 0.0)
                    throw EvalError("check_equivalences: F <= 0 at " +
                                    fmt_sample(x, t));
                rep.c_lower = std::max(rep.c_lower, vphi / f);
                rep.c_upper = std::max(rep.c_upper, f / vphi);
            }
        }
    }
    rep.c = std::max(rep.c_lower, rep.c_upper);
    return rep;
}

MonotonicityReport check_monotonicity(const VectorField& A,
                                      const GrowthCertificate& cert,
                                      int pairs_per_x, std::uint64_t seed) {
    MonotonicityReport rep;
    rep.constant = std::numeric_limits<double>::infinity();
    const auto ts = log_grid(1e-3, 1e3, 13);
    const auto dirs = sphere_directions(A.dim, 8, seed);
    for (const Point& x : cert.lattice()) {
        int used = 0;
        for (std::size_t i = 0; i < ts.size() && used < pairs_per_x; ++i) {
            for (std::size_t j = i; j < ts.size() && used < pairs_per_x;
                 ++j) {
                for (std::size_t a = 0; a < dirs.size(); ++a) {
                    for (std::size_t b = a; b < dirs.size(); ++b) {
                        const Vec xi1 = ts[i] * dirs[a];
                        const Vec xi2 = ts[j] * dirs[b];
                        const double diff = (xi1 - xi2).norm();
                        if (diff < 1e-14) continue;
                        const double lhs =
                            (A(x, xi1) - A(x, xi2)).dot(xi1 - xi2);
                        const double sum = ts[i] + ts[j];
                        const double rhs =
                            cert.phi_slope(x, sum) / sum * diff * diff;
                        if (lhs <= 0.0)
                            throw EvalError(
                                "check_monotonicity: nonpositive increment "
                                "at " +
                                fmt_sample(x, sum));
                        if (lhs / rhs < rep.constant) {
                            rep.constant = lhs / rhs;
                            rep.worst_x = x;
                        }
                        ++used;
                    }
                }
            }
        }
    }
    rep.pass = rep.constant > 0.0 && std::isfinite(rep.constant);
    return rep;
}

}  // namespace qig
