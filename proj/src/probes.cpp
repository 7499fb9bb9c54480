#include "qig/probes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qig/sampling.hpp"

namespace qig {

namespace {

struct LogLogFit {
    double slope = 0.0;
    double rms = 0.0;
    std::vector<double> point_residual;
};

LogLogFit loglog_fit(const std::vector<double>& x,
                     const std::vector<double>& y) {
    LogLogFit f;
    const std::size_t n = x.size();
    double su = 0, sv = 0, suu = 0, suv = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = std::log(x[i]), v = std::log(y[i]);
        su += u;
        sv += v;
        suu += u * u;
        suv += u * v;
    }
    const double den = n * suu - su * su;
    f.slope = (n * suv - su * sv) / den;
    const double icept = (sv - f.slope * su) / n;
    double ss = 0.0;
    f.point_residual.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = std::log(y[i]) - (icept + f.slope * std::log(x[i]));
        f.point_residual[i] = std::abs(r);
        ss += r * r;
    }
    f.rms = std::sqrt(ss / n);
    return f;
}

void validate_radii(const std::vector<double>& radii, double h) {
    if (radii.size() < 4)
        throw ParamError("holder probe: need at least 4 radii");
    double lo = radii.front(), hi = radii.front();
    for (double r : radii) {
        if (r < 4.0 * h)
            throw ParamError("holder probe: radius below 4h is unresolvable");
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    if (hi / lo < 10.0)
        throw ParamError("holder probe: radii must span at least a decade");
}

HolderFit fit_with_drop(std::vector<double> rho, std::vector<double> osc) {
    HolderFit out;
    for (std::size_t i = 0; i < rho.size(); ++i)
        out.table.emplace_back(rho[i], osc[i]);
    double omax = 0.0;
    for (double o : osc) omax = std::max(omax, o);
    if (omax <= 1e-300) {
        out.alpha = 1.0;
        out.zero_oscillation = true;
        return out;
    }
    LogLogFit f = loglog_fit(rho, osc);
    // interior estimates only: drop a contaminated largest radius
    if (rho.size() > 4) {
        double rest = 0.0;
        for (std::size_t i = 0; i + 1 < rho.size(); ++i)
            rest += f.point_residual[i];
        rest /= (rho.size() - 1);
        if (f.point_residual.back() > 3.0 * rest && rest > 0.0) {
            rho.pop_back();
            osc.pop_back();
            f = loglog_fit(rho, osc);
            out.dropped_largest = true;
        }
    }
    out.alpha = f.slope;
    out.residual = f.rms;
    if (out.alpha < 0.0 || out.alpha > 1.0) {
        out.clamped = true;
        out.alpha = std::clamp(out.alpha, 0.0, 1.0);
    }
    return out;
}

}  // namespace

HolderFit holder_exponent(const GridFunction& f, Point center,
                          const std::vector<double>& radii) {
    validate_radii(radii, f.h);
    std::vector<double> rho = radii, osc;
    std::sort(rho.begin(), rho.end());
    for (double r : rho) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (int i = 0; i <= f.N; ++i) {
            for (int j = 0; j <= f.N; ++j) {
                if (dist(f.node(i, j), center) > r) continue;
                lo = std::min(lo, f.at(i, j));
                hi = std::max(hi, f.at(i, j));
            }
        }
        if (!(hi >= lo))
            throw ParamError("holder_exponent: ball misses the patch");
        osc.push_back(hi - lo);
    }
    return fit_with_drop(rho, osc);
}

HolderFit gradient_excess_decay(const GradientField& du, Point center,
                                const std::vector<double>& radii) {
    validate_radii(radii, du.h);
    std::vector<double> rho = radii;
    std::sort(rho.begin(), rho.end());
    const double rho_max = rho.back();

    auto ball_cells = [&](double r) {
        std::vector<std::size_t> cells;
        for (int i = 0; i < du.N; ++i)
            for (int j = 0; j < du.N; ++j)
                if (dist(du.cell_center(i, j), center) <= r)
                    cells.push_back(static_cast<std::size_t>(i) * du.N + j);
        return cells;
    };
    const auto big = ball_cells(rho_max);
    if (big.empty())
        throw ParamError("gradient_excess_decay: ball misses the patch");
    double mean_mag = 0.0;
    for (auto c : big) mean_mag += std::hypot(du.g[c][0], du.g[c][1]);
    mean_mag /= static_cast<double>(big.size());

    std::vector<double> tau, excess;
    for (double r : rho) {
        const auto cells = ball_cells(r);
        if (cells.empty()) continue;
        double m0 = 0.0, m1 = 0.0;
        for (auto c : cells) {
            m0 += du.g[c][0];
            m1 += du.g[c][1];
        }
        m0 /= static_cast<double>(cells.size());
        m1 /= static_cast<double>(cells.size());
        double e = 0.0;
        for (auto c : cells)
            e += std::hypot(du.g[c][0] - m0, du.g[c][1] - m1);
        e /= static_cast<double>(cells.size());
        tau.push_back(r / rho_max);
        excess.push_back(e / std::max(mean_mag, 1e-300));
    }
    return fit_with_drop(tau, excess);
}

HigherIntegrabilityReport higher_integrability(
    const PhiFunction& phi, const GridFunction& u, Point center, double r,
    const std::vector<double>& sigma_grid, double cap) {
    HigherIntegrabilityReport rep;
    rep.sigma_grid = sigma_grid;
    if (rep.sigma_grid.empty()) rep.sigma_grid = lin_grid(0.0, 1.0, 21);

    const double r2 = 2.0 * r;
    if (M_PI * r2 * r2 > 1.0)
        throw ParamError(
            "higher_integrability: |B_2r| <= 1 hypothesis violated");
    const GradientField du = discrete_gradient(u);
    std::vector<std::size_t> inner, outer;
    for (int i = 0; i < du.N; ++i) {
        for (int j = 0; j < du.N; ++j) {
            const double d = dist(du.cell_center(i, j), center);
            const std::size_t c = static_cast<std::size_t>(i) * du.N + j;
            if (d <= r) inner.push_back(c);
            if (d <= r2) outer.push_back(c);
        }
    }
    if (inner.empty())
        throw ParamError("higher_integrability: B_r contains no cells");
    {
        // B_2r must fit in the patch
        const double lox = u.origin.x, loy = u.origin.y;
        if (center.x - r2 < lox - 1e-12 || center.y - r2 < loy - 1e-12 ||
            center.x + r2 > lox + u.side() + 1e-12 ||
            center.y + r2 > loy + u.side() + 1e-12)
            throw ParamError("higher_integrability: B_2r exceeds the patch");
    }

    auto mag = [&](std::size_t c) {
        return std::hypot(du.g[c][0], du.g[c][1]);
    };
    auto center_of = [&](std::size_t c) {
        return du.cell_center(static_cast<int>(c) / du.N,
                              static_cast<int>(c) % du.N);
    };

    // modular hypothesis: int_{B_2r} phi(x,|Du|) dx <= 1
    const double h2 = u.h * u.h;
    double modular = 0.0, mean_du2 = 0.0;
    for (auto c : outer) {
        modular += phi(center_of(c), mag(c)) * h2;
        mean_du2 += mag(c);
    }
    mean_du2 /= static_cast<double>(outer.size());
    if (modular > 1.0 + 1e-12)
        throw ParamError(
            "higher_integrability: modular bound ||Du||_phi <= 1 violated");

    // phi^- over B_2r at the mean gradient, sampled at cell centers
    double phim = std::numeric_limits<double>::infinity();
    const std::size_t stride = std::max<std::size_t>(1, outer.size() / 64);
    for (std::size_t k = 0; k < outer.size(); k += stride)
        phim = std::min(phim, phi(center_of(outer[k]), mean_du2));
    rep.rhs = phim + 1.0;

    double prev = -std::numeric_limits<double>::infinity();
    rep.monotone = true;
    for (double s : rep.sigma_grid) {
        double acc = 0.0;
        for (auto c : inner)
            acc += std::pow(phi(center_of(c), mag(c)), 1.0 + s);
        acc /= static_cast<double>(inner.size());
        const double lhs = std::pow(acc, 1.0 / (1.0 + s));
        rep.lhs.push_back(lhs);
        if (lhs < prev * (1.0 - 1e-12)) rep.monotone = false;
        prev = std::max(prev, lhs);
    }
    if (!rep.monotone)
        throw EvalError(
            "higher_integrability: LHS failed power-mean monotonicity");
    rep.sigma = 0.0;
    rep.ratio = rep.lhs[0] / rep.rhs;
    for (std::size_t k = 0; k < rep.sigma_grid.size(); ++k) {
        if (rep.lhs[k] / rep.rhs <= cap) {
            rep.sigma = rep.sigma_grid[k];
            rep.ratio = rep.lhs[k] / rep.rhs;
        }
    }
    return rep;
}

EnergyComparisonReport energy_comparison_suite(const PhiFunction& phi, const PhiFunction& phibar,
                            const GridFunction& u, const GridFunction& ubar,
                            double sigma) {
    EnergyComparisonReport rep;
    const GradientField du = discrete_gradient(u);
    const GradientField dub = discrete_gradient(ubar);
    const Point origin{0, 0};

    // averages over the outer patch (playing B_2r) and its inner half
    // (playing B_r); ubar lives on the inner half.
    const int N = u.N, off = u.N / 4;
    auto in_inner = [&](int i, int j) {
        return i >= off && i < N - off && j >= off && j < N - off;
    };

    double avg_phi_u = 0, avg_pm = 0, avg_pm_half = 0, avg_du_outer = 0;
    std::size_t n_in = 0;
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) {
            const auto& g = du.at(i, j);
            const double m = std::hypot(g[0], g[1]);
            const double ph = phi(du.cell_center(i, j), m);
            avg_du_outer += m;
            if (in_inner(i, j)) {
                avg_phi_u += ph;
                avg_pm += std::pow(ph, 1.0 + sigma);
                avg_pm_half += std::pow(ph, 1.0 + sigma / 2.0);
                ++n_in;
            }
        }
    }
    avg_du_outer /= static_cast<double>(N) * N;
    avg_phi_u /= static_cast<double>(n_in);
    avg_pm = std::pow(avg_pm / n_in, 1.0 / (1.0 + sigma));
    avg_pm_half = avg_pm_half / n_in;

    double avg_phi_ub = 0, avg_pm_ub = 0, avg_dub = 0;
    const int Nb = ubar.N;
    for (int i = 0; i < Nb; ++i) {
        for (int j = 0; j < Nb; ++j) {
            const auto& g = dub.at(i, j);
            const double m = std::hypot(g[0], g[1]);
            const double ph = phi(dub.cell_center(i, j), m);
            avg_phi_ub += ph;
            avg_pm_ub += std::pow(ph, 1.0 + sigma / 2.0);
            avg_dub += m;
        }
    }
    const double nb2 = static_cast<double>(Nb) * Nb;
    avg_phi_ub /= nb2;
    avg_pm_ub = std::pow(avg_pm_ub / nb2, 2.0 / (2.0 + sigma));
    avg_dub /= nb2;

    // phi^- over the outer patch at the mean gradient
    double phim = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
            phim = std::min(
                phim, phi({u.origin.x + u.side() * i / 4.0,
                           u.origin.y + u.side() * j / 4.0},
                          avg_du_outer));

    rep.u_jensen = avg_phi_u / avg_pm;
    rep.u_c = avg_pm / (phim + 1.0);
    rep.u_cbar = avg_pm / (phibar(origin, avg_du_outer) + 1.0);
    rep.ubar_jensen = avg_phi_ub / avg_pm_ub;
    rep.ubar_c =
        avg_pm_ub / std::pow(avg_pm_half + 1.0, 2.0 / (2.0 + sigma));
    rep.gradient_c = avg_dub / (avg_du_outer + 1.0);
    rep.pass = rep.u_jensen <= 1.0 + 1e-12 &&
               rep.ubar_jensen <= 1.0 + 1e-12 &&
               std::isfinite(rep.u_c) && std::isfinite(rep.ubar_c) &&
               std::isfinite(rep.gradient_c);
    return rep;
}

}  // namespace qig
