#include "qig/solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <cmath>
#include <limits>
#include <sstream>

#include "qig/parallel.hpp"
#include "qig/sampling.hpp"

namespace qig {

namespace {

// 5-point Laplacian CG on the interior; initial values double as the
// first iterate, boundary row held fixed. No-op when the residual is
// already at rounding level, which keeps exact data bit-exact.
void laplace_init(GridFunction& u) {
    const int N = u.N;
    const int M = (N - 1) * (N - 1);
    if (M <= 0) return;
    auto id = [N](int i, int j) { return (i - 1) * (N - 1) + (j - 1); };
    auto apply = [&](const std::vector<double>& x, std::vector<double>& out) {
        for (int i = 1; i < N; ++i) {
            for (int j = 1; j < N; ++j) {
                double s = 4.0 * x[id(i, j)];
                if (i > 1) s -= x[id(i - 1, j)];
                if (i < N - 1) s -= x[id(i + 1, j)];
                if (j > 1) s -= x[id(i, j - 1)];
                if (j < N - 1) s -= x[id(i, j + 1)];
                out[id(i, j)] = s;
            }
        }
    };
    // rhs from the boundary values
    std::vector<double> x(M), b(M, 0.0), r(M), p(M), ap(M);
    for (int i = 1; i < N; ++i)
        for (int j = 1; j < N; ++j) x[id(i, j)] = u.at(i, j);
    for (int i = 1; i < N; ++i) {
        for (int j = 1; j < N; ++j) {
            double s = 0.0;
            if (i == 1) s += u.at(0, j);
            if (i == N - 1) s += u.at(N, j);
            if (j == 1) s += u.at(i, 0);
            if (j == N - 1) s += u.at(i, N);
            b[id(i, j)] = s;
        }
    }
    apply(x, r);
    double scale = 1.0;
    for (int k = 0; k < M; ++k) {
        r[k] = b[k] - r[k];
        scale = std::max(scale, std::abs(x[k]));
    }
    double rr = 0.0;
    for (int k = 0; k < M; ++k) rr += r[k] * r[k];
    const double tol2 = std::pow(1e-13 * scale, 2) * M;
    if (rr <= tol2) return;
    p = r;
    for (int it = 0; it < 8 * N * N && rr > tol2; ++it) {
        apply(p, ap);
        double pap = 0.0;
        for (int k = 0; k < M; ++k) pap += p[k] * ap[k];
        const double alpha = rr / pap;
        for (int k = 0; k < M; ++k) {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        double rr2 = 0.0;
        for (int k = 0; k < M; ++k) rr2 += r[k] * r[k];
        const double beta = rr2 / rr;
        rr = rr2;
        for (int k = 0; k < M; ++k) p[k] = r[k] + beta * p[k];
    }
    for (int i = 1; i < N; ++i)
        for (int j = 1; j < N; ++j) u.at(i, j) = x[id(i, j)];
}

// dE/du at every node (zero on the boundary): gather of the per-cell
// flux A(x_c, Du), A = D_xi F for the variational case.
std::vector<double> weak_gradient(const VectorField& A,
                                  const GridFunction& u) {
    const int N = u.N;
    const GradientField du = discrete_gradient(u);
    std::vector<std::array<double, 2>> flux(
        static_cast<std::size_t>(N) * N);
    par::for_each(flux.size(), [&](std::size_t c) {
        const int i = static_cast<int>(c) / N;
        const int j = static_cast<int>(c) % N;
        const auto& g = du.g[c];
        const Vec a = A(u.cell_center(i, j), vec2(g[0], g[1]));
        flux[c] = {a(0), a(1)};
    });
    std::vector<double> grad(u.v.size(), 0.0);
    par::for_each(static_cast<std::size_t>(N - 1) * (N - 1),
                  [&](std::size_t k) {
                      const int i = 1 + static_cast<int>(k) / (N - 1);
                      const int j = 1 + static_cast<int>(k) % (N - 1);
                      const auto& c00 = flux[static_cast<std::size_t>(i) * N + j];
                      const auto& cm0 =
                          flux[static_cast<std::size_t>(i - 1) * N + j];
                      const auto& c0m =
                          flux[static_cast<std::size_t>(i) * N + j - 1];
                      grad[u.idx(i, j)] =
                          u.h * (-(c00[0] + c00[1]) + cm0[0] + c0m[1]);
                  });
    return grad;
}

double flux_scale(const VectorField& A, const GridFunction& u) {
    const int N = u.N;
    const GradientField du = discrete_gradient(u);
    const double total = par::block_sum(
        static_cast<std::size_t>(N) * N, [&](std::size_t c) {
            const int i = static_cast<int>(c) / N;
            const int j = static_cast<int>(c) % N;
            const auto& g = du.g[c];
            return A(u.cell_center(i, j), vec2(g[0], g[1])).norm();
        });
    return 1.0 + total / (static_cast<double>(N) * N);
}

}  // namespace

double weak_residual(const VectorField& A, const GridFunction& u) {
    const auto grad = weak_gradient(A, u);
    const auto worst = par::block_max(
        grad.size(), [&](std::size_t k) { return std::abs(grad[k]); });
    return worst.value / (u.h * flux_scale(A, u));
}

std::pair<GridFunction, SolveReport> minimize(const Lagrangian& F,
                                              const BoundaryData& g,
                                              const Patch& patch,
                                              const SolveOptions& opts) {
    GridFunction u(patch.N, patch.side, patch.origin);
    u.fill(g);
    {
        const VectorField A = F.derivative();
        laplace_init(u);
        SolveReport rep;
        rep.problem = "minimize";

        const int N = u.N;
        const int M = (N - 1) * (N - 1);
        auto id = [N](int i, int j) { return (i - 1) * (N - 1) + (j - 1); };

        double E = energy(F, u);
        if (!std::isfinite(E))
            throw EvalError("minimize: non-finite energy at initial iterate");
        rep.energy_trajectory.push_back(E);

        for (int iter = 0; iter < opts.max_newton; ++iter) {
            const auto grad = weak_gradient(A, u);
            const double res =
                par::block_max(grad.size(),
                               [&](std::size_t k) { return std::abs(grad[k]); })
                    .value /
                (u.h * flux_scale(A, u));
            rep.residual = res;
            rep.iterations = iter;
            if (res < opts.tol_res) return std::pair{u, rep};

            // Newton system on the interior
            const GradientField du = discrete_gradient(u);
            std::vector<Eigen::Triplet<double>> trip;
            trip.reserve(static_cast<std::size_t>(N) * N * 9);
            const double h = u.h, h2 = h * h;
            for (int i = 0; i < N; ++i) {
                for (int j = 0; j < N; ++j) {
                    const auto& gc = du.at(i, j);
                    Vec xi = vec2(gc[0], gc[1]);
                    if (xi.norm() < 1e-12) xi = vec2(1e-8, 1e-8);
                    Mat Hc = F.hess(u.cell_center(i, j), xi);
                    // nodes: (i,j) -> (-1,-1)/h, (i+1,j) -> (1,0)/h,
                    // (i,j+1) -> (0,1)/h
                    Eigen::Matrix<double, 2, 3> B;
                    B << -1, 1, 0, -1, 0, 1;
                    B /= h;
                    Eigen::Matrix3d K = h2 * B.transpose() * Hc * B;
                    const int ni[3] = {i, i + 1, i};
                    const int nj[3] = {j, j, j + 1};
                    for (int a = 0; a < 3; ++a) {
                        if (u.is_boundary(ni[a], nj[a])) continue;
                        for (int bb = 0; bb < 3; ++bb) {
                            if (u.is_boundary(ni[bb], nj[bb])) continue;
                            trip.emplace_back(id(ni[a], nj[a]),
                                              id(ni[bb], nj[bb]), K(a, bb));
                        }
                    }
                }
            }
            Eigen::SparseMatrix<double> H(M, M);
            H.setFromTriplets(trip.begin(), trip.end());
            double maxdiag = 0.0;
            for (int k = 0; k < M; ++k)
                maxdiag = std::max(maxdiag, H.coeff(k, k));
            for (int k = 0; k < M; ++k)
                H.coeffRef(k, k) += 1e-12 * maxdiag + 1e-300;

            Eigen::VectorXd rhs(M);
            for (int i = 1; i < N; ++i)
                for (int j = 1; j < N; ++j)
                    rhs(id(i, j)) = -grad[u.idx(i, j)];
            Eigen::ConjugateGradient<Eigen::SparseMatrix<double>,
                                     Eigen::Lower | Eigen::Upper>
                cg;
            cg.setTolerance(1e-10);
            cg.setMaxIterations(6 * M);
            cg.compute(H);
            Eigen::VectorXd d = cg.solve(rhs);

            double gd = 0.0;
            for (int i = 1; i < N; ++i)
                for (int j = 1; j < N; ++j)
                    gd += grad[u.idx(i, j)] * d(id(i, j));
            if (!(gd < 0.0)) {
                // fall back to steepest descent
                for (int k = 0; k < M; ++k) d(k) = rhs(k);
                gd = -rhs.squaredNorm();
            }

            GridFunction trial = u;
            double step = 1.0;
            double Enew = 0.0;
            bool ok = false;
            for (int ls = 0; ls < 60; ++ls) {
                for (int i = 1; i < N; ++i)
                    for (int j = 1; j < N; ++j)
                        trial.at(i, j) = u.at(i, j) + step * d(id(i, j));
                Enew = energy(F, trial);
                if (std::isfinite(Enew) && Enew <= E + 1e-4 * step * gd) {
                    ok = true;
                    break;
                }
                step *= 0.5;
            }
            if (!ok) {
                std::ostringstream os;
                os << "minimize: line search failed at iteration " << iter
                   << " (E=" << E << ", res=" << res << ", |d|=" << d.norm()
                   << ")";
                throw ConvergenceError(os.str());
            }
            u = trial;
            const double dec = (E - Enew) / std::max(1.0, std::abs(E));
            E = Enew;
            rep.energy_trajectory.push_back(E);
            rep.final_energy = E;
            if (dec < opts.tol && iter > 0) {
                const auto g2 = weak_gradient(A, u);
                rep.residual =
                    par::block_max(g2.size(),
                                   [&](std::size_t k) {
                                       return std::abs(g2[k]);
                                   })
                        .value /
                    (u.h * flux_scale(A, u));
                rep.iterations = iter + 1;
                if (rep.residual < opts.tol_res) return std::pair{u, rep};
            }
        }
        throw ConvergenceError("minimize: Newton iteration budget exhausted");
    }
}

std::pair<GridFunction, SolveReport> minimize(const Lagrangian& F,
                                              const BoundaryData& g, int N,
                                              double tol) {
    Patch p;
    p.N = N;
    SolveOptions o;
    o.tol = tol;
    return minimize(F, g, p, o);
}

namespace {

std::pair<GridFunction, SolveReport> gauss_seidel(const VectorField& A,
                                                  GridFunction u,
                                                  const SolveOptions& opts) {
    SolveReport rep;
    rep.problem = "equation";
    laplace_init(u);
    const int N = u.N;
    const double h = u.h;
    const VectorField Aeps = regularize_field(A, opts.eps_reg);

    // snapshot-based red/black sweeps: reads come from the pre-color
    // copy, so the schedule is deterministic for any thread count.
    std::vector<double> snap;
    double relax = opts.relax;
    double res = weak_residual(A, u);
    double res_prev = res;
    std::vector<double> history{res};

    auto cell_flux = [&](const std::vector<double>& vals, int ci, int cj,
                         Vec& a, Mat& J) {
        const double d1 =
            (vals[u.idx(ci + 1, cj)] - vals[u.idx(ci, cj)]) / h;
        const double d2 =
            (vals[u.idx(ci, cj + 1)] - vals[u.idx(ci, cj)]) / h;
        const Vec xi = vec2(d1, d2);
        const Point xc = u.cell_center(ci, cj);
        if (xi.norm() < opts.eps_gradient) {
            a = Aeps(xc, xi);
            J = Aeps.jacobian(xc, xi.norm() == 0.0 ? vec2(1e-300, 0) : xi);
        } else {
            a = A(xc, xi);
            J = A.jacobian(xc, xi);
        }
    };

    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        for (int color = 0; color < 2; ++color) {
            snap = u.v;
            par::for_each(
                static_cast<std::size_t>(N - 1) * (N - 1),
                [&](std::size_t k) {
                    const int i = 1 + static_cast<int>(k) / (N - 1);
                    const int j = 1 + static_cast<int>(k) % (N - 1);
                    if ((i + j) % 2 != color) return;
                    Vec a00(2), am0(2), a0m(2);
                    Mat J00(2, 2), Jm0(2, 2), J0m(2, 2);
                    cell_flux(snap, i, j, a00, J00);
                    cell_flux(snap, i - 1, j, am0, Jm0);
                    cell_flux(snap, i, j - 1, a0m, J0m);
                    const double r =
                        h * (-(a00(0) + a00(1)) + am0(0) + a0m(1));
                    const double dr =
                        J00(0, 0) + J00(0, 1) + J00(1, 0) + J00(1, 1) +
                        Jm0(0, 0) + J0m(1, 1);
                    if (!(dr > 1e-300)) return;
                    double du = -r / dr;
                    const double clamp = 10.0 * (h + std::abs(snap[u.idx(i, j)]));
                    du = std::clamp(du, -clamp, clamp);
                    u.at(i, j) = snap[u.idx(i, j)] + relax * du;
                });
        }
        if (sweep % 8 == 7 || sweep == 0) {
            res = weak_residual(A, u);
            history.push_back(res);
            rep.iterations = sweep + 1;
            if (res < opts.tol_res) {
                rep.residual = res;
                return {u, rep};
            }
            if (res > res_prev) relax = std::max(1.0, relax * 0.7);
            res_prev = res;
            // residual plateau over ~1000 sweeps
            if (history.size() > 128 &&
                res > 0.99 * history[history.size() - 126]) {
                std::ostringstream os;
                os << "solve_equation: stagnation at residual " << res
                   << " after " << sweep + 1 << " sweeps";
                throw ConvergenceError(os.str());
            }
        }
    }
    std::ostringstream os;
    os << "solve_equation: sweep budget exhausted at residual "
       << weak_residual(A, u);
    throw ConvergenceError(os.str());
}

}  // namespace

std::pair<GridFunction, SolveReport> solve_equation(
    const VectorField& A, const BoundaryData& g, const Patch& patch,
    const SolveOptions& opts, const Lagrangian* variational) {
    if (variational) {
        auto [u, rep] = minimize(*variational, g, patch, opts);
        rep.problem = "equation-delegated";
        return {std::move(u), std::move(rep)};
    }
    GridFunction u(patch.N, patch.side, patch.origin);
    u.fill(g);
    return gauss_seidel(A, std::move(u), opts);
}

QuasiminimizerEstimate quasiminimizer_constant(const PhiFunction& phi,
                                               const GridFunction& u,
                                               int bumps,
                                               std::uint64_t seed) {
    QuasiminimizerEstimate est;
    const int N = u.N;
    const GradientField du = discrete_gradient(u);
    const std::uint64_t skip = mix64(seed) % 499;
    for (int b = 0; b < bumps; ++b) {
        const std::uint64_t k = static_cast<std::uint64_t>(b) + skip;
        const int ci = 2 + static_cast<int>(halton(k, 2) * (N - 3));
        const int cj = 2 + static_cast<int>(halton(k, 3) * (N - 3));
        const double rho = u.h * (2.0 + 6.0 * halton(k, 5));
        const int reach = static_cast<int>(rho / u.h) + 1;
        if (ci - reach < 1 || cj - reach < 1 || ci + reach > N - 1 ||
            cj + reach > N - 1)
            continue;
        const double amp =
            (b % 2 == 0 ? 1.0 : -1.0) * (0.3 + 0.7 * halton(k, 7)) * rho;
        GridFunction v = u;
        const Point c = u.node(ci, cj);
        for (int i = ci - reach; i <= ci + reach; ++i)
            for (int j = cj - reach; j <= cj + reach; ++j) {
                const double d = dist(u.node(i, j), c);
                if (d < rho) v.at(i, j) += amp * (1.0 - d / rho);
            }
        const GradientField dv = discrete_gradient(v);
        double num = 0.0, den = 0.0;
        for (int i = std::max(0, ci - reach - 1); i <= std::min(N - 1, ci + reach); ++i)
            for (int j = std::max(0, cj - reach - 1); j <= std::min(N - 1, cj + reach); ++j) {
                const auto& g0 = du.at(i, j);
                const auto& g1 = dv.at(i, j);
                if (g0 == g1) continue;
                const Point xc = u.cell_center(i, j);
                num += phi(xc, std::hypot(g0[0], g0[1]));
                den += phi(xc, std::hypot(g1[0], g1[1]));
            }
        if (den > 0.0) {
            est.Q = std::max(est.Q, num / den);
            ++est.bumps;
        }
    }
    return est;
}

ComparisonRecord comparison_experiment(const Model& model,
                                       const GrowthCertificate& cert,
                                       const Modulus& omega,
                                       const ComparisonConfig& cfg) {
    ComparisonRecord rec;
    rec.r = cfg.r;
    const double half = M_SQRT2 * cfg.r;  // outer square inscribed in B_2r
    if (cfg.x0.x - half < 0.0 || cfg.x0.y - half < 0.0 ||
        cfg.x0.x + half > 1.0 || cfg.x0.y + half > 1.0)
        throw ParamError("comparison: B_2r leaves the domain");
    if (M_PI * 4.0 * cfg.r * cfg.r > 1.0)
        throw ParamError("comparison: |B_2r| <= 1 cap violated");
    if (cfg.N % 4 != 0)
        throw ParamError("comparison: N must be divisible by 4");

    BoundaryData g = cfg.g;
    if (!g)
        g = [](Point p) {
            return 0.4 * (p.x * p.x - p.y * p.y);
        };

    Patch outer{{cfg.x0.x - half, cfg.x0.y - half}, 2.0 * half, cfg.N};
    std::pair<GridFunction, SolveReport> solved =
        cfg.functional && model.variational
            ? minimize(model.F, g, outer, cfg.solve)
            : solve_equation(model.A, g, outer, cfg.solve,
                             model.variational ? &model.F : nullptr);
    const GridFunction& u = solved.first;

    const PhiFunction phi = cert.phi();
    const auto hi = higher_integrability(phi, u, cfg.x0, cfg.r / 2.0);
    rec.sigma = std::max(hi.sigma, cfg.sigma_floor);
    rec.epsilon = rec.sigma / (2.0 * (2.0 + rec.sigma));

    const Ball br{cfg.x0, cfg.r};
    rec.t1_raw = cert.phi_inf_ball_inverse(br, omega(cfg.r));
    rec.t2_raw = cert.phi_inf_ball_inverse(br, 1.0 / br.measure());
    // desk-scale clamps; the tiny floor keeps the head constructible
    // when omega vanishes (autonomous data)
    rec.t1 = std::clamp(rec.t1_raw, 1e-3, 0.5);
    rec.t2 = std::max(rec.t2_raw, 2.0);
    rec.strict_caps_ok =
        omega(cfg.r) <= std::pow(2.0, -cert.q1) / model.A.sc.L &&
        rec.t1_raw <= 0.5 && rec.t2_raw >= 2.0;

    ApproximationBundle bundle =
        cfg.functional && model.variational
            ? build_fbar(model.F, cert, cfg.x0, rec.t1, rec.t2)
            : build_abar(model.A, cert, cfg.x0, rec.t1, rec.t2);
    rec.nuBar = bundle.nuBar;
    rec.LambdaBar = bundle.LambdaBar;

    // inner solve takes its Dirichlet trace (and warm start) from u
    GridFunction inner = u.inner_half();
    std::pair<GridFunction, SolveReport> inner_solved = [&]() {
        Patch ip{inner.origin, inner.side(), inner.N};
        auto trace = [&inner](Point p) {
            const int i = static_cast<int>(
                std::lround((p.x - inner.origin.x) / inner.h));
            const int j = static_cast<int>(
                std::lround((p.y - inner.origin.y) / inner.h));
            return inner.at(std::clamp(i, 0, inner.N),
                            std::clamp(j, 0, inner.N));
        };
        if (bundle.has_fbar) return minimize(bundle.fbar, trace, ip, cfg.solve);
        return solve_equation(bundle.abar, trace, ip, cfg.solve, nullptr);
    }();
    const GridFunction& ubar = inner_solved.first;

    // cell-aligned L1 gradient gap on the inner square
    const GradientField du = discrete_gradient(u);
    const GradientField dub = discrete_gradient(ubar);
    const int off = cfg.N / 4;
    double gap = 0.0;
    for (int i = 0; i < ubar.N; ++i) {
        for (int j = 0; j < ubar.N; ++j) {
            const auto& a = du.at(off + i, off + j);
            const auto& b = dub.at(i, j);
            gap += std::hypot(a[0] - b[0], a[1] - b[1]);
        }
    }
    rec.l1_gap = gap / (static_cast<double>(ubar.N) * ubar.N);
    double mean_du = 0.0;
    for (const auto& a : du.g) mean_du += std::hypot(a[0], a[1]);
    rec.mean_du_outer = mean_du / static_cast<double>(du.g.size());
    rec.normalized_gap = rec.l1_gap / (rec.mean_du_outer + 1.0);

    const double gamma =
        2.0 * rec.sigma * rec.sigma / (4.0 * (2.0 + rec.sigma));
    const double wexp = (cfg.functional ? cert.p1 : cert.p1 - 1.0) /
                        (2.0 * cert.q1 * cert.q1);
    rec.predicted_rhs = std::pow(omega(cfg.r), wexp) +
                        std::pow(cfg.r, gamma / (2.0 * cert.q1));
    rec.energies = energy_comparison_suite(phi, bundle.phibar, u, ubar, rec.sigma);
    return rec;
}

}  // namespace qig
