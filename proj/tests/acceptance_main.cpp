// Acceptance suite: one line per criterion, hard exit on failure.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <iostream>
#include <string>
#include <vector>

#include "qig/config.hpp"
#include "qig/report.hpp"
#include "qig/runner.hpp"
#include "qig/sampling.hpp"
#include "qig/solver.hpp"

using namespace qig;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << criterion
              << ": " << detail << "\n";
    if (!pass) ++g_failures;
}

double seconds_since(
    const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t0)
        .count();
}

Model family_model(const std::string& family) {
    ModelSpec s;
    s.family = family;
    if (family == "p_laplace") {
        s.p = 2.5;
    } else if (family == "variable_exponent") {
        s.exponent = ScalarField::linear(2.0, 0.3);
    } else if (family == "double_phase") {
        s.p = 2.0;
        s.q = 3.0;
        s.coefficient = ScalarField::linear(0.0, 1.0);
    } else if (family == "orlicz_double_phase") {
        s.p = 2.0;
        s.q = 3.0;
        s.coefficient = ScalarField::linear(0.0, 1.0);
    } else if (family == "aniso_quartic") {
        s.p = 2.0;
        s.q = 2.5;
        s.coefficient = ScalarField::constant(0.5);
        s.weight = ScalarField::constant(1.0);
    }
    return build_model(s);
}

const std::vector<std::string> kFamilies = {
    "p_laplace", "variable_exponent", "double_phase", "orlicz_double_phase",
    "aniso_quartic"};

GrowthGrid quick_grid(int per_side) {
    GrowthGrid g;
    g.t_count = 49;
    g.x_per_side = per_side;
    g.directions = 32;
    return g;
}

// -------------------------------------------------------------------

void criterion1() {
    const auto t0 = std::chrono::steady_clock::now();
    ModelSpec s;
    s.family = "p_laplace";
    s.p = 3.0;
    const Model m = build_model(s);

    double worst = 0.0;
    for (double t : log_grid(1e-3, 1e3, 61)) {
        const double psi = extract_psi_prime(m.A, {0.5, 0.5}, t, 64);
        worst = std::max(worst, std::abs(psi - 2.0 * t * t) / (2.0 * t * t));
    }
    const auto cert = build_growth_function(m.A);
    const double ratio = cert.nu / cert.Lambda;
    const double el = seconds_since(t0);
    const bool pass = worst <= 0.01 && std::abs(ratio - 0.5) <= 0.025 &&
                      el < 10.0;
    std::ostringstream os;
    os << "p=3 psi' within " << worst * 100 << "% of 2t^2, nu/Lambda="
       << ratio << " (target 0.5 +- 5%), " << el << " s";
    report(1, pass, os.str());
}

void criterion2() {
    ModelSpec s;
    s.family = "p_laplace";
    s.p = 2.0;
    const Model m = build_model(s);
    const auto certA = build_growth_function(m.A);
    const auto certF = build_growth_function(m.F);
    std::ostringstream os;
    os << "c1=" << certA.c1 << " (target 2 +- 1%), c2=" << certF.c2
       << " (target 1 +- 1%)";
    report(2, std::abs(certA.c1 - 2.0) <= 0.02 &&
                  std::abs(certF.c2 - 1.0) <= 0.01,
           os.str());
}

void criterion3() {
    bool pass = true;
    std::ostringstream os;
    double worst_annulus = 0.0;
    for (const auto& family : kFamilies) {
        const Model m = family_model(family);
        const auto cert = build_growth_function(
            m.F, quick_grid(m.F.autonomous ? 1 : 5));
        const Point x0{0.5, 0.5};
        double nu_lo = 1e300, nu_hi = 0.0, lam_lo = 1e300, lam_hi = 0.0;
        double fnu_lo = 1e300, fnu_hi = 0.0, flam_lo = 1e300, flam_hi = 0.0;
        for (double t1 : {0.005, 0.05, 0.5}) {
            for (double t2 : {2.0, 20.0, 200.0}) {
                const auto ab = build_abar(m.A, cert, x0, t1, t2);
                const auto ra =
                    verify_growth_of_approx(ab.abar, ab.phibar, t1, t2);
                if (!ra.pass) {
                    pass = false;
                    os << family << " Abar fails at (" << t1 << "," << t2
                       << ") in " << ra.failed_interval << "; ";
                }
                nu_lo = std::min(nu_lo, ra.nu);
                nu_hi = std::max(nu_hi, ra.nu);
                lam_lo = std::min(lam_lo, ra.Lambda);
                lam_hi = std::max(lam_hi, ra.Lambda);

                const auto fb = build_fbar(m.F, cert, x0, t1, t2);
                const auto rf = verify_growth_of_approx(
                    fb.fbar.derivative(), fb.phibar, t1, t2);
                if (!rf.pass) {
                    pass = false;
                    os << family << " Fbar fails at (" << t1 << "," << t2
                       << ") in " << rf.failed_interval << "; ";
                }
                fnu_lo = std::min(fnu_lo, rf.nu);
                fnu_hi = std::max(fnu_hi, rf.nu);
                flam_lo = std::min(flam_lo, rf.Lambda);
                flam_hi = std::max(flam_hi, rf.Lambda);

                // annulus identity at machine precision (relative)
                const auto dirs = sphere_directions(2, 8, 11);
                for (double t : lin_grid(2.0 * t1, t2 / 2.0, 7)) {
                    for (const auto& e : dirs) {
                        const Vec va = ab.abar({0, 0}, t * e);
                        const Vec vm = m.A(x0, t * e);
                        worst_annulus =
                            std::max(worst_annulus, (va - vm).norm() /
                                                        (1.0 + vm.norm()));
                        const double f = m.F(x0, t * e);
                        worst_annulus = std::max(
                            worst_annulus,
                            std::abs(fb.fbar({0, 0}, t * e) - f) /
                                (1.0 + std::abs(f)));
                    }
                }
            }
        }
        if (nu_hi / nu_lo >= 2.0 || lam_hi / lam_lo >= 2.0) {
            pass = false;
            os << family << " Abar constants vary " << nu_hi / nu_lo << "x/"
               << lam_hi / lam_lo << "x; ";
        }
        if (fnu_hi / fnu_lo >= 2.0 || flam_hi / flam_lo >= 2.0) {
            pass = false;
            os << family << " Fbar constants vary " << fnu_hi / fnu_lo
               << "x/" << flam_hi / flam_lo << "x; ";
        }
    }
    // a couple of ulps at the shell boundaries is machine precision
    if (worst_annulus > 4.0 * std::numeric_limits<double>::epsilon()) {
        pass = false;
        os << "annulus identity off by " << worst_annulus << "; ";
    }
    os << "all five families swept, annulus residue " << worst_annulus;
    report(3, pass, os.str());
}

void criterion4() {
    ModelSpec s;
    s.family = "variable_exponent";
    s.exponent = ScalarField::linear(2.0, 0.3);
    const Model m = build_model(s);
    const auto cert = build_growth_function(m.A, quick_grid(9));
    const Modulus omega = [](double r) {
        return std::min(1.0, 0.3 * r * std::log(1.0 / r));
    };
    bool pass = true;
    std::ostringstream os;
    for (double r : {0.05, 0.1, 0.2}) {
        const Ball ball{{0.5, 0.5}, r};
        const auto prop = verify_field_continuity(
            m.A, cert, 0.25, omega, ContinuitySample::standard(8, 0.02, 0.3));
        const double Lt = std::max(1.0, prop.c_band);
        const double t1 =
            std::min(0.5, cert.phi_inf_ball_inverse(ball, omega(r)));
        const double t2 = std::max(
            2.0, cert.phi_inf_ball_inverse(ball, 1.0 / ball.measure()));
        const auto pb = build_phibar(cert, ball.center, t1, t2);
        const auto rep = check_phibar(cert, pb, Lt, ball, t1, t2);
        pass = pass && rep.pass && rep.prime_inc_constant <= 1.0 + 1e-9 &&
               rep.prime_dec_constant <= 1.0 + 1e-9 &&
               rep.envelope_factor <= rep.envelope_bound + 1e-9;
        os << "r=" << r << " items "
           << (rep.prime_pass ? "1" : "-") << (rep.mid_pass ? "2" : "-")
           << (rep.envelope_pass ? "3" : "-") << (rep.compose_pass ? "4" : "-")
           << " Ltilde=" << Lt << "; ";
    }
    report(4, pass, os.str());
}

void criterion5() {
    bool pass = true;
    std::ostringstream os;

    // chain VA1 => wVA1 => A1 on every family
    ContinuitySample sample = ContinuitySample::standard(10, 1e-3, 0.4);
    for (const auto& family : kFamilies) {
        const Model m = family_model(family);
        const auto cert = build_growth_function(
            m.A, quick_grid(m.A.autonomous ? 1 : 5));
        const GMap G = a_minus_one(m.A);
        const double K = 2.0 * std::max(1.0, cert.c1);
        const auto va1 =
            check_continuity(G, ContinuityTag::VA1, K, 0.0, cert, sample);
        const auto wva1 =
            check_continuity(G, ContinuityTag::wVA1, K, 0.5, cert, sample);
        const auto a1 =
            check_continuity(G, ContinuityTag::A1, K, 0.0, cert, sample);
        const bool chain = (!va1.pass || wva1.pass) && (!wva1.pass || a1.pass);
        if (!chain) {
            pass = false;
            os << family << " chain broken; ";
        }
    }

    // variable exponent with omega_p(r) = r^0.5; the log-shaped modulus shows
    // at small radii, where the admissible-range ceiling scales cleanly
    {
        ModelSpec s;
        s.family = "variable_exponent";
        s.exponent = ScalarField::holder_bump(2.0, 1.0, 0.5);
        const Model m = build_model(s);
        const auto cert = build_growth_function(m.A, quick_grid(9));
        const auto rep = check_continuity(
            a_minus_one(m.A), ContinuityTag::wVA1, 2.0 * cert.c1, 0.5, cert,
            ContinuitySample::standard(10, 3e-5, 3e-3));
        double c_num = 0.0, c_den = 0.0;
        for (const auto& row : rep.table) {
            const double mv = std::sqrt(row.r) * std::log(1.0 / row.r);
            c_num += row.omega_tight * mv;
            c_den += mv * mv;
        }
        const double c = c_num / c_den;
        double rms = 0.0;
        for (const auto& row : rep.table) {
            const double pred = c * std::sqrt(row.r) * std::log(1.0 / row.r);
            const double rel = (row.omega_tight - pred) / row.omega_tight;
            rms += rel * rel;
        }
        rms = std::sqrt(rms / rep.table.size());
        os << "var-exp log-fit residual " << rms * 100 << "% (c=" << c << "); ";
        if (!(rms < 0.10) || !rep.pass) pass = false;
    }

    // double phase regime split: q/p = 1 + beta/n passes, 1 + 2 beta/n
    // produces explicit violations
    {
        const double beta = 0.5;
        auto dp = [&](double ratio) {
            ModelSpec s;
            s.family = "double_phase";
            s.p = 2.0;
            s.q = 2.0 * ratio;
            s.coefficient = ScalarField::holder_bump(0.0, 1.0, beta);
            return build_model(s);
        };
        const Model good = dp(1.0 + beta / 2.0);
        const auto cg = build_growth_function(good.F, quick_grid(9));
        const auto rg =
            check_continuity(g_of_lagrangian(good.F), ContinuityTag::wVA1,
                             2.0 * cg.c2, 0.25, cg, sample);
        const Model bad = dp(1.0 + 2.0 * beta / 2.0);
        const auto cb = build_growth_function(bad.F, quick_grid(9));
        const auto rb =
            check_continuity(g_of_lagrangian(bad.F), ContinuityTag::wVA1,
                             2.0 * cb.c2, 0.25, cb, sample);
        os << "double-phase in-regime " << (rg.pass ? "pass" : "FAIL")
           << ", breaking regime violations " << rb.violations.size();
        if (!rg.pass || rb.pass || rb.violations.empty()) pass = false;
    }
    report(5, pass, os.str());
}

void criterion6() {
    const auto t0 = std::chrono::steady_clock::now();
    bool pass = true;
    std::ostringstream os;

    ModelSpec s;
    s.family = "p_laplace";
    s.p = 2.0;
    const Model lap = build_model(s);
    const BoundaryData quad = [](Point p) {
        return p.x * p.x - p.y * p.y;
    };
    auto [u, rep] = minimize(lap.F, quad, 64, 1e-8);
    double err = 0.0;
    for (int i = 0; i <= u.N; ++i)
        for (int j = 0; j <= u.N; ++j)
            err = std::max(err, std::abs(u.at(i, j) - quad(u.node(i, j))));
    os << "p=2 quadratic nodal error " << err << "; ";
    if (err > 1e-8) pass = false;

    const BoundaryData affine = [](Point p) { return p.x - 2.0 * p.y; };
    for (const auto& family : kFamilies) {
        const Model m = family_model(family);
        const Lagrangian F0 = m.F.frozen({0.4, 0.6});
        auto [ua, ra] = minimize(F0, affine, 64, 1e-8);
        double e = 0.0;
        for (int i = 0; i <= ua.N; ++i)
            for (int j = 0; j <= ua.N; ++j)
                e = std::max(e,
                             std::abs(ua.at(i, j) - affine(ua.node(i, j))));
        if (e != 0.0) {
            pass = false;
            os << family << " affine error " << e << "; ";
        }
    }
    const double el = seconds_since(t0);
    os << "affine exact for all families, " << el << " s";
    if (el >= 30.0) pass = false;
    report(6, pass, os.str());
}

void criterion7() {
    const Model m = family_model("double_phase");
    const BoundaryData g = [](Point p) {
        return 0.5 * (p.x * p.x - p.y * p.y);
    };
    Patch patch;
    patch.N = 64;
    SolveOptions opts;
    opts.tol_res = 1e-9;
    // strip the variational declaration: exercise the Gauss-Seidel path
    auto [ugs, r1] = solve_equation(m.A, g, patch, opts, nullptr);
    auto [umin, r2] = minimize(m.F, g, patch, opts);
    const GradientField d1 = discrete_gradient(ugs);
    const GradientField d2 = discrete_gradient(umin);
    double gap = 0.0;
    for (std::size_t c = 0; c < d1.g.size(); ++c)
        gap += std::hypot(d1.g[c][0] - d2.g[c][0], d1.g[c][1] - d2.g[c][1]);
    gap /= static_cast<double>(d1.g.size());
    std::ostringstream os;
    os << "L1 gradient gap " << gap << " (cap 1e-5), GS sweeps "
       << r1.iterations << ", Newton iters " << r2.iterations;
    report(7, gap < 1e-5, os.str());
}

void criterion8() {
    const auto t0 = std::chrono::steady_clock::now();
    ModelSpec s;
    s.family = "variable_exponent";
    s.exponent = ScalarField::holder_bump(2.0, 0.05, 0.3);
    const Model m = build_model(s);
    const auto cert = build_growth_function(m.A, quick_grid(9));
    const Modulus omega = [](double r) {
        return std::min(1.0, 0.05 * std::pow(r, 0.3));
    };
    // gradient range inside the annulus [2 t1, t2/2] for all radii, so
    // the measured gap isolates the coefficient-freezing effect
    const BoundaryData g = [](Point p) {
        const double x = p.x - 0.5, y = p.y - 0.5;
        return 1.5 * x + 0.4 * (x * x - y * y);
    };
    std::vector<double> rs{0.2, 0.1, 0.05}, gaps;
    std::ostringstream os;
    for (double r : rs) {
        ComparisonConfig cc;
        cc.r = r;
        cc.N = 64;
        cc.g = g;
        cc.solve.tol_res = 1e-9;
        const auto rec = comparison_experiment(m, cert, omega, cc);
        gaps.push_back(rec.normalized_gap);
        os << "r=" << r << " gap=" << rec.normalized_gap << "; ";
    }
    const bool monotone = gaps[0] > gaps[1] && gaps[1] > gaps[2];
    // log-log slope of gap against r must be positive
    double su = 0, sv = 0, suu = 0, suv = 0;
    for (std::size_t i = 0; i < rs.size(); ++i) {
        const double uu = std::log(rs[i]), vv = std::log(gaps[i]);
        su += uu;
        sv += vv;
        suu += uu * uu;
        suv += uu * vv;
    }
    const double n = static_cast<double>(rs.size());
    const double slope = (n * suv - su * sv) / (n * suu - su * su);
    const double el = seconds_since(t0);
    os << "slope=" << slope << ", " << el << " s";
    report(8, monotone && slope > 0.0 && el < 300.0, os.str());
}

void criterion9() {
    bool pass = true;
    std::ostringstream os;
    const Point c{0.5, 0.5};
    const auto radii = lin_grid(0.04, 0.45, 8);
    for (double alpha : {0.3, 0.5, 1.0}) {
        GridFunction u(128, 1.0, {0, 0});
        u.fill([alpha, c](Point p) {
            return std::pow(dist(p, c), alpha);
        });
        const auto fit = holder_exponent(u, c, radii);
        os << "alpha " << alpha << " -> " << fit.alpha << "; ";
        if (std::abs(fit.alpha - alpha) > 0.05) pass = false;
    }
    // monotonicity of the reverse-Holder LHS is asserted inside; run a
    // couple of profiles through it
    ModelSpec s;
    s.family = "p_laplace";
    s.p = 2.0;
    const Model m = build_model(s);
    const auto cert = build_growth_function(m.A);
    for (double scale : {0.1, 0.3}) {
        GridFunction u(32, 1.0, {0, 0});
        u.fill([scale](Point p) {
            return scale * (p.x * p.x - p.y * p.y);
        });
        const auto hi = higher_integrability(cert.phi(), u, c, 0.1);
        if (!hi.monotone) pass = false;
    }
    os << "reverse-Holder LHS monotone";
    report(9, pass, os.str());
}

void criterion10() {
    const fs::path out1 = fs::temp_directory_path() / "qig_acc_det1";
    const fs::path out2 = fs::temp_directory_path() / "qig_acc_det2";
    fs::remove_all(out1);
    fs::remove_all(out2);
    Json j;
    j["model"] = {{"family", "variable_exponent"},
                  {"exponent",
                   {{"profile", "linear"}, {"base", 2.0}, {"slope", 0.3}}}};
    j["pipeline"] = "full";
    j["seed"] = 1234;
    j["solver_N"] = 32;
    j["grid"] = {{"t_count", 49}, {"x_per_side", 5}, {"directions", 32}};
    j["ball_radii"] = {0.2, 0.1};
    ExperimentConfig cfg = parse_config(j);

    cfg.out_dir = out1.string();
    const int rc1 = run_pipeline(cfg);
    cfg.out_dir = out2.string();
    const int rc2 = run_pipeline(cfg);

    bool pass = rc1 == 0 && rc2 == 0;
    std::ostringstream os;
    os << "exit codes " << rc1 << "/" << rc2;
    const std::vector<std::string> csvs = {"moduli.csv", "oscillation.csv",
                                           "solution.csv", "gradient.csv",
                                           "comparison.csv"};
    for (const auto& name : csvs) {
        std::ifstream a(out1 / name, std::ios::binary);
        std::ifstream b(out2 / name, std::ios::binary);
        if (!a || !b) {
            pass = false;
            os << ", missing " << name;
            continue;
        }
        const std::string sa((std::istreambuf_iterator<char>(a)), {});
        const std::string sb((std::istreambuf_iterator<char>(b)), {});
        if (sa != sb) {
            pass = false;
            os << ", " << name << " differs";
        }
    }
    os << ", " << csvs.size() << " CSVs byte-compared";
    fs::remove_all(out1);
    fs::remove_all(out2);
    report(10, pass, os.str());
}

}  // namespace

int main() {
    std::cout << "acceptance suite\n";
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    criterion10();
    if (g_failures > 0) {
        std::cout << g_failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all criteria passed\n";
    return 0;
}
