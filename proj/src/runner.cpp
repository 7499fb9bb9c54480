#include "qig/runner.hpp"

#include <filesystem>
#include <sstream>

#include "qig/parallel.hpp"

namespace qig {

namespace {

namespace fs = std::filesystem;

struct StageContext {
    ExperimentConfig cfg;
    fs::path out;
    Model model;
    GrowthCertificate cert;
    bool have_cert = false;
    ContinuityReport wva1;
    bool have_wva1 = false;

    const GrowthCertificate& certificate() {
        if (!have_cert) {
            cert = model.variational
                       ? build_growth_function(model.F, cfg.grid)
                       : build_growth_function(model.A, cfg.grid);
            have_cert = true;
        }
        return cert;
    }

    double choose_K() {
        const auto& c = certificate();
        if (cfg.K > 0.0) return cfg.K;
        return 2.0 * std::max(1.0, cfg.functional && c.c2 > 0 ? c.c2 : c.c1);
    }

    Modulus fitted_modulus() {
        const auto& rep = wva1_report();
        if (rep.all_zero) return [](double) { return 0.0; };
        const double C = rep.C_fit, beta = std::max(rep.beta_fit, 0.0);
        return [C, beta](double r) {
            return std::min(1.0, std::max(1e-4, C * std::pow(r, beta)));
        };
    }

    const ContinuityReport& wva1_report() {
        if (!have_wva1) {
            ContinuitySample sample = ContinuitySample::standard();
            sample.seed = cfg.seed;
            const GMap G = cfg.functional && model.variational
                               ? g_of_lagrangian(model.F)
                               : a_minus_one(model.A);
            wva1 = check_continuity(G, ContinuityTag::wVA1, choose_K(),
                                    cfg.epsilon, certificate(), sample);
            have_wva1 = true;
        }
        return wva1;
    }
};

BoundaryData default_data() {
    return [](Point p) { return 0.4 * (p.x * p.x - p.y * p.y); };
}

void emit(const StageContext& ctx, const std::string& name, const Json& rep) {
    std::string why;
    if (!validate_report(rep, &why))
        throw EvalError("runner: report '" + name +
                        "' failed schema validation: " + why);
    write_json(ctx.out / name, rep);
}

bool stage_conditions(StageContext& ctx) {
    Json rep = report_envelope("conditions", ctx.cfg.model.family,
                               ctx.cfg.seed);
    const auto& cert = ctx.certificate();
    ContinuitySample sample = ContinuitySample::standard();
    sample.seed = ctx.cfg.seed;
    const GMap G = ctx.cfg.functional && ctx.model.variational
                       ? g_of_lagrangian(ctx.model.F)
                       : a_minus_one(ctx.model.A);
    const double K = ctx.choose_K();

    const auto a1 =
        check_continuity(G, ContinuityTag::A1, K, 0.0, cert, sample);
    const auto va1 =
        check_continuity(G, ContinuityTag::VA1, K, 0.0, cert, sample);
    const auto& wva1 = ctx.wva1_report();

    // phi-side condition checks on the certificate
    const PhiFunction phi = cert.phi();
    SampleGrid grid = cert.autonomous ? SampleGrid::autonomous()
                                      : SampleGrid::standard();
    const auto inc =
        check_condition(phi, Condition::Inc, cert.p1, grid, 1.0 + 1e-9);
    const auto dec =
        check_condition(phi, Condition::Dec, cert.q1, grid, 1.0 + 1e-9);
    const auto a0 = check_condition(phi, Condition::A0, 0.0, grid, 1e6);

    rep["data"]["A1"] = to_json(a1);
    rep["data"]["VA1"] = to_json(va1);
    rep["data"]["wVA1"] = to_json(wva1);
    rep["data"]["phi_Inc"] = inc.witnessed_constant;
    rep["data"]["phi_Dec"] = dec.witnessed_constant;
    rep["data"]["phi_A0"] = a0.witnessed_constant;
    // chain consistency on this sample set
    const bool chain = (!va1.pass || wva1.pass) && (!wva1.pass || a1.pass);
    rep["data"]["chain_consistent"] = chain;
    rep["pass"] = wva1.pass && chain;

    std::vector<std::vector<double>> rows;
    for (const auto& row : wva1.table)
        rows.push_back({row.r, row.omega_tight, wva1.Lbar});
    write_csv(ctx.out / "moduli.csv", {"r", "omega", "Lbar"}, rows);
    emit(ctx, "conditions.json", rep);
    return rep["pass"].get<bool>();
}

bool stage_certificate(StageContext& ctx) {
    Json rep = report_envelope("certificate", ctx.cfg.model.family,
                               ctx.cfg.seed);
    const auto& cert = ctx.certificate();
    rep["data"]["certificate"] = to_json(cert);
    const auto equivA = check_equivalences(cert, ctx.model.A, ctx.cfg.grid);
    rep["data"]["equivalence_A"] = to_json(equivA);
    if (ctx.model.variational) {
        const auto equivF =
            check_equivalences(cert, ctx.model.F, ctx.cfg.grid);
        rep["data"]["equivalence_F"] = to_json(equivF);
    }
    const auto mono = check_monotonicity(ctx.model.A, cert, 256, ctx.cfg.seed);
    rep["data"]["monotonicity"] = to_json(mono);
    const bool pass = cert.nu > 0.0 && mono.pass;
    rep["pass"] = pass;
    emit(ctx, "certificate.json", rep);
    return pass;
}

bool stage_approx(StageContext& ctx) {
    Json rep = report_envelope("approx_verify", ctx.cfg.model.family,
                               ctx.cfg.seed);
    const auto& cert = ctx.certificate();
    const double t1 = 0.25, t2 = 4.0;
    const Point x0 = ctx.cfg.x0;

    const auto bundle = build_abar(ctx.model.A, cert, x0, t1, t2);
    const auto growthA =
        verify_growth_of_approx(bundle.abar, bundle.phibar, t1, t2);
    rep["data"]["abar_growth"] = to_json(growthA);
    rep["data"]["bundle"] = {{"t1", bundle.t1},
                             {"t2", bundle.t2},
                             {"a1", bundle.a1},
                             {"a2", bundle.a2},
                             {"LambdaBar", bundle.LambdaBar},
                             {"eta_bound_C", bundle.eta_bound_C}};
    bool pass = growthA.pass;

    if (ctx.model.variational) {
        const auto fb = build_fbar(ctx.model.F, cert, x0, t1, t2);
        const auto growthF = verify_growth_of_approx(
            fb.fbar.derivative(), fb.phibar, t1, t2);
        rep["data"]["fbar_growth"] = to_json(growthF);
        rep["data"]["nuBar"] = fb.nuBar;
        pass = pass && growthF.pass;
    }

    // phibar envelope checks on the configured balls
    const Modulus omega = ctx.fitted_modulus();
    Json suite = Json::array();
    for (double r : ctx.cfg.ball_radii) {
        const Ball ball{x0, r};
        const auto prop =
            ctx.cfg.functional && ctx.model.variational
                ? verify_integrand_continuity(ctx.model.F, cert, ctx.cfg.epsilon,
                                     omega)
                : verify_field_continuity(ctx.model.A, cert, ctx.cfg.epsilon,
                                     omega);
        const auto pb = build_phibar(cert, x0, std::min(t1, 0.5), t2);
        const auto p51 =
            check_phibar(cert, pb, std::max(1.0, prop.c_band), ball,
                              std::min(t1, 0.5), t2);
        Json item;
        item["r"] = r;
        item["Ltilde"] = prop.c_band;
        item["phibar_checks"] = to_json(p51);
        suite.push_back(item);
        pass = pass && p51.pass;
    }
    rep["data"]["phibar_checks"] = suite;
    rep["pass"] = pass;
    emit(ctx, "approx.json", rep);
    return pass;
}

bool stage_solve(StageContext& ctx) {
    Json rep = report_envelope("solve", ctx.cfg.model.family, ctx.cfg.seed);
    SolveOptions opts;
    opts.tol = ctx.cfg.tol;
    Patch patch;
    patch.N = ctx.cfg.solver_N;
    const BoundaryData g = default_data();

    std::pair<GridFunction, SolveReport> solved =
        ctx.model.variational
            ? minimize(ctx.model.F, g, patch, opts)
            : solve_equation(ctx.model.A, g, patch, opts, nullptr);
    const GridFunction& u = solved.first;
    rep["data"]["solve"] = to_json(solved.second);

    const auto& cert = ctx.certificate();
    const auto quasi =
        quasiminimizer_constant(cert.phi(), u, 64, ctx.cfg.seed);
    rep["data"]["quasiminimizer_Q"] = quasi.Q;

    // oscillation probe needs a resolvable decade of radii (rho >= 4h)
    std::vector<std::vector<double>> osc;
    if (0.45 / (4.0 * u.h) >= 10.0) {
        const auto radii = lin_grid(4.5 * u.h, 0.45, 8);
        const auto holder = holder_exponent(u, {0.5, 0.5}, radii);
        rep["data"]["holder"] = to_json(holder);
        for (const auto& [rho, o] : holder.table) osc.push_back({rho, o});
    } else {
        rep["data"]["holder"] = {{"skipped", "grid too coarse for a "
                                             "decade of resolvable radii"}};
    }
    write_csv(ctx.out / "oscillation.csv", {"rho", "osc"}, osc);

    std::vector<std::vector<double>> sol;
    for (int i = 0; i <= u.N; ++i)
        for (int j = 0; j <= u.N; ++j) {
            const Point p = u.node(i, j);
            sol.push_back({p.x, p.y, u.at(i, j)});
        }
    write_csv(ctx.out / "solution.csv", {"x", "y", "u"}, sol);

    const GradientField du = discrete_gradient(u);
    std::vector<std::vector<double>> grad;
    for (int i = 0; i < u.N; ++i)
        for (int j = 0; j < u.N; ++j) {
            const Point p = du.cell_center(i, j);
            grad.push_back({p.x, p.y, du.at(i, j)[0], du.at(i, j)[1]});
        }
    write_csv(ctx.out / "gradient.csv", {"cell-x", "cell-y", "du1", "du2"},
              grad);

    const bool pass = solved.second.residual < opts.tol_res;
    rep["pass"] = pass;
    emit(ctx, "solve.json", rep);
    return pass;
}

bool stage_comparison(StageContext& ctx) {
    Json rep = report_envelope("comparison", ctx.cfg.model.family,
                               ctx.cfg.seed);
    const auto& cert = ctx.certificate();
    const Modulus omega = ctx.fitted_modulus();
    Json records = Json::array();
    std::vector<std::vector<double>> rows;
    bool pass = true;
    for (double r : ctx.cfg.ball_radii) {
        ComparisonConfig cc;
        cc.x0 = ctx.cfg.x0;
        cc.r = r;
        cc.N = ctx.cfg.solver_N;
        cc.solve.tol = ctx.cfg.tol;
        cc.functional = ctx.cfg.functional && ctx.model.variational;
        cc.seed = ctx.cfg.seed;
        const auto rec = comparison_experiment(ctx.model, cert, omega, cc);
        records.push_back(to_json(rec));
        rows.push_back({rec.r, rec.l1_gap, rec.predicted_rhs});
        pass = pass && std::isfinite(rec.l1_gap);
    }
    rep["data"]["records"] = records;
    rep["pass"] = pass;
    write_csv(ctx.out / "comparison.csv", {"r", "l1_gap", "predicted_rhs"},
              rows);
    emit(ctx, "comparison.json", rep);
    return pass;
}

}  // namespace

int run_pipeline(const ExperimentConfig& cfg) {
    if (cfg.threads > 0) par::set_threads(cfg.threads);
    StageContext ctx;
    ctx.cfg = cfg;
    ctx.out = cfg.out_dir;
    std::filesystem::create_directories(ctx.out);
    ctx.model = build_model(cfg.model);

    bool ok = true;
    const std::string& p = cfg.pipeline;
    try {
        if (p == "conditions") ok = stage_conditions(ctx);
        else if (p == "certificate") ok = stage_certificate(ctx);
        else if (p == "approx_verify") ok = stage_approx(ctx);
        else if (p == "solve") ok = stage_solve(ctx);
        else if (p == "comparison") ok = stage_comparison(ctx);
        else {  // full
            ok = stage_certificate(ctx);
            ok = stage_conditions(ctx) && ok;
            ok = stage_approx(ctx) && ok;
            ok = stage_solve(ctx) && ok;
            ok = stage_comparison(ctx) && ok;
        }
    } catch (const std::exception& e) {
        Json rep = report_envelope("error", cfg.model.family, cfg.seed);
        rep["data"]["what"] = e.what();
        rep["data"]["pipeline"] = p;
        write_json(ctx.out / "error.json", rep);
        return 3;
    }
    return ok ? 0 : 3;
}

std::string registry_listing() {
    std::ostringstream os;
    for (const auto& f : model_registry())
        os << f.name << "  [" << f.parameters << "]  " << f.description
           << "\n";
    return os.str();
}

}  // namespace qig
