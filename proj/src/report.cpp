#include "qig/report.hpp"

#include <charconv>
#include <fstream>

namespace qig {

std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw EvalError("write_csv: cannot open " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i)
        os << (i ? "," : "") << header[i];
    os << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            os << (i ? "," : "") << format_double(row[i]);
        os << "\n";
    }
}

void write_json(const std::filesystem::path& path, const Json& j) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw EvalError("write_json: cannot open " + path.string());
    os << j.dump(2) << "\n";
}

Json report_envelope(const std::string& stage, const std::string& model,
                     std::uint64_t seed) {
    Json j;
    j["stage"] = stage;
    j["model"] = model;
    j["seed"] = seed;
    j["pass"] = false;
    j["data"] = Json::object();
    return j;
}

bool validate_report(const Json& j, std::string* why) {
    auto fail = [&](const std::string& m) {
        if (why) *why = m;
        return false;
    };
    if (!j.is_object()) return fail("report must be an object");
    if (!j.contains("stage") || !j["stage"].is_string())
        return fail("missing string field 'stage'");
    if (!j.contains("model") || !j["model"].is_string())
        return fail("missing string field 'model'");
    if (!j.contains("seed") || !j["seed"].is_number_unsigned())
        return fail("missing unsigned field 'seed'");
    if (!j.contains("pass") || !j["pass"].is_boolean())
        return fail("missing boolean field 'pass'");
    if (!j.contains("data") || !j["data"].is_object())
        return fail("missing object field 'data'");
    return true;
}

Json to_json(const GrowthCertificate& cert) {
    Json j;
    j["p1"] = cert.p1;
    j["q1"] = cert.q1;
    j["nu"] = cert.nu;
    j["Lambda"] = cert.Lambda;
    j["growth_constant"] = cert.residuals.growth_constant;
    j["c1"] = cert.c1;
    j["c2"] = cert.c2;
    j["autonomous"] = cert.autonomous;
    j["grid"] = {{"t_lo", cert.grid.t_lo},
                 {"t_hi", cert.grid.t_hi},
                 {"t_count", cert.grid.t_count},
                 {"x_per_side", cert.grid.x_per_side},
                 {"directions", cert.grid.directions},
                 {"seed", cert.grid.seed}};
    return j;
}

Json to_json(const ContinuityReport& rep) {
    Json j;
    j["condition"] = to_string(rep.condition);
    j["K"] = rep.K;
    j["epsilon"] = rep.epsilon;
    j["Lbar"] = rep.Lbar;
    j["beta_fit"] = rep.beta_fit;
    j["C_fit"] = rep.C_fit;
    j["fit_residual"] = rep.fit_residual;
    j["all_zero"] = rep.all_zero;
    j["coverage_warning"] = rep.coverage_warning;
    j["pass"] = rep.pass;
    Json table = Json::array();
    for (const auto& row : rep.table)
        table.push_back({{"r", row.r}, {"omega_tight", row.omega_tight}});
    j["table"] = table;
    Json viols = Json::array();
    for (const auto& v : rep.violations) {
        Json w;
        w["r"] = v.r;
        w["x"] = {v.x.x, v.x.y};
        w["y"] = {v.y.x, v.y.y};
        std::vector<double> xi(v.xi.data(), v.xi.data() + v.xi.size());
        w["xi"] = xi;
        w["lhs"] = v.lhs;
        w["rhs"] = v.rhs;
        viols.push_back(std::move(w));
    }
    j["violations"] = viols;
    return j;
}

Json to_json(const EquivalenceReport& rep) {
    return {{"c_lower", rep.c_lower},
            {"c_upper", rep.c_upper},
            {"c", rep.c}};
}

Json to_json(const MonotonicityReport& rep) {
    return {{"constant", rep.constant},
            {"pass", rep.pass},
            {"worst_x", {rep.worst_x.x, rep.worst_x.y}}};
}

Json to_json(const ApproxGrowthReport& rep) {
    Json j;
    j["nu"] = rep.nu;
    j["Lambda"] = rep.Lambda;
    j["growth_constant"] = rep.growth_constant;
    j["pass"] = rep.pass;
    j["failed_interval"] = rep.failed_interval;
    Json iv = Json::array();
    for (const auto& c : rep.intervals)
        iv.push_back({{"name", c.name},
                      {"nu", c.nu},
                      {"Lambda", c.Lambda},
                      {"growth_constant", c.growth_constant}});
    j["intervals"] = iv;
    return j;
}

Json to_json(const PhibarChecks& rep) {
    Json j;
    j["hypothesis_ok"] = rep.hypothesis_ok;
    j["hypothesis_worst"] = rep.hypothesis_worst;
    j["prime"] = {{"inc", rep.prime_inc_constant},
                  {"dec", rep.prime_dec_constant},
                  {"pass", rep.prime_pass}};
    j["mid"] = {{"upper", rep.mid_upper},
                  {"lower", rep.ball_lower},
                  {"pass", rep.mid_pass}};
    j["envelope"] = {{"factor", rep.envelope_factor},
                  {"bound", rep.envelope_bound},
                  {"pass", rep.envelope_pass}};
    j["compose"] = {{"a0", rep.compose_a0},
                  {"ainc", rep.compose_ainc},
                  {"adec", rep.compose_adec},
                  {"pass", rep.compose_pass}};
    j["pass"] = rep.pass;
    return j;
}

Json to_json(const SolveReport& rep) {
    Json j;
    j["problem"] = rep.problem;
    j["final_energy"] = rep.final_energy;
    j["residual"] = rep.residual;
    j["iterations"] = rep.iterations;
    j["energy_trajectory"] = rep.energy_trajectory;
    return j;
}

Json to_json(const HolderFit& fit) {
    Json j;
    j["alpha"] = fit.alpha;
    j["residual"] = fit.residual;
    j["zero_oscillation"] = fit.zero_oscillation;
    j["clamped"] = fit.clamped;
    j["dropped_largest"] = fit.dropped_largest;
    Json t = Json::array();
    for (const auto& [rho, osc] : fit.table) t.push_back({rho, osc});
    j["table"] = t;
    return j;
}

Json to_json(const HigherIntegrabilityReport& rep) {
    Json j;
    j["sigma"] = rep.sigma;
    j["ratio"] = rep.ratio;
    j["rhs"] = rep.rhs;
    j["sigma_grid"] = rep.sigma_grid;
    j["lhs"] = rep.lhs;
    j["monotone"] = rep.monotone;
    return j;
}

Json to_json(const EnergyComparisonReport& rep) {
    Json j;
    j["u_jensen"] = rep.u_jensen;
    j["u_c"] = rep.u_c;
    j["u_cbar"] = rep.u_cbar;
    j["ubar_jensen"] = rep.ubar_jensen;
    j["ubar_c"] = rep.ubar_c;
    j["gradient_c"] = rep.gradient_c;
    j["pass"] = rep.pass;
    return j;
}

Json to_json(const ComparisonRecord& rec) {
    Json j;
    j["r"] = rec.r;
    j["sigma"] = rec.sigma;
    j["epsilon"] = rec.epsilon;
    j["t1"] = rec.t1;
    j["t2"] = rec.t2;
    j["t1_raw"] = rec.t1_raw;
    j["t2_raw"] = rec.t2_raw;
    j["l1_gap"] = rec.l1_gap;
    j["mean_du_outer"] = rec.mean_du_outer;
    j["normalized_gap"] = rec.normalized_gap;
    j["predicted_rhs"] = rec.predicted_rhs;
    j["nuBar"] = rec.nuBar;
    j["LambdaBar"] = rec.LambdaBar;
    j["strict_caps_ok"] = rec.strict_caps_ok;
    j["energies"] = to_json(rec.energies);
    return j;
}

}  // namespace qig
