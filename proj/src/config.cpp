#include "qig/config.hpp"

namespace qig {

namespace {

double get_num(const Json& j, const std::string& key, const std::string& path,
               double fallback, bool required = false) {
    if (!j.contains(key)) {
        if (required)
            throw ValidationError(path + "." + key + ": missing");
        return fallback;
    }
    if (!j[key].is_number())
        throw ValidationError(path + "." + key + ": expected number");
    return j[key].get<double>();
}

std::string get_str(const Json& j, const std::string& key,
                    const std::string& path, const std::string& fallback,
                    bool required = false) {
    if (!j.contains(key)) {
        if (required)
            throw ValidationError(path + "." + key + ": missing");
        return fallback;
    }
    if (!j[key].is_string())
        throw ValidationError(path + "." + key + ": expected string");
    return j[key].get<std::string>();
}

}  // namespace

Json to_json(const ScalarField& f) {
    Json j;
    switch (f.kind) {
        case ScalarField::Kind::Constant:
            j["profile"] = "constant";
            j["value"] = f.base;
            return j;
        case ScalarField::Kind::Linear:
            j["profile"] = "linear";
            j["base"] = f.base;
            j["slope"] = f.scale;
            return j;
        case ScalarField::Kind::HolderBump:
            j["profile"] = "holder_bump";
            j["base"] = f.base;
            j["seminorm"] = f.scale;
            j["beta"] = f.beta;
            j["center"] = {f.center.x, f.center.y};
            return j;
        case ScalarField::Kind::Smoothstep:
            j["profile"] = "smoothstep";
            j["base"] = f.base;
            j["scale"] = f.scale;
            j["edge0"] = f.edge0;
            j["edge1"] = f.edge1;
            return j;
        case ScalarField::Kind::Custom:
            // in-process only; records the declared Holder data
            j["profile"] = "custom";
            j["seminorm"] = f.scale;
            j["beta"] = f.beta;
            return j;
    }
    return j;
}

ScalarField parse_scalar_field(const Json& j, const std::string& path) {
    if (j.is_number()) return ScalarField::constant(j.get<double>());
    if (!j.is_object())
        throw ValidationError(path + ": expected number or object");
    const std::string profile = get_str(j, "profile", path, "", true);
    if (profile == "constant")
        return ScalarField::constant(get_num(j, "value", path, 0.0, true));
    if (profile == "linear")
        return ScalarField::linear(get_num(j, "base", path, 0.0),
                                   get_num(j, "slope", path, 0.0, true));
    if (profile == "holder_bump") {
        Point c{0.5, 0.5};
        if (j.contains("center")) {
            if (!j["center"].is_array() || j["center"].size() != 2)
                throw ValidationError(path + ".center: expected [x, y]");
            c = {j["center"][0].get<double>(), j["center"][1].get<double>()};
        }
        return ScalarField::holder_bump(get_num(j, "base", path, 0.0),
                                        get_num(j, "seminorm", path, 0.0, true),
                                        get_num(j, "beta", path, 1.0), c);
    }
    if (profile == "smoothstep")
        return ScalarField::smoothstep(get_num(j, "base", path, 0.0),
                                       get_num(j, "scale", path, 0.0, true),
                                       get_num(j, "edge0", path, 0.0),
                                       get_num(j, "edge1", path, 1.0));
    throw ValidationError(path + ".profile: unknown profile '" + profile +
                          "'");
}

Json to_json(const ModelSpec& spec) {
    Json j;
    j["family"] = spec.family;
    j["dim"] = spec.dim;
    j["p"] = spec.p;
    if (spec.q > 0.0) j["q"] = spec.q;
    j["exponent"] = to_json(spec.exponent);
    j["coefficient"] = to_json(spec.coefficient);
    j["weight"] = to_json(spec.weight);
    if (spec.literal_quartic) j["literal_quartic"] = true;
    return j;
}

ModelSpec parse_model_spec(const Json& j, const std::string& path) {
    if (!j.is_object()) throw ValidationError(path + ": expected object");
    ModelSpec spec;
    spec.family = get_str(j, "family", path, "", true);
    spec.dim = static_cast<int>(get_num(j, "dim", path, 2));
    spec.p = get_num(j, "p", path, 2.0);
    spec.q = get_num(j, "q", path, 0.0);
    if (j.contains("exponent"))
        spec.exponent = parse_scalar_field(j["exponent"], path + ".exponent");
    if (j.contains("coefficient"))
        spec.coefficient =
            parse_scalar_field(j["coefficient"], path + ".coefficient");
    if (j.contains("weight"))
        spec.weight = parse_scalar_field(j["weight"], path + ".weight");
    if (j.contains("literal_quartic"))
        spec.literal_quartic = j["literal_quartic"].get<bool>();
    bool known = false;
    for (const auto& f : model_registry())
        if (f.name == spec.family) known = true;
    if (!known) {
        std::string families;
        for (const auto& f : model_registry()) families += " " + f.name;
        throw ValidationError(path + ".family: unknown family '" +
                              spec.family + "'; known:" + families);
    }
    return spec;
}

Json to_json(const ExperimentConfig& c) {
    Json j;
    j["model"] = to_json(c.model);
    j["pipeline"] = c.pipeline;
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    j["out_dir"] = c.out_dir;
    j["grid"] = {{"t_lo", c.grid.t_lo},
                 {"t_hi", c.grid.t_hi},
                 {"t_count", c.grid.t_count},
                 {"x_per_side", c.grid.x_per_side},
                 {"directions", c.grid.directions}};
    j["solver_N"] = c.solver_N;
    j["tol"] = c.tol;
    j["ball_radii"] = c.ball_radii;
    j["x0"] = {c.x0.x, c.x0.y};
    j["epsilon"] = c.epsilon;
    j["K"] = c.K;
    j["functional"] = c.functional;
    return j;
}

ExperimentConfig parse_config(const Json& j) {
    if (!j.is_object()) throw ValidationError("config: expected object");
    ExperimentConfig c;
    if (!j.contains("model"))
        throw ValidationError("model: missing (required)");
    c.model = parse_model_spec(j["model"], "model");
    c.pipeline = get_str(j, "pipeline", "config", "full");
    const std::vector<std::string> pipes = {"conditions",    "certificate",
                                            "approx_verify", "solve",
                                            "comparison",    "full"};
    bool ok = false;
    for (const auto& p : pipes) ok |= (p == c.pipeline);
    if (!ok)
        throw ValidationError("pipeline: unknown pipeline '" + c.pipeline +
                              "'");
    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer() ||
            (j["seed"].is_number_integer() &&
             !j["seed"].is_number_unsigned() &&
             j["seed"].get<long long>() < 0))
            throw ValidationError("seed: expected nonnegative integer");
        c.seed = j["seed"].get<std::uint64_t>();
    }
    c.threads = static_cast<int>(get_num(j, "threads", "config", 0));
    c.out_dir = get_str(j, "out_dir", "config", "out");
    if (j.contains("grid")) {
        const Json& g = j["grid"];
        c.grid.t_lo = get_num(g, "t_lo", "grid", c.grid.t_lo);
        c.grid.t_hi = get_num(g, "t_hi", "grid", c.grid.t_hi);
        c.grid.t_count =
            static_cast<int>(get_num(g, "t_count", "grid", c.grid.t_count));
        c.grid.x_per_side = static_cast<int>(
            get_num(g, "x_per_side", "grid", c.grid.x_per_side));
        c.grid.directions = static_cast<int>(
            get_num(g, "directions", "grid", c.grid.directions));
    }
    c.grid.seed = c.seed;
    c.solver_N = static_cast<int>(get_num(j, "solver_N", "config", 64));
    if (c.solver_N < 4 || c.solver_N > 256)
        throw ValidationError("solver_N: must be in [4, 256]");
    c.tol = get_num(j, "tol", "config", 1e-8);
    if (j.contains("ball_radii")) {
        if (!j["ball_radii"].is_array())
            throw ValidationError("ball_radii: expected array");
        c.ball_radii.clear();
        for (const auto& r : j["ball_radii"])
            c.ball_radii.push_back(r.get<double>());
    }
    if (j.contains("x0")) {
        if (!j["x0"].is_array() || j["x0"].size() != 2)
            throw ValidationError("x0: expected [x, y]");
        c.x0 = {j["x0"][0].get<double>(), j["x0"][1].get<double>()};
    }
    c.epsilon = get_num(j, "epsilon", "config", 0.25);
    if (!(c.epsilon > 0.0 && c.epsilon <= 1.0))
        throw ValidationError("epsilon: must be in (0, 1]");
    c.K = get_num(j, "K", "config", 0.0);
    if (j.contains("functional")) c.functional = j["functional"].get<bool>();
    return c;
}

}  // namespace qig
