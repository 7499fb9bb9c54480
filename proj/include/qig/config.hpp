#pragma once

#include <string>
#include <vector>

#include "qig/report.hpp"

namespace qig {

struct ValidationError : ParamError {
    using ParamError::ParamError;
};

struct ExperimentConfig {
    ModelSpec model;
    std::string pipeline = "full";  // conditions | certificate |
                                    // approx_verify | solve | comparison |
                                    // full
    std::uint64_t seed = 0;
    int threads = 0;  // 0 = library default
    std::string out_dir = "out";

    GrowthGrid grid;
    int solver_N = 64;
    double tol = 1e-8;
    std::vector<double> ball_radii{0.2, 0.1, 0.05};
    Point x0{0.5, 0.5};
    double epsilon = 0.25;  // wVA1 epsilon
    double K = 0.0;         // 0 = derive from the equivalence constants
    bool functional = false;
};

// Parses and validates; errors carry the JSON field path.
ExperimentConfig parse_config(const Json& j);
Json to_json(const ExperimentConfig& c);

ModelSpec parse_model_spec(const Json& j, const std::string& path);
Json to_json(const ModelSpec& spec);

Json to_json(const ScalarField& f);
ScalarField parse_scalar_field(const Json& j, const std::string& path);

}  // namespace qig
