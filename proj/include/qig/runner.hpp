#pragma once

#include <string>

#include "qig/config.hpp"

namespace qig {

// Executes the configured pipeline, writing one JSON report per stage
// plus the fixed-format CSV tables into out_dir. Returns 0 on success,
// 3 when a stage reports failure.
int run_pipeline(const ExperimentConfig& cfg);

// Model families with their parameter schemas, one per line.
std::string registry_listing();

}  // namespace qig
