#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "qig/continuity.hpp"
#include "qig/growth.hpp"
#include "qig/probes.hpp"
#include "qig/solver.hpp"

namespace qig {

using Json = nlohmann::json;

// Shortest round-trip decimal form; identical bytes across runs.
std::string format_double(double v);

void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

void write_json(const std::filesystem::path& path, const Json& j);

// Every stage report carries the same envelope; see
// docs/report_schema.json.
Json report_envelope(const std::string& stage, const std::string& model,
                     std::uint64_t seed);
bool validate_report(const Json& j, std::string* why = nullptr);

Json to_json(const GrowthCertificate& cert);
Json to_json(const ContinuityReport& rep);
Json to_json(const EquivalenceReport& rep);
Json to_json(const MonotonicityReport& rep);
Json to_json(const ApproxGrowthReport& rep);
Json to_json(const PhibarChecks& rep);
Json to_json(const SolveReport& rep);
Json to_json(const HolderFit& fit);
Json to_json(const HigherIntegrabilityReport& rep);
Json to_json(const EnergyComparisonReport& rep);
Json to_json(const ComparisonRecord& rec);

}  // namespace qig
