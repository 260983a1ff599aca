#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qgnls/bifurcation.hpp"
#include "qgnls/cones.hpp"
#include "qgnls/flow.hpp"
#include "qgnls/functional.hpp"
#include "qgnls/invariance_lab.hpp"
#include "qgnls/minmax.hpp"
#include "qgnls/spectrum.hpp"

namespace qgnls {

/// Version string of the results schema written by the CLI.
inline constexpr std::string_view kSchemaVersion = "qgnls.results/1";

std::string library_version();

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

/// 16 lowercase hex digits.
std::string hex64(std::uint64_t h);

/// Hash of the canonical (sorted-key, compact) dump of a configuration.
std::string config_hash(const nlohmann::json& config);

/// Shortest round-trip decimal representation; "nan", "inf", "-inf" otherwise.
std::string format_double(double x);

/// Finite doubles as numbers, non-finite as the strings "inf", "-inf", "nan".
nlohmann::json number(double x);

nlohmann::json vec_to_json(const Vec& v);
Vec vec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SpectralData& s, bool with_functions = false);
nlohmann::json to_json(const KEstimate& k);
nlohmann::json to_json(const RootResult& r);
nlohmann::json to_json(const IndexThresholds& t);
nlohmann::json to_json(const ThresholdReport& r);
nlohmann::json to_json(const ConeReport& c);
nlohmann::json to_json(const SeparationEstimate& s);
nlohmann::json to_json(const TrajectoryState& s);
nlohmann::json to_json(const Trajectory& t);
nlohmann::json to_json(const AuditReport& a);
nlohmann::json to_json(const LevelReport& l, bool with_energies = false);
nlohmann::json to_json(const SolutionRecord& s, bool with_field = true);
nlohmann::json to_json(const Ladder& l, bool with_fields = true);
nlohmann::json to_json(const BranchPoint& b, bool with_field = false);
nlohmann::json to_json(const BifurcationVerdict& v);
nlohmann::json to_json(const LimitCheckReport& r);
nlohmann::json to_json(const FlowInvarianceReport& r);
nlohmann::json to_json(const OracleReport& r);
nlohmann::json to_json(const GConeReport& r);
nlohmann::json scenario_spec(const LabScenario& sc);

/// Wraps a payload with schema, library version, config and its hash.
nlohmann::json artifact(std::string_view kind, const nlohmann::json& config, nlohmann::json payload);

/// Deterministic pretty dump terminated by a newline.
std::string dump(const nlohmann::json& j);

/// RFC 4180 CSV with LF line endings: mu, pde_lambda, energy_ratio,
/// kinetic_ratio, p_norm_ratio, h1_norm.
void write_branch_csv(std::ostream& os, const std::vector<BranchPoint>& branch);
/// Columns t,E,mass_err,grad_norm,lambda_u,kinetic,cone_class; mass_err is mass - mu.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, double mu);

}  // namespace qgnls
