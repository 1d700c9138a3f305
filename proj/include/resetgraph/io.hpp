#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "resetgraph/cert.hpp"
#include "resetgraph/design.hpp"
#include "resetgraph/linsys.hpp"
#include "resetgraph/resetsim.hpp"
#include "resetgraph/sgregions.hpp"

namespace resetgraph::io {

using nlohmann::json;

/// Throws ConfigError when obj holds a key outside `allowed`.
void require_keys(const json& obj, const std::vector<std::string>& allowed,
                  const std::string& context);

Eigen::MatrixXd parse_matrix(const json& rows, const std::string& context);
json matrix_to_json(const Eigen::MatrixXd& M);

/// {"ss": {"A": ..., "B": ..., "C": ..., "D": ...}} or {"tf": {"num": ..., "den": ...}}.
StateSpace parse_system(const json& spec, const std::string& context);

/// {"type": "zero"|"step"|"sine"|"decaying_sum", parameters..., "seed": int}.
InputFn parse_input(const json& spec, int n, const std::string& context);

/// Reset system: {"base": <system>, "R": [[...]], "M": [[...]] or
/// {"k1": ..., "k2": ...}, "delta": ...}.
ResetSystem parse_reset_system(const json& spec, const std::string& context);

std::vector<double> parse_grid(const json& spec, const std::string& context);

json region_to_json(const RegionApprox& rg);
std::string boundary_csv(const RegionApprox& rg, int per_constraint);

json certificate_to_json(const StabilityCertificate& cert);
json admissibility_to_json(const AdmissibilityReport& rep);

std::string trace_csv(const SimTrace& tr);
std::string trace_csv(const ClosedLoopTrace& tr);
json metrics_to_json(const StepMetrics& sm);

json cloud_to_json(const std::vector<GainPhasePoint>& cloud);
std::string cloud_csv(const std::vector<GainPhasePoint>& cloud);

json design_result_to_json(const DesignResult& dr);
std::string score_table_csv(const DesignResult& dr);

/// Canonical serialization used for config hashes (sorted keys, no spaces).
std::string canonical(const json& j);

/// Adds "config_hash" and "tool_version" stamps to an output document.
void stamp(json& out, const json& config);

void write_file(const std::string& path, const std::string& content);
json read_json_file(const std::string& path);

}  // namespace resetgraph::io
