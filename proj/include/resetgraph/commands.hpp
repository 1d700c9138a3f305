#pragma once

#include <cstdint>
#include <string>

#include "resetgraph/io.hpp"

namespace resetgraph::commands {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitNotCertified = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;

int cmd_sg(const io::json& config, const std::string& out_dir, bool patch_mode);
int cmd_admissible(const io::json& config, const std::string& out_dir);
int cmd_stability(const io::json& config, const std::string& out_dir);
int cmd_design(const io::json& config, const std::string& out_dir);
int cmd_simulate(const io::json& config, const std::string& out_dir);
int cmd_sgcloud(const io::json& config, const std::string& out_dir);

/// Full pinned pipeline for the worked example: moving-mass plant
/// 1/(s(s+0.2)), base controller 0.055/(s^2+s+1) + 0.1, step-0.01 center grid
/// on [-1, 1]. Writes a pass/fail report plus all intermediate artifacts.
/// The seed only affects the validation SG cloud, never the certificates.
int cmd_reproduce_example(const std::string& out_dir, std::uint64_t seed = 0);

/// Maps exceptions from a command body to the exit-code contract.
int run_guarded(const std::function<int()>& body);

}  // namespace resetgraph::commands
