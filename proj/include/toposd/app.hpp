#pragma once

#include "toposd/config.hpp"

#include <optional>
#include <string>
#include <vector>

namespace toposd {

enum class Command { solve, state_derivative, rate_study, topo_derivative, mesh_info };

std::string to_string(Command c);
Command parse_command(const std::string &s);

struct RunFlags {
    std::string out_dir = "out";
    bool deterministic = false;
    std::optional<int> threads;
    bool smoke = false;
};

struct RunResult {
    std::string config_hash;
    /// Produced files relative to the output directory, manifest last.
    std::vector<std::string> files;
};

/// Runs one command, writes its files and the manifest into flags.out_dir.
/// Module errors propagate as toposd::Error after any partial output is written.
RunResult run_command(Command cmd, const RunConfig &config, const RunFlags &flags);

/// Decimal text with 17 significant digits.
std::string csv_number(double x);

inline constexpr const char *artifact_version = "0.1.0";

} // namespace toposd
