#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "config.hpp"

namespace igpk::cli {

struct CliOptions {
    std::optional<std::filesystem::path> config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> out;
    int jobs = 0;  // 0 = hardware concurrency
};

/// Loads the config (or system defaults), then applies --seed, --out and the
/// IGPK_OUT_DIR environment override in increasing precedence for the output
/// directory.
ExperimentConfig resolve_config(const CliOptions& opts,
                                const std::string& default_system = "scalar_map");

void cmd_generate(const ExperimentConfig& config);
void cmd_train(const ExperimentConfig& config);
void cmd_evaluate(const ExperimentConfig& config);
void cmd_reproduce(const std::string& target, const ExperimentConfig& config,
                   int jobs);

/// Full argument parsing + dispatch; maps errors to exit codes
/// (0 ok, 2 config/validation, 3 training divergence, 4 I/O).
int run_cli(int argc, char** argv);

}  // namespace igpk::cli
