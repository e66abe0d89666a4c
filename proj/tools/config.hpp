#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "igpk/systems.hpp"
#include "igpk/train.hpp"

namespace igpk::cli {

/// Dataset generation protocol: initial-condition bounds, horizon, split and
/// the observation noise applied to the training split.
struct ProtocolConfig {
    std::vector<std::pair<double, double>> bounds;
    int n_T = 0;
    int N = 0;
    double dt = 0.0;  // ignored by discrete-time systems
    int train_count = 0;
    int test_count = 0;
    NoiseSpec noise;
};

struct ModelConfig {
    std::string type = "igpk";  // igpk | poly_edmd | rbf_edmd
    IgpkConfig igpk;
    int poly_degree = 4;
    int rbf_centers = 20;
};

struct ExperimentConfig {
    std::string system = "scalar_map";  // scalar_map | predator_prey
    ProtocolConfig protocol;
    ModelConfig model;
    std::uint64_t seed = 0;
    std::filesystem::path out_dir = "out";
    std::filesystem::path data_dir;    // input for train/evaluate
    std::filesystem::path model_path;  // input for evaluate
};

int system_state_dim(const std::string& system);

/// Built-in protocol and model defaults per benchmark system.
ExperimentConfig default_config(const std::string& system);

ExperimentConfig load_config(const std::filesystem::path& path);

void validate(const ExperimentConfig& config);

}  // namespace igpk::cli
