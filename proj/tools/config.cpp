#include "config.hpp"

#include <fstream>

#include <json.hpp>

#include "igpk/errors.hpp"

namespace igpk::cli {

using nlohmann::json;

int system_state_dim(const std::string& system) {
    if (system == "scalar_map") return 1;
    if (system == "predator_prey") return 2;
    throw InvalidConfig("unknown system: " + system);
}

ExperimentConfig default_config(const std::string& system) {
    ExperimentConfig config;
    config.system = system;
    if (system == "scalar_map") {
        config.protocol.bounds = {{-5.0, 5.0}};
        config.protocol.n_T = 50;
        config.protocol.N = 50;
        config.protocol.dt = 0.0;
        config.protocol.train_count = 30;
        config.protocol.test_count = 20;
        config.model.igpk.n_z = 22;
        config.model.igpk.adam_lr = 2e-3;
    } else if (system == "predator_prey") {
        config.protocol.bounds = {{0.1, 4.0}, {0.1, 3.0}};
        config.protocol.n_T = 200;
        config.protocol.N = 100;
        config.protocol.dt = 0.2;
        config.protocol.train_count = 80;
        config.protocol.test_count = 120;
        config.model.igpk.n_z = 24;
        config.model.igpk.stage1_iters = 2500;
        config.model.igpk.sgd_lr = 300.0;
        config.model.igpk.stage2_iters = 2000;
        config.model.igpk.adam_lr = 2e-3;
    } else {
        throw InvalidConfig("unknown system: " + system);
    }
    config.model.igpk.warm_start_identity = true;
    return config;
}

namespace {

template <typename T>
void read_into(const json& j, const char* key, T& out) {
    if (j.contains(key)) {
        try {
            out = j.at(key).get<T>();
        } catch (const json::exception& e) {
            throw InvalidConfig(std::string("config field '") + key +
                                "': " + e.what());
        }
    }
}

void parse_protocol(const json& j, ProtocolConfig& p) {
    if (j.contains("bounds")) {
        p.bounds.clear();
        for (const auto& pair : j.at("bounds")) {
            if (!pair.is_array() || pair.size() != 2) {
                throw InvalidConfig("protocol.bounds entries must be [lo, hi]");
            }
            p.bounds.emplace_back(pair[0].get<double>(), pair[1].get<double>());
        }
    }
    read_into(j, "n_T", p.n_T);
    read_into(j, "N", p.N);
    read_into(j, "dt", p.dt);
    read_into(j, "train_count", p.train_count);
    read_into(j, "test_count", p.test_count);
    if (j.contains("noise")) {
        const auto& n = j.at("noise");
        std::string kind = noise_kind_name(p.noise.kind);
        read_into(n, "kind", kind);
        p.noise.kind = noise_kind_from_name(kind);
        read_into(n, "intensity_pct", p.noise.intensity_pct);
    }
}

void parse_model(const json& j, ModelConfig& m) {
    read_into(j, "type", m.type);
    read_into(j, "n_z", m.igpk.n_z);
    read_into(j, "stage1_iters", m.igpk.stage1_iters);
    read_into(j, "stage2_iters", m.igpk.stage2_iters);
    read_into(j, "ridge_lambda", m.igpk.ridge_lambda);
    read_into(j, "batch_size", m.igpk.batch_size);
    read_into(j, "sgd_lr", m.igpk.sgd_lr);
    read_into(j, "sgd_momentum", m.igpk.sgd_momentum);
    read_into(j, "adam_lr", m.igpk.adam_lr);
    read_into(j, "adam_beta1", m.igpk.adam_beta1);
    read_into(j, "adam_beta2", m.igpk.adam_beta2);
    read_into(j, "adam_eps", m.igpk.adam_eps);
    read_into(j, "grad_clip", m.igpk.grad_clip);
    read_into(j, "warm_start_identity", m.igpk.warm_start_identity);
    read_into(j, "degree", m.poly_degree);
    read_into(j, "centers", m.rbf_centers);
}

}  // namespace

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InvalidConfig("config parse error in " + path.string() + ": " +
                            e.what());
    }

    std::string system = "scalar_map";
    read_into(j, "system", system);
    ExperimentConfig config = default_config(system);
    if (j.contains("protocol")) parse_protocol(j.at("protocol"), config.protocol);
    if (j.contains("model")) parse_model(j.at("model"), config.model);
    read_into(j, "seed", config.seed);
    std::string out_dir, data_dir, model_path;
    read_into(j, "out_dir", out_dir);
    read_into(j, "data_dir", data_dir);
    read_into(j, "model_path", model_path);
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (!data_dir.empty()) config.data_dir = data_dir;
    if (!model_path.empty()) config.model_path = model_path;
    validate(config);
    return config;
}

void validate(const ExperimentConfig& config) {
    const int n_x = system_state_dim(config.system);
    const auto& p = config.protocol;
    if (static_cast<int>(p.bounds.size()) != n_x) {
        throw InvalidConfig("protocol.bounds: expected " + std::to_string(n_x) +
                            " dimension pairs, got " +
                            std::to_string(p.bounds.size()));
    }
    for (const auto& [lo, hi] : p.bounds) {
        if (lo > hi) throw InvalidConfig("protocol.bounds: lo > hi");
    }
    if (p.n_T < 2) throw InvalidConfig("protocol.n_T must be >= 2");
    if (p.N < 1) throw InvalidConfig("protocol.N must be >= 1");
    if (p.train_count < 1 || p.test_count < 1) {
        throw InvalidConfig("protocol split counts must be >= 1");
    }
    if (p.train_count + p.test_count != p.n_T) {
        throw InvalidConfig("protocol: train_count + test_count must equal n_T");
    }
    if (config.system == "predator_prey" && p.dt <= 0.0) {
        throw InvalidConfig("protocol.dt must be > 0 for predator_prey");
    }
    if (p.noise.intensity_pct < 0.0) {
        throw InvalidConfig("protocol.noise.intensity_pct must be >= 0");
    }

    const auto& m = config.model;
    if (m.type != "igpk" && m.type != "poly_edmd" && m.type != "rbf_edmd") {
        throw InvalidConfig("unknown model type: " + m.type);
    }
    if (m.type == "igpk" && m.igpk.n_z < 1) {
        throw InvalidConfig("model.n_z must be >= 1");
    }
    if (m.type == "poly_edmd" && m.poly_degree < 1) {
        throw InvalidConfig("model.degree must be >= 1");
    }
    if (m.type == "rbf_edmd" && m.rbf_centers < 1) {
        throw InvalidConfig("model.centers must be >= 1");
    }
}

}  // namespace igpk::cli
