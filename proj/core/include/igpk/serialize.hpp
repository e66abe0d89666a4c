#pragma once

#include <filesystem>
#include <string>

#include "igpk/koopman.hpp"
#include "igpk/systems.hpp"

namespace igpk {

/// Self-describing JSON container: K, C, observables (dictionary spec or GPO
/// bank with shared training inputs), format-version field. All reals
/// round-trip bit-exactly.
void save_model(const KoopmanModel& model, const std::filesystem::path& path);
KoopmanModel load_model(const std::filesystem::path& path);

/// Dataset-side metadata carried next to the snapshot CSVs.
struct DatasetMeta {
    std::string system;
    int n_x = 0;
    int n_T = 0;
    int N = 0;
    double dt = 0.0;
    NoiseSpec noise;
    std::uint64_t seed = 0;
};

/// Writes X0.csv, X.csv, XPlus.csv and meta.json into `dir`.
void save_dataset(const TrajectoryDataset& data, const DatasetMeta& meta,
                  const std::filesystem::path& dir);

std::pair<TrajectoryDataset, DatasetMeta> load_dataset(
    const std::filesystem::path& dir);

}  // namespace igpk
