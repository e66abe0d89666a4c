#include "igpk/serialize.hpp"

#include <fstream>

#include <json.hpp>

#include "igpk/csv.hpp"

namespace igpk {

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& A) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < A.cols(); ++j) row.push_back(A(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) return Matrix(0, 0);
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Matrix A(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = j[static_cast<std::size_t>(i)];
        if (static_cast<Eigen::Index>(row.size()) != cols) {
            throw IoError("ragged matrix in model file");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            A(i, c) = row[static_cast<std::size_t>(c)].get<double>();
        }
    }
    return A;
}

json vector_to_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Vector vector_from_json(const json& j) {
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v(i) = j[static_cast<std::size_t>(i)].get<double>();
    }
    return v;
}

json write_json_file(const json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
    return j;
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError("bad JSON in " + path.string() + ": " + e.what());
    }
    return j;
}

}  // namespace

void save_model(const KoopmanModel& model, const std::filesystem::path& path) {
    json j;
    j["format_version"] = 1;
    j["n_z"] = model.lifted_dim();
    j["n_x"] = model.state_dim();
    j["K"] = matrix_to_json(model.K);
    j["C"] = matrix_to_json(model.C);

    json obs;
    if (const auto* bank = std::get_if<GpoBank>(&model.observables)) {
        obs["type"] = "gpo_bank";
        obs["train_inputs"] = matrix_to_json(bank->front().train_inputs());
        json gpos = json::array();
        for (const auto& gpo : *bank) {
            json g;
            g["targets"] = vector_to_json(gpo.virtual_targets());
            g["log_lengthscales"] = vector_to_json(gpo.theta().log_lengthscales);
            g["log_signal_var"] = gpo.theta().log_signal_var;
            g["log_noise_var"] = gpo.theta().log_noise_var;
            gpos.push_back(std::move(g));
        }
        obs["gpos"] = std::move(gpos);
    } else {
        const auto& dict = std::get<DictionarySpec>(model.observables);
        if (const auto* poly = std::get_if<PolyDictionary>(&dict)) {
            obs["type"] = "poly";
            obs["degree"] = poly->degree;
            obs["n_x"] = poly->n_x;
        } else {
            const auto& rbf = std::get<RbfDictionary>(dict);
            obs["type"] = "rbf";
            obs["centers"] = matrix_to_json(rbf.centers);
            obs["include_state"] = rbf.include_state;
            obs["include_constant"] = rbf.include_constant;
        }
    }
    j["observables"] = std::move(obs);
    write_json_file(j, path);
}

KoopmanModel load_model(const std::filesystem::path& path) {
    const json j = read_json_file(path);
    if (!j.contains("format_version") || j["format_version"].get<int>() != 1) {
        throw IoError("unsupported model format version in " + path.string());
    }
    KoopmanModel model;
    model.K = matrix_from_json(j.at("K"));
    model.C = matrix_from_json(j.at("C"));

    const auto& obs = j.at("observables");
    const std::string type = obs.at("type").get<std::string>();
    if (type == "gpo_bank") {
        const Matrix X0 = matrix_from_json(obs.at("train_inputs"));
        GpoBank bank;
        for (const auto& g : obs.at("gpos")) {
            KernelHyperparams theta;
            theta.log_lengthscales = vector_from_json(g.at("log_lengthscales"));
            theta.log_signal_var = g.at("log_signal_var").get<double>();
            theta.log_noise_var = g.at("log_noise_var").get<double>();
            bank.emplace_back(X0, vector_from_json(g.at("targets")), theta);
        }
        model.observables = std::move(bank);
    } else if (type == "poly") {
        model.observables = DictionarySpec{
            PolyDictionary{obs.at("degree").get<int>(), obs.at("n_x").get<int>()}};
    } else if (type == "rbf") {
        RbfDictionary rbf;
        rbf.centers = matrix_from_json(obs.at("centers"));
        rbf.include_state = obs.at("include_state").get<bool>();
        rbf.include_constant = obs.at("include_constant").get<bool>();
        model.observables = DictionarySpec{std::move(rbf)};
    } else {
        throw IoError("unknown observable type '" + type + "' in " + path.string());
    }
    return model;
}

void save_dataset(const TrajectoryDataset& data, const DatasetMeta& meta,
                  const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_matrix_csv(dir / "X0.csv", data.X0);
    write_matrix_csv(dir / "X.csv", data.X);
    write_matrix_csv(dir / "XPlus.csv", data.XPlus);

    json j;
    j["system"] = meta.system;
    j["n_x"] = meta.n_x;
    j["n_T"] = meta.n_T;
    j["N"] = meta.N;
    j["dt"] = meta.dt;
    j["noise_kind"] = noise_kind_name(meta.noise.kind);
    j["noise_intensity_pct"] = meta.noise.intensity_pct;
    j["noise_seed"] = meta.noise.seed;
    j["seed"] = meta.seed;
    write_json_file(j, dir / "meta.json");
}

std::pair<TrajectoryDataset, DatasetMeta> load_dataset(
    const std::filesystem::path& dir) {
    const json j = read_json_file(dir / "meta.json");
    DatasetMeta meta;
    meta.system = j.at("system").get<std::string>();
    meta.n_x = j.at("n_x").get<int>();
    meta.n_T = j.at("n_T").get<int>();
    meta.N = j.at("N").get<int>();
    meta.dt = j.at("dt").get<double>();
    meta.noise.kind = noise_kind_from_name(j.at("noise_kind").get<std::string>());
    meta.noise.intensity_pct = j.at("noise_intensity_pct").get<double>();
    meta.noise.seed = j.at("noise_seed").get<std::uint64_t>();
    meta.seed = j.at("seed").get<std::uint64_t>();

    TrajectoryDataset data;
    data.X0 = read_matrix_csv(dir / "X0.csv");
    data.X = read_matrix_csv(dir / "X.csv");
    data.XPlus = read_matrix_csv(dir / "XPlus.csv");
    data.n_x = meta.n_x;
    data.n_T = meta.n_T;
    data.N = meta.N;

    if (data.X0.rows() != meta.n_x || data.X0.cols() != meta.n_T ||
        data.X.cols() != static_cast<Eigen::Index>(meta.N) * meta.n_T ||
        data.X.rows() != meta.n_x || data.XPlus.rows() != meta.n_x ||
        data.XPlus.cols() != data.X.cols()) {
        throw IoError("dataset dimensions inconsistent with meta.json in " +
                      dir.string());
    }
    return {data, meta};
}

}  // namespace igpk
