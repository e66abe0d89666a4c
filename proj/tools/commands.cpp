#include "commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <thread>

#include <CLI11.hpp>

#include "igpk/csv.hpp"
#include "igpk/metrics.hpp"
#include "igpk/serialize.hpp"

namespace igpk::cli {

namespace {

constexpr std::uint64_t kNoiseSeedSalt = 0x6a09e667f3bcc909ULL;

StepFn make_stepper(const ExperimentConfig& config) {
    if (config.system == "scalar_map") return make_scalar_map_stepper();
    if (config.system == "predator_prey") {
        return make_predator_prey_stepper(PredatorPreyParams{}, config.protocol.dt);
    }
    throw InvalidConfig("unknown system: " + config.system);
}

TrajectoryDataset subset(const TrajectoryDataset& data, int start, int count) {
    TrajectoryDataset out;
    out.n_x = data.n_x;
    out.n_T = count;
    out.N = data.N;
    out.X0 = data.X0.middleCols(start, count);
    out.X = data.X.middleCols(static_cast<Eigen::Index>(start) * data.N,
                              static_cast<Eigen::Index>(count) * data.N);
    out.XPlus = data.XPlus.middleCols(static_cast<Eigen::Index>(start) * data.N,
                                      static_cast<Eigen::Index>(count) * data.N);
    return out;
}

struct GeneratedSplits {
    TrajectoryDataset train;
    TrajectoryDataset test;
};

GeneratedSplits generate_splits(const ExperimentConfig& config) {
    const auto& p = config.protocol;
    const Matrix X0 = sample_initial_conditions(p.bounds, p.n_T, config.seed);
    const auto full = simulate(make_stepper(config), X0, p.N);
    GeneratedSplits splits;
    splits.train = subset(full, 0, p.train_count);
    splits.test = subset(full, p.train_count, p.test_count);
    if (p.noise.kind != NoiseKind::none && p.noise.intensity_pct > 0.0) {
        NoiseSpec spec = p.noise;
        spec.seed = config.seed ^ kNoiseSeedSalt;
        splits.train = add_noise(splits.train, spec);
    }
    return splits;
}

DatasetMeta make_meta(const ExperimentConfig& config, const TrajectoryDataset& data,
                      bool noisy) {
    DatasetMeta meta;
    meta.system = config.system;
    meta.n_x = data.n_x;
    meta.n_T = data.n_T;
    meta.N = data.N;
    meta.dt = config.protocol.dt;
    meta.noise = noisy ? config.protocol.noise : NoiseSpec{};
    meta.seed = config.seed;
    return meta;
}

struct TrainedModel {
    KoopmanModel model;
    std::vector<TraceRow> trace;
};

TrainedModel train_model(const ExperimentConfig& config,
                         const TrajectoryDataset& train) {
    TrainedModel out;
    const auto& m = config.model;
    if (m.type == "igpk") {
        IgpkConfig c = m.igpk;
        c.seed = config.seed;
        auto result = train_igpk(c, train);
        out.model = std::move(result.model);
        out.trace = std::move(result.stage1_trace);
    } else if (m.type == "poly_edmd") {
        const DictionarySpec dict = PolyDictionary{m.poly_degree, train.n_x};
        auto [K, C] = edmd_fit(dictionary_lift(dict, train.X),
                               dictionary_lift(dict, train.XPlus), train.X);
        out.model = {std::move(K), std::move(C), dict};
    } else if (m.type == "rbf_edmd") {
        const DictionarySpec dict =
            RbfDictionary{kmeans(train.X, m.rbf_centers, config.seed), true, true};
        auto [K, C] = edmd_fit(dictionary_lift(dict, train.X),
                               dictionary_lift(dict, train.XPlus), train.X);
        out.model = {std::move(K), std::move(C), dict};
    } else {
        throw InvalidConfig("unknown model type: " + m.type);
    }
    return out;
}

void write_trace(const std::filesystem::path& path,
                 const std::vector<TraceRow>& trace) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(trace.size());
    for (const auto& r : trace) {
        rows.push_back({std::to_string(r.iter), format_real(r.cost),
                        format_real(r.grad_norm), format_real(r.wall_time_s)});
    }
    write_csv(path, {"iter", "cost", "grad_norm", "wall_time_s"}, rows);
}

const std::vector<double> kCalibrationLevels{0.1, 0.2, 0.3, 0.4, 0.5,
                                             0.6, 0.7, 0.8, 0.9};

struct EvalSummary {
    std::vector<double> nrmse;
    std::vector<double> nlpd;  // empty for deterministic models
    Vector mean_cumulative;    // truncated-range cumulative series, averaged
    std::vector<std::pair<double, double>> calibration;
};

EvalSummary evaluate_and_write(const KoopmanModel& model,
                               const TrajectoryDataset& test,
                               const ExperimentConfig& config,
                               const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir / "rollouts");
    const bool probabilistic = model.is_probabilistic();
    const int N = test.N;

    EvalSummary summary;
    summary.mean_cumulative = Vector::Zero(N + 1);
    std::vector<Matrix> truths;
    std::vector<RolloutPrediction> preds;
    std::vector<std::vector<std::string>> metric_rows;
    std::vector<Vector> per_dim;

    for (int j = 0; j < test.n_T; ++j) {
        const Matrix truth = test.trajectory(j);
        const auto rollout = propagate(model, lift_initial(model, test.X0.col(j)), N);
        Matrix mean(test.n_x, N + 1);
        RolloutPrediction pred;
        for (int k = 0; k <= N; ++k) {
            const auto& s = rollout[static_cast<std::size_t>(k)].original;
            mean.col(k) = s.mean;
            pred.means.push_back(s.mean);
            pred.covs.push_back(s.cov);
        }

        const double score = nrmse_pct(truth, mean);
        summary.nrmse.push_back(score);
        per_dim.push_back(nrmse_pct_per_dim(truth, mean));
        summary.mean_cumulative += cumulative_nrmse_pct(truth, mean, true);
        std::string nlpd_cell;
        if (probabilistic) {
            const double v = nlpd(truth, pred);
            summary.nlpd.push_back(v);
            nlpd_cell = format_real(v);
        }

        std::vector<std::string> row{config.system,
                                     config.model.type,
                                     noise_kind_name(config.protocol.noise.kind),
                                     format_real(config.protocol.noise.intensity_pct),
                                     std::to_string(j),
                                     format_real(score),
                                     nlpd_cell};
        for (Eigen::Index d = 0; d < test.n_x; ++d) {
            row.push_back(format_real(per_dim.back()(d)));
        }
        metric_rows.push_back(std::move(row));

        std::vector<std::string> header{"step"};
        for (int d = 0; d < test.n_x; ++d) header.push_back("truth_" + std::to_string(d));
        for (int d = 0; d < test.n_x; ++d) header.push_back("mean_" + std::to_string(d));
        for (int d = 0; d < test.n_x; ++d) header.push_back("std_" + std::to_string(d));
        std::vector<std::vector<std::string>> roll_rows;
        for (int k = 0; k <= N; ++k) {
            std::vector<std::string> r{std::to_string(k)};
            for (int d = 0; d < test.n_x; ++d) r.push_back(format_real(truth(d, k)));
            for (int d = 0; d < test.n_x; ++d) r.push_back(format_real(mean(d, k)));
            for (int d = 0; d < test.n_x; ++d) {
                const double var =
                    probabilistic
                        ? std::max(0.0, pred.covs[static_cast<std::size_t>(k)](d, d))
                        : 0.0;
                r.push_back(format_real(std::sqrt(var)));
            }
            roll_rows.push_back(std::move(r));
        }
        write_csv(out_dir / "rollouts" /
                      ("trajectory_" + std::to_string(j) + ".csv"),
                  header, roll_rows);

        truths.push_back(truth);
        preds.push_back(std::move(pred));
    }
    summary.mean_cumulative /= static_cast<double>(test.n_T);

    std::vector<std::string> metrics_header{
        "system",        "model",     "noise_kind", "intensity",
        "trajectory_id", "nrmse_pct", "nlpd"};
    for (int d = 0; d < test.n_x; ++d) {
        metrics_header.push_back("nrmse_pct_dim" + std::to_string(d));
    }
    write_csv(out_dir / "metrics.csv", metrics_header, metric_rows);

    std::vector<std::vector<std::string>> summary_rows;
    const auto [nm, ns] = summarize(summary.nrmse);
    summary_rows.push_back({"nrmse_pct", format_real(nm), format_real(ns)});
    if (probabilistic) {
        const auto [lm, ls] = summarize(summary.nlpd);
        summary_rows.push_back({"nlpd", format_real(lm), format_real(ls)});
    }
    write_csv(out_dir / "summary.csv", {"metric", "mean", "std"}, summary_rows);

    std::vector<std::vector<std::string>> cum_rows;
    for (int k = 0; k <= N; ++k) {
        cum_rows.push_back(
            {std::to_string(k), format_real(summary.mean_cumulative(k))});
    }
    write_csv(out_dir / "cumulative_nrmse.csv", {"step", "mean_cum_nrmse_pct"},
              cum_rows);

    if (probabilistic) {
        summary.calibration = calibration_curve(truths, preds, kCalibrationLevels);
        std::vector<std::vector<std::string>> cal_rows;
        for (const auto& [nominal, empirical] : summary.calibration) {
            cal_rows.push_back({format_real(nominal), format_real(empirical)});
        }
        write_csv(out_dir / "calibration.csv", {"nominal", "empirical"}, cal_rows);
    }
    return summary;
}

struct Cell {
    std::string scenario;
    NoiseKind kind;
    double intensity_pct;
    std::string model_type;
};

std::string scenario_name(NoiseKind kind, double pct) {
    if (kind == NoiseKind::none || pct == 0.0) return "clean";
    return noise_kind_name(kind) + "_" + std::to_string(static_cast<int>(pct));
}

ExperimentConfig cell_config(const ExperimentConfig& base, const Cell& cell,
                             const std::filesystem::path& cell_dir) {
    ExperimentConfig config = base;
    config.protocol.noise.kind = cell.kind;
    config.protocol.noise.intensity_pct = cell.intensity_pct;
    config.model.type = cell.model_type;
    config.out_dir = cell_dir;
    return config;
}

/// generate -> train -> evaluate for one (scenario, model) cell, writing all
/// artifacts into the cell directory.
EvalSummary run_cell(const ExperimentConfig& config) {
    const auto splits = generate_splits(config);
    save_dataset(splits.train, make_meta(config, splits.train, true),
                 config.out_dir / "data" / "train");
    save_dataset(splits.test, make_meta(config, splits.test, false),
                 config.out_dir / "data" / "test");
    const auto trained = train_model(config, splits.train);
    save_model(trained.model, config.out_dir / "model.json");
    if (!trained.trace.empty()) {
        write_trace(config.out_dir / "trace.csv", trained.trace);
    }
    return evaluate_and_write(trained.model, splits.test, config, config.out_dir);
}

void run_cells_parallel(const std::vector<ExperimentConfig>& configs,
                        std::vector<EvalSummary>& summaries, int jobs) {
    summaries.resize(configs.size());
    const int n = static_cast<int>(configs.size());
    int workers = jobs > 0 ? jobs
                           : static_cast<int>(std::max(
                                 1u, std::thread::hardware_concurrency()));
    workers = std::min(workers, n);
    std::vector<std::exception_ptr> errors(configs.size());
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&, t]() {
            for (int i = t; i < n; i += workers) {
                try {
                    summaries[static_cast<std::size_t>(i)] =
                        run_cell(configs[static_cast<std::size_t>(i)]);
                } catch (...) {
                    errors[static_cast<std::size_t>(i)] = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }
}

ExperimentConfig base_for_system(const ExperimentConfig& config,
                                 const std::string& system) {
    ExperimentConfig base = default_config(system);
    base.model = config.model;  // model hyperparameters are overridable
    base.seed = config.seed;
    base.out_dir = config.out_dir;
    return base;
}

void reproduce_table(const ExperimentConfig& config, int jobs,
                     const std::string& table, const std::string& system,
                     const std::vector<std::pair<NoiseKind, double>>& scenarios,
                     const std::vector<std::string>& models,
                     const std::string& metric) {
    const ExperimentConfig base = base_for_system(config, system);
    const auto table_dir = config.out_dir / table;

    std::vector<Cell> cells;
    std::vector<ExperimentConfig> configs;
    for (const auto& [kind, pct] : scenarios) {
        for (const auto& model : models) {
            Cell cell{scenario_name(kind, pct), kind, pct, model};
            configs.push_back(
                cell_config(base, cell, table_dir / cell.scenario / model));
            cells.push_back(std::move(cell));
        }
    }
    std::vector<EvalSummary> summaries;
    run_cells_parallel(configs, summaries, jobs);

    std::vector<std::string> header{"scenario"};
    for (const auto& model : models) {
        header.push_back(model + "_mean");
        header.push_back(model + "_std");
    }
    header.push_back("ssid_gpk");
    std::vector<std::vector<std::string>> rows;
    std::size_t idx = 0;
    for (const auto& [kind, pct] : scenarios) {
        std::vector<std::string> row{scenario_name(kind, pct)};
        for (std::size_t m = 0; m < models.size(); ++m, ++idx) {
            const auto& s = summaries[idx];
            const auto [mean, sd] =
                metric == "nlpd" ? summarize(s.nlpd) : summarize(s.nrmse);
            row.push_back(format_real(mean));
            row.push_back(format_real(sd));
        }
        row.push_back("not implemented, see paper");
        rows.push_back(std::move(row));
    }
    write_csv(table_dir / (table + ".csv"), header, rows);
}

void reproduce_fig2(const ExperimentConfig& config, int jobs) {
    const ExperimentConfig base = base_for_system(config, "scalar_map");
    const auto fig_dir = config.out_dir / "fig2";
    const std::vector<std::string> models{"poly_edmd", "rbf_edmd", "igpk"};
    std::vector<ExperimentConfig> configs;
    for (const auto& model : models) {
        Cell cell{"clean", NoiseKind::none, 0.0, model};
        configs.push_back(cell_config(base, cell, fig_dir / "clean" / model));
    }
    std::vector<EvalSummary> summaries;
    run_cells_parallel(configs, summaries, jobs);

    std::vector<std::vector<std::string>> rows;
    const Eigen::Index steps = summaries.front().mean_cumulative.size();
    for (Eigen::Index k = 0; k < steps; ++k) {
        std::vector<std::string> row{std::to_string(k)};
        for (const auto& s : summaries) {
            row.push_back(format_real(s.mean_cumulative(k)));
        }
        rows.push_back(std::move(row));
    }
    write_csv(fig_dir / "fig2.csv", {"step", "poly_edmd", "rbf_edmd", "igpk"}, rows);
}

void reproduce_fig3(const ExperimentConfig& config, int jobs) {
    const ExperimentConfig base = base_for_system(config, "predator_prey");
    const auto fig_dir = config.out_dir / "fig3";
    std::vector<ExperimentConfig> configs;
    configs.push_back(cell_config(base, {"uniform_10", NoiseKind::uniform, 10.0, "igpk"},
                                  fig_dir / "uniform_10" / "igpk"));
    configs.push_back(cell_config(base, {"gaussian_10", NoiseKind::gaussian, 10.0, "igpk"},
                                  fig_dir / "gaussian_10" / "igpk"));
    std::vector<EvalSummary> summaries;
    run_cells_parallel(configs, summaries, jobs);

    // Fig 3A analog: mean +- 1 sigma rollout for one test initial condition
    std::filesystem::copy_file(
        fig_dir / "uniform_10" / "igpk" / "rollouts" / "trajectory_0.csv",
        fig_dir / "fig3a.csv", std::filesystem::copy_options::overwrite_existing);

    // Fig 3B analog: calibration curve under 10% gaussian noise
    std::vector<std::vector<std::string>> rows;
    for (const auto& [nominal, empirical] : summaries[1].calibration) {
        rows.push_back({format_real(nominal), format_real(empirical)});
    }
    write_csv(fig_dir / "fig3b.csv", {"nominal", "empirical"}, rows);
}

}  // namespace

ExperimentConfig resolve_config(const CliOptions& opts,
                                const std::string& default_system) {
    ExperimentConfig config = opts.config_path
                                  ? load_config(*opts.config_path)
                                  : default_config(default_system);
    if (opts.seed) config.seed = *opts.seed;
    if (opts.out) config.out_dir = *opts.out;
    if (const char* env = std::getenv("IGPK_OUT_DIR"); env && *env) {
        config.out_dir = env;
    }
    validate(config);
    return config;
}

void cmd_generate(const ExperimentConfig& config) {
    const auto splits = generate_splits(config);
    save_dataset(splits.train, make_meta(config, splits.train, true),
                 config.out_dir / "train");
    save_dataset(splits.test, make_meta(config, splits.test, false),
                 config.out_dir / "test");
}

void cmd_train(const ExperimentConfig& config) {
    if (config.data_dir.empty()) {
        throw InvalidConfig("train: config must set data_dir");
    }
    auto [train, meta] = load_dataset(config.data_dir);
    const auto trained = train_model(config, train);
    std::filesystem::create_directories(config.out_dir);
    save_model(trained.model, config.out_dir / "model.json");
    if (!trained.trace.empty()) {
        write_trace(config.out_dir / "trace.csv", trained.trace);
    }
}

void cmd_evaluate(const ExperimentConfig& config) {
    if (config.data_dir.empty() || config.model_path.empty()) {
        throw InvalidConfig("evaluate: config must set data_dir and model_path");
    }
    const auto model = load_model(config.model_path);
    auto [test, meta] = load_dataset(config.data_dir);
    if (model.state_dim() != test.n_x) {
        throw DimensionMismatch("evaluate: model/dataset state dimension");
    }
    evaluate_and_write(model, test, config, config.out_dir);
}

void cmd_reproduce(const std::string& target, const ExperimentConfig& config,
                   int jobs) {
    if (target == "table1") {
        reproduce_table(config, jobs, "table1", "scalar_map",
                        {{NoiseKind::none, 0.0},
                         {NoiseKind::gaussian, 5.0},
                         {NoiseKind::gaussian, 10.0},
                         {NoiseKind::uniform, 5.0},
                         {NoiseKind::uniform, 10.0}},
                        {"poly_edmd", "rbf_edmd", "igpk"}, "nrmse");
    } else if (target == "table2") {
        reproduce_table(config, jobs, "table2", "predator_prey",
                        {{NoiseKind::none, 0.0},
                         {NoiseKind::gaussian, 10.0},
                         {NoiseKind::gaussian, 20.0},
                         {NoiseKind::uniform, 10.0},
                         {NoiseKind::uniform, 20.0}},
                        {"igpk"}, "nlpd");
    } else if (target == "fig2") {
        reproduce_fig2(config, jobs);
    } else if (target == "fig3") {
        reproduce_fig3(config, jobs);
    } else {
        throw InvalidConfig("unknown reproduce target: " + target +
                            " (expected table1|table2|fig2|fig3)");
    }
}

int run_cli(int argc, char** argv) {
    CLI::App app{"GP-observable Koopman operator learning"};
    app.require_subcommand(1);

    struct SubArgs {
        CliOptions opts;
        std::string config_str, out_str;
        std::int64_t seed = -1;
    };
    auto add_common = [](CLI::App* sub, SubArgs& args) {
        sub->add_option("--config", args.config_str, "experiment config JSON");
        sub->add_option("--seed", args.seed, "global seed override");
        sub->add_option("--out", args.out_str, "output directory");
        sub->add_option("--jobs", args.opts.jobs, "parallel worker count");
    };
    auto finish = [](SubArgs& args) {
        if (!args.config_str.empty()) args.opts.config_path = args.config_str;
        if (!args.out_str.empty()) args.opts.out = args.out_str;
        if (args.seed >= 0) args.opts.seed = static_cast<std::uint64_t>(args.seed);
        return args.opts;
    };

    SubArgs gen_args, train_args, eval_args, repro_args;
    std::string target;
    auto* gen = app.add_subcommand("generate", "simulate and write datasets");
    add_common(gen, gen_args);
    auto* train = app.add_subcommand("train", "fit a model on a dataset");
    add_common(train, train_args);
    auto* eval = app.add_subcommand("evaluate", "roll out a model on a test set");
    add_common(eval, eval_args);
    auto* repro =
        app.add_subcommand("reproduce", "run a full benchmark study");
    repro->add_option("target", target, "table1|table2|fig2|fig3")->required();
    add_common(repro, repro_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) {
            cmd_generate(resolve_config(finish(gen_args)));
        } else if (train->parsed()) {
            cmd_train(resolve_config(finish(train_args)));
        } else if (eval->parsed()) {
            cmd_evaluate(resolve_config(finish(eval_args)));
        } else if (repro->parsed()) {
            const auto opts = finish(repro_args);
            const std::string default_system =
                (target == "table2" || target == "fig3") ? "predator_prey"
                                                         : "scalar_map";
            cmd_reproduce(target, resolve_config(opts, default_system),
                          opts.jobs);
        }
    } catch (const InvalidConfig& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const TrainingDiverged& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const std::filesystem::filesystem_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::runtime_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}

}  // namespace igpk::cli
