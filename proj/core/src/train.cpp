#include "igpk/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <thread>

#include "igpk/rng.hpp"

namespace igpk {

namespace {

// Reduced-cost evaluation shared by the full-batch and mini-batch paths.
// Phi, PhiPlus: n_z x M lifted snapshots; Xs: n_x x M original snapshots.
struct ReducedCostTerms {
    double cost;
    Matrix g_phi;       // dCost/dPhi
    Matrix g_phi_plus;  // dCost/dPhiPlus
};

double reduced_cost(const Matrix& Phi, const Matrix& PhiPlus, const Matrix& Xs,
                    double lambda) {
    const double c =
        static_cast<double>(Phi.rows()) * static_cast<double>(Phi.cols());
    Matrix G = Phi * Phi.transpose();
    G.diagonal().array() += lambda;
    Eigen::LLT<Matrix> llt(G);
    if (llt.info() != Eigen::Success) {
        throw NotSpd("l1_cost: ridge Gram not positive definite");
    }
    const Matrix Kfit = llt.solve(Phi * PhiPlus.transpose()).transpose();
    const Matrix Cfit = llt.solve(Phi * Xs.transpose()).transpose();
    const Matrix R1 = PhiPlus - Kfit * Phi;
    const Matrix R2 = Xs - Cfit * Phi;
    return (R1.squaredNorm() + R2.squaredNorm()) / c;
}

ReducedCostTerms reduced_cost_and_grad(const Matrix& Phi, const Matrix& PhiPlus,
                                       const Matrix& Xs, double lambda) {
    const Eigen::Index n_z = Phi.rows();
    const double c =
        static_cast<double>(n_z) * static_cast<double>(Phi.cols());

    Matrix G = Phi * Phi.transpose();
    G.diagonal().array() += lambda;
    Eigen::LLT<Matrix> llt(G);
    if (llt.info() != Eigen::Success) {
        throw NotSpd("l1_grad: ridge Gram not positive definite");
    }
    const Matrix S = llt.solve(Matrix::Identity(n_z, n_z));

    const Matrix Tp = Phi * PhiPlus.transpose();  // n_z x n_z
    const Matrix Tx = Phi * Xs.transpose();       // n_z x n_x
    const Matrix Kfit = (S * Tp).transpose();
    const Matrix Cfit = (S * Tx).transpose();
    const Matrix R1 = PhiPlus - Kfit * Phi;
    const Matrix R2 = Xs - Cfit * Phi;

    ReducedCostTerms out;
    out.cost = (R1.squaredNorm() + R2.squaredNorm()) / c;

    const Matrix SPhi = S * Phi;
    out.g_phi_plus = (2.0 / c) * (R1 - (R1 * Phi.transpose()) * SPhi);

    // F = Phi (PhiPlus^T PhiPlus + Xs^T Xs), assembled without M x M products
    const Matrix F = Tp * PhiPlus + Tx * Xs;
    const Matrix H = F * Phi.transpose();
    const Matrix SF = S * F;
    const Matrix S2F = S * SF;
    const Matrix SH = S * H;
    const Matrix S2H = S * SH;
    const Matrix S2Phi = S * SPhi;
    out.g_phi = (-2.0 / c) * (lambda * S2F + SF - SH * SPhi -
                              lambda * (S2H * SPhi + SH * S2Phi));
    return out;
}

Matrix select_cols(const Matrix& A, const std::vector<Eigen::Index>& cols) {
    Matrix out(A.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
        out.col(static_cast<Eigen::Index>(j)) = A.col(cols[j]);
    }
    return out;
}

Matrix select_rows(const Matrix& A, const std::vector<Eigen::Index>& rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), A.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = A.row(rows[i]);
    }
    return out;
}

}  // namespace

LiftedOperatorBank::LiftedOperatorBank(const std::vector<KernelHyperparams>& thetas,
                                       const Matrix& X0, const Matrix& X,
                                       const Matrix& XPlus, const SpdPolicy& policy) {
    if (thetas.empty()) throw InvalidConfig("LiftedOperatorBank: no observables");
    if (X.cols() != XPlus.cols()) {
        throw DimensionMismatch("LiftedOperatorBank: X vs XPlus columns");
    }
    n_T_ = X0.cols();
    M_ = X.cols();
    A_.reserve(thetas.size());
    B_.reserve(thetas.size());
    for (const auto& theta : thetas) {
        Matrix K00 = gram(X0, X0, theta);
        K00.diagonal().array() += theta.noise_var();
        CholeskyFactor factor(K00, policy);
        A_.push_back(factor.solve(gram(X0, X, theta)).transpose());
        B_.push_back(factor.solve(gram(X0, XPlus, theta)).transpose());
    }
}

std::pair<Matrix, Matrix> LiftedOperatorBank::lift(const Matrix& Z) const {
    if (Z.rows() != n_z() || Z.cols() != n_T_) {
        throw DimensionMismatch("LiftedOperatorBank::lift: Z shape");
    }
    Matrix Phi(n_z(), M_), PhiPlus(n_z(), M_);
    for (int i = 0; i < n_z(); ++i) {
        const Vector zi = Z.row(i).transpose();
        Phi.row(i) = (A_[static_cast<std::size_t>(i)] * zi).transpose();
        PhiPlus.row(i) = (B_[static_cast<std::size_t>(i)] * zi).transpose();
    }
    return {Phi, PhiPlus};
}

double LiftedOperatorBank::cost(const Matrix& Z, const Matrix& X,
                                double ridge_lambda) const {
    const auto [Phi, PhiPlus] = lift(Z);
    return reduced_cost(Phi, PhiPlus, X, ridge_lambda);
}

std::pair<double, Matrix> LiftedOperatorBank::cost_and_grad(
    const Matrix& Z, const Matrix& X, double ridge_lambda) const {
    const auto [Phi, PhiPlus] = lift(Z);
    const auto terms = reduced_cost_and_grad(Phi, PhiPlus, X, ridge_lambda);
    Matrix gZ(Z.rows(), Z.cols());
    for (int i = 0; i < n_z(); ++i) {
        gZ.row(i) =
            (A_[static_cast<std::size_t>(i)].transpose() *
                 terms.g_phi.row(i).transpose() +
             B_[static_cast<std::size_t>(i)].transpose() *
                 terms.g_phi_plus.row(i).transpose())
                .transpose();
    }
    return {terms.cost, gZ};
}

double LiftedOperatorBank::cost(const Matrix& Z, const Matrix& X,
                                double ridge_lambda,
                                const std::vector<Eigen::Index>& cols) const {
    Matrix Phi(n_z(), static_cast<Eigen::Index>(cols.size()));
    Matrix PhiPlus(n_z(), static_cast<Eigen::Index>(cols.size()));
    for (int i = 0; i < n_z(); ++i) {
        const Vector zi = Z.row(i).transpose();
        Phi.row(i) = (select_rows(A_[static_cast<std::size_t>(i)], cols) * zi).transpose();
        PhiPlus.row(i) =
            (select_rows(B_[static_cast<std::size_t>(i)], cols) * zi).transpose();
    }
    return reduced_cost(Phi, PhiPlus, select_cols(X, cols), ridge_lambda);
}

std::pair<double, Matrix> LiftedOperatorBank::cost_and_grad(
    const Matrix& Z, const Matrix& X, double ridge_lambda,
    const std::vector<Eigen::Index>& cols) const {
    std::vector<Matrix> As, Bs;
    As.reserve(A_.size());
    Bs.reserve(B_.size());
    Matrix Phi(n_z(), static_cast<Eigen::Index>(cols.size()));
    Matrix PhiPlus(n_z(), static_cast<Eigen::Index>(cols.size()));
    for (int i = 0; i < n_z(); ++i) {
        As.push_back(select_rows(A_[static_cast<std::size_t>(i)], cols));
        Bs.push_back(select_rows(B_[static_cast<std::size_t>(i)], cols));
        const Vector zi = Z.row(i).transpose();
        Phi.row(i) = (As.back() * zi).transpose();
        PhiPlus.row(i) = (Bs.back() * zi).transpose();
    }
    const auto terms =
        reduced_cost_and_grad(Phi, PhiPlus, select_cols(X, cols), ridge_lambda);
    Matrix gZ(Z.rows(), Z.cols());
    for (int i = 0; i < n_z(); ++i) {
        gZ.row(i) = (As[static_cast<std::size_t>(i)].transpose() *
                         terms.g_phi.row(i).transpose() +
                     Bs[static_cast<std::size_t>(i)].transpose() *
                         terms.g_phi_plus.row(i).transpose())
                        .transpose();
    }
    return {terms.cost, gZ};
}

std::pair<Matrix, Matrix> build_lifted_matrices(
    const Matrix& Z, const std::vector<KernelHyperparams>& thetas,
    const Matrix& X0, const Matrix& X, const Matrix& XPlus) {
    LiftedOperatorBank bank(thetas, X0, X, XPlus);
    return bank.lift(Z);
}

double l1_cost(const Matrix& Z, const std::vector<KernelHyperparams>& thetas,
               const TrajectoryDataset& data, double ridge_lambda) {
    LiftedOperatorBank bank(thetas, data.X0, data.X, data.XPlus);
    return bank.cost(Z, data.X, ridge_lambda);
}

Matrix l1_grad_z(const Matrix& Z, const std::vector<KernelHyperparams>& thetas,
                 const TrajectoryDataset& data, double ridge_lambda) {
    LiftedOperatorBank bank(thetas, data.X0, data.X, data.XPlus);
    return bank.cost_and_grad(Z, data.X, ridge_lambda).second;
}

std::vector<KernelHyperparams> init_hyperparams(const IgpkConfig& config,
                                                const TrajectoryDataset& data) {
    // anchors: lengthscale = per-dimension data std, signal var 1, noise 1e-2
    Vector log_std(data.n_x);
    for (int d = 0; d < data.n_x; ++d) {
        const auto row = data.X.row(d);
        const double mean = row.mean();
        const double var = (row.array() - mean).square().sum() /
                           static_cast<double>(row.size() - 1);
        log_std(d) = 0.5 * std::log(std::max(var, 1e-12));
    }
    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<KernelHyperparams> thetas;
    thetas.reserve(static_cast<std::size_t>(config.n_z));
    for (int i = 0; i < config.n_z; ++i) {
        KernelHyperparams theta;
        theta.log_lengthscales = log_std;
        for (Eigen::Index d = 0; d < theta.log_lengthscales.size(); ++d) {
            theta.log_lengthscales(d) += 0.1 * (2.0 * uniform01(rng) - 1.0);
        }
        theta.log_signal_var = 0.1 * (2.0 * uniform01(rng) - 1.0);
        theta.log_noise_var =
            std::log(1e-2) + 0.1 * (2.0 * uniform01(rng) - 1.0);
        thetas.push_back(std::move(theta));
    }
    return thetas;
}

Matrix init_virtual_targets(const IgpkConfig& config, const TrajectoryDataset& data) {
    std::mt19937_64 rng(config.seed ^ 0xd1b54a32d192ed03ULL);
    Matrix Z(config.n_z, data.n_T);
    for (Eigen::Index i = 0; i < Z.rows(); ++i) {
        for (Eigen::Index j = 0; j < Z.cols(); ++j) {
            Z(i, j) = gaussian01(rng);
        }
    }
    if (config.warm_start_identity) {
        const Eigen::Index rows = std::min<Eigen::Index>(data.n_x, Z.rows());
        Z.topRows(rows) = data.X0.topRows(rows);
    }
    return Z;
}

Stage1Result optimize_virtual_targets(const IgpkConfig& config,
                                      const std::vector<KernelHyperparams>& thetas,
                                      const TrajectoryDataset& data) {
    if (config.n_z < 1 || static_cast<int>(thetas.size()) != config.n_z) {
        throw InvalidConfig("optimize_virtual_targets: theta count vs n_z");
    }
    LiftedOperatorBank bank(thetas, data.X0, data.X, data.XPlus);
    Matrix Z = init_virtual_targets(config, data);

    Stage1Result result;
    result.Z_star = Z;
    if (config.stage1_iters == 0) return result;

    const Eigen::Index M = bank.snapshot_count();
    const bool minibatch =
        config.batch_size > 0 && config.batch_size < static_cast<int>(M);

    std::vector<Eigen::Index> order(static_cast<std::size_t>(M));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::mt19937_64 batch_rng(config.seed ^ 0x2545f4914f6cdd1dULL);
    std::size_t cursor = 0;

    SgdOptimizer sgd(Z.size(), config.sgd_lr, config.sgd_momentum);
    double best_cost = std::numeric_limits<double>::infinity();
    const auto t0 = std::chrono::steady_clock::now();

    for (int g = 0; g < config.stage1_iters; ++g) {
        double full_cost;
        Matrix gZ;
        if (minibatch) {
            if (cursor + static_cast<std::size_t>(config.batch_size) > order.size()) {
                std::shuffle(order.begin(), order.end(), batch_rng);
                cursor = 0;
            }
            const std::vector<Eigen::Index> batch(
                order.begin() + static_cast<std::ptrdiff_t>(cursor),
                order.begin() + static_cast<std::ptrdiff_t>(cursor) +
                    config.batch_size);
            cursor += static_cast<std::size_t>(config.batch_size);
            gZ = bank.cost_and_grad(Z, data.X, config.ridge_lambda, batch).second;
            full_cost = bank.cost(Z, data.X, config.ridge_lambda);
        } else {
            std::tie(full_cost, gZ) =
                bank.cost_and_grad(Z, data.X, config.ridge_lambda);
        }

        if (full_cost < best_cost) {
            best_cost = full_cost;
            result.Z_star = Z;
        }

        Vector grad = Eigen::Map<Vector>(gZ.data(), gZ.size());
        const double grad_norm = grad.norm();
        clip_grad_norm(grad, config.grad_clip);

        Vector p = Eigen::Map<Vector>(Z.data(), Z.size());
        sgd.step(p, grad);
        Eigen::Map<Vector>(Z.data(), Z.size()) = p;

        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        result.trace.push_back({g, full_cost, grad_norm, wall});
    }

    const double final_cost = bank.cost(Z, data.X, config.ridge_lambda);
    if (final_cost < best_cost) {
        result.Z_star = Z;
    }
    return result;
}

std::vector<KernelHyperparams> optimize_hyperparameters(
    const IgpkConfig& config, const Matrix& Z_star, const Matrix& X0,
    const std::vector<KernelHyperparams>& thetas_init) {
    const int n_z = static_cast<int>(thetas_init.size());
    if (Z_star.rows() != n_z) {
        throw DimensionMismatch("optimize_hyperparameters: Z rows vs theta count");
    }
    std::vector<KernelHyperparams> out = thetas_init;
    if (config.stage2_iters == 0) return out;

    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_z));
    auto worker = [&](int i) {
        try {
            const Vector z = Z_star.row(i).transpose();
            Vector params = thetas_init[static_cast<std::size_t>(i)].pack();
            AdamOptimizer adam(params.size(), config.adam_lr, config.adam_beta1,
                               config.adam_beta2, config.adam_eps);
            Vector best_params = params;
            double best_cost = nlml(KernelHyperparams::unpack(params), X0, z);
            for (int g = 0; g < config.stage2_iters; ++g) {
                const auto theta = KernelHyperparams::unpack(params);
                const double cost = nlml(theta, X0, z);
                if (cost < best_cost) {
                    best_cost = cost;
                    best_params = params;
                }
                Vector grad = nlml_grad(theta, X0, z);
                clip_grad_norm(grad, config.grad_clip);
                adam.step(params, grad);
            }
            const double final_cost =
                nlml(KernelHyperparams::unpack(params), X0, z);
            if (final_cost < best_cost) best_params = params;
            out[static_cast<std::size_t>(i)] =
                KernelHyperparams::unpack(best_params);
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    };

    // independent problems, one thread per chunk of observables
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const int n_threads = static_cast<int>(std::min<unsigned>(hw, static_cast<unsigned>(n_z)));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back([&, t]() {
            for (int i = t; i < n_z; i += n_threads) worker(i);
        });
    }
    for (auto& th : pool) th.join();
    for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }
    return out;
}

TrainResult train_igpk(const IgpkConfig& config, const TrajectoryDataset& data) {
    if (config.n_z < 1) throw InvalidConfig("train_igpk: n_z must be >= 1");
    if (data.X.cols() == 0 || data.X0.cols() == 0) {
        throw InvalidConfig("train_igpk: empty dataset");
    }

    const auto thetas0 = init_hyperparams(config, data);
    auto stage1 = optimize_virtual_targets(config, thetas0, data);
    const auto thetas_star =
        optimize_hyperparameters(config, stage1.Z_star, data.X0, thetas0);

    GpoBank bank;
    bank.reserve(static_cast<std::size_t>(config.n_z));
    for (int i = 0; i < config.n_z; ++i) {
        bank.emplace_back(data.X0, stage1.Z_star.row(i).transpose(),
                          thetas_star[static_cast<std::size_t>(i)]);
    }

    Matrix Phi(config.n_z, data.X.cols());
    Matrix PhiPlus(config.n_z, data.X.cols());
    for (int i = 0; i < config.n_z; ++i) {
        Phi.row(i) = bank[static_cast<std::size_t>(i)].posterior_mean(data.X);
        PhiPlus.row(i) =
            bank[static_cast<std::size_t>(i)].posterior_mean(data.XPlus);
    }

    // final recovery with the exact pseudo-inverse, not the ridge surrogate
    auto [K, C] = edmd_fit(Phi, PhiPlus, data.X);

    TrainResult result;
    result.final_cost = reduced_cost(Phi, PhiPlus, data.X, config.ridge_lambda);
    if (!std::isfinite(result.final_cost) || !K.allFinite() || !C.allFinite()) {
        throw TrainingDiverged("train_igpk: non-finite final cost or operators");
    }
    result.model.K = std::move(K);
    result.model.C = std::move(C);
    result.model.observables = std::move(bank);
    result.stage1_trace = std::move(stage1.trace);
    return result;
}

}  // namespace igpk
