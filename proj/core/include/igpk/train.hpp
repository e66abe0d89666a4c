#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "igpk/gp.hpp"
#include "igpk/koopman.hpp"
#include "igpk/optim.hpp"
#include "igpk/systems.hpp"

namespace igpk {

/// Row i holds the virtual GP training targets for lifted dimension i at
/// the n_T initial conditions.
struct VirtualTargets {
    Matrix Z;  // n_z x n_T
};

struct IgpkConfig {
    int n_z = 10;
    int stage1_iters = 1500;
    int stage2_iters = 400;
    double ridge_lambda = 1e-8;
    std::uint64_t seed = 0;
    int batch_size = 0;  // 0 = full batch
    double sgd_lr = 1e-2;
    double sgd_momentum = 0.9;
    double adam_lr = 1e-2;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double grad_clip = 1e3;
    bool warm_start_identity = false;
};

/// Precomputed linear maps from virtual targets to lifted snapshot matrices
/// for a fixed Theta: row i of Phi is (A_i Z_i)^T with
/// A_i = K(X, X0) (K(X0, X0) + s_i^2 I)^{-1}, and likewise B_i for X+.
class LiftedOperatorBank {
public:
    LiftedOperatorBank(const std::vector<KernelHyperparams>& thetas,
                       const Matrix& X0, const Matrix& X, const Matrix& XPlus,
                       const SpdPolicy& policy = {});

    int n_z() const { return static_cast<int>(A_.size()); }
    Eigen::Index n_T() const { return n_T_; }
    Eigen::Index snapshot_count() const { return M_; }

    std::pair<Matrix, Matrix> lift(const Matrix& Z) const;
    double cost(const Matrix& Z, const Matrix& X, double ridge_lambda) const;
    /// Returns (cost, dCost/dZ).
    std::pair<double, Matrix> cost_and_grad(const Matrix& Z, const Matrix& X,
                                            double ridge_lambda) const;
    /// Mini-batch variants restricted to the given snapshot columns.
    double cost(const Matrix& Z, const Matrix& X, double ridge_lambda,
                const std::vector<Eigen::Index>& cols) const;
    std::pair<double, Matrix> cost_and_grad(const Matrix& Z, const Matrix& X,
                                            double ridge_lambda,
                                            const std::vector<Eigen::Index>& cols) const;

private:
    std::vector<Matrix> A_, B_;  // M x n_T each
    Eigen::Index n_T_ = 0;
    Eigen::Index M_ = 0;
};

std::pair<Matrix, Matrix> build_lifted_matrices(
    const Matrix& Z, const std::vector<KernelHyperparams>& thetas,
    const Matrix& X0, const Matrix& X, const Matrix& XPlus);

double l1_cost(const Matrix& Z, const std::vector<KernelHyperparams>& thetas,
               const TrajectoryDataset& data, double ridge_lambda);

Matrix l1_grad_z(const Matrix& Z, const std::vector<KernelHyperparams>& thetas,
                 const TrajectoryDataset& data, double ridge_lambda);

struct TraceRow {
    int iter;
    double cost;
    double grad_norm;
    double wall_time_s;
};

struct Stage1Result {
    Matrix Z_star;
    std::vector<TraceRow> trace;
};

std::vector<KernelHyperparams> init_hyperparams(const IgpkConfig& config,
                                                const TrajectoryDataset& data);

Matrix init_virtual_targets(const IgpkConfig& config, const TrajectoryDataset& data);

/// Stage 1: momentum-SGD on the virtual targets at fixed Theta. Returns the
/// best-cost iterate, not the last.
Stage1Result optimize_virtual_targets(const IgpkConfig& config,
                                      const std::vector<KernelHyperparams>& thetas,
                                      const TrajectoryDataset& data);

/// Stage 2: per-observable Adam on the marginal likelihood, independent
/// problems run in parallel. Returns the best iterate per observable.
std::vector<KernelHyperparams> optimize_hyperparameters(
    const IgpkConfig& config, const Matrix& Z_star, const Matrix& X0,
    const std::vector<KernelHyperparams>& thetas_init);

struct TrainResult {
    KoopmanModel model;
    std::vector<TraceRow> stage1_trace;
    double final_cost = 0.0;
};

TrainResult train_igpk(const IgpkConfig& config, const TrajectoryDataset& data);

}  // namespace igpk
