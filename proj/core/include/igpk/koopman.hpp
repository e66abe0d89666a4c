#pragma once

#include <utility>
#include <variant>
#include <vector>

#include "igpk/dictionaries.hpp"
#include "igpk/gp.hpp"
#include "igpk/numerics.hpp"

namespace igpk {

/// Mean and covariance of a lifted or original state at one time-step.
struct GaussianState {
    Vector mean;
    Matrix cov;
};

using DictionarySpec = std::variant<PolyDictionary, RbfDictionary>;
using GpoBank = std::vector<GPObservable>;

/// Finite-dimensional Koopman model: operator K, output map C, and the
/// observables defining the lifted space (a deterministic dictionary for the
/// eDMD baselines, or a bank of GP observables for iGPK).
struct KoopmanModel {
    Matrix K;  // n_z x n_z
    Matrix C;  // n_x x n_z
    std::variant<DictionarySpec, GpoBank> observables;

    Eigen::Index lifted_dim() const { return K.rows(); }
    Eigen::Index state_dim() const { return C.rows(); }
    bool is_probabilistic() const {
        return std::holds_alternative<GpoBank>(observables);
    }
};

/// Least-squares Koopman fit: K = PhiPlus * pinv(Phi), C = X * pinv(Phi).
std::pair<Matrix, Matrix> edmd_fit(const Matrix& Phi, const Matrix& PhiPlus,
                                   const Matrix& X);

/// Lifts a deterministic dictionary at the given states.
Matrix dictionary_lift(const DictionarySpec& dict, const Matrix& X);

/// Lifts an initial condition into the model's observable space. GPO banks
/// produce stacked posterior means with a diagonal covariance of posterior
/// variances; deterministic dictionaries produce a zero covariance.
GaussianState lift_initial(const KoopmanModel& model, const Vector& x0);

struct RolloutStep {
    GaussianState lifted;
    GaussianState original;
};

/// Iterates z <- K z, V <- K V K^T and projects through C at every step.
/// Step 0 is the projection of the initial condition; length is steps + 1.
std::vector<RolloutStep> propagate(const KoopmanModel& model,
                                   const GaussianState& init, int steps);

}  // namespace igpk
