#pragma once

#include <memory>

#include "igpk/kernels.hpp"
#include "igpk/numerics.hpp"

namespace igpk {

/// One lifted dimension: a single-task zero-prior-mean GP conditioned on
/// (train_inputs, virtual_targets). Immutable after construction; the
/// Cholesky factor of K(X0, X0) + sigma_n^2 I is cached at build time.
class GPObservable {
public:
    GPObservable(Matrix train_inputs, Vector virtual_targets,
                 KernelHyperparams theta, const SpdPolicy& policy = {});

    const Matrix& train_inputs() const { return X0_; }
    const Vector& virtual_targets() const { return z_; }
    const KernelHyperparams& theta() const { return theta_; }
    const CholeskyFactor& factor() const { return *factor_; }
    const Vector& alpha() const { return alpha_; }

    /// Posterior mean at query points, as a row vector of length Xq.cols().
    RowVector posterior_mean(const Matrix& Xq) const;

    /// Posterior variance at query points, floored at zero.
    Vector posterior_var(const Matrix& Xq) const;

private:
    Matrix X0_;
    Vector z_;
    KernelHyperparams theta_;
    std::shared_ptr<const CholeskyFactor> factor_;
    Vector alpha_;  // (K + sigma_n^2 I)^{-1} z
};

/// Negative log marginal likelihood
/// 1/2 [ z^T (K + s^2 I)^{-1} z + log|K + s^2 I| + n log(2 pi) ].
double nlml(const KernelHyperparams& theta, const Matrix& X0, const Vector& z,
            const SpdPolicy& policy = {});

/// Gradient of nlml with respect to the packed log-hyperparameters.
Vector nlml_grad(const KernelHyperparams& theta, const Matrix& X0, const Vector& z,
                 const SpdPolicy& policy = {});

}  // namespace igpk
