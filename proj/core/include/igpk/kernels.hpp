#pragma once

#include <vector>

#include "igpk/numerics.hpp"

namespace igpk {

/// ARD Gaussian RBF hyperparameters, log-parameterized so unconstrained
/// gradient steps keep every exponentiated value strictly positive.
struct KernelHyperparams {
    Vector log_lengthscales;  // one per input dimension
    double log_signal_var = 0.0;
    double log_noise_var = 0.0;

    Eigen::Index input_dim() const { return log_lengthscales.size(); }
    Eigen::Index param_count() const { return log_lengthscales.size() + 2; }

    double signal_var() const { return std::exp(log_signal_var); }
    double noise_var() const { return std::exp(log_noise_var); }

    /// Packs as [log_lengthscales..., log_signal_var, log_noise_var].
    Vector pack() const;
    static KernelHyperparams unpack(const Vector& packed);
};

/// sigma_f^2 * exp(-1/2 sum_d (x_d - x2_d)^2 / l_d^2). Noise variance not
/// included.
double rbf_eval(const Vector& x, const Vector& x2, const KernelHyperparams& theta);

/// Cross-covariance matrix: entry (i, j) = rbf_eval(Xa.col(i), Xb.col(j)).
Matrix gram(const Matrix& Xa, const Matrix& Xb, const KernelHyperparams& theta);

/// Derivatives of gram(X0, X0) + sigma_n^2 I with respect to each
/// log-hyperparameter, in pack() order. The noise entry is sigma_n^2 * I.
std::vector<Matrix> gram_grad_hyper(const Matrix& X0, const KernelHyperparams& theta);

}  // namespace igpk
