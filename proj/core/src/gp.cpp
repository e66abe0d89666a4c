#include "igpk/gp.hpp"

#include <cmath>
#include <numbers>

namespace igpk {

namespace {

Matrix noisy_gram(const Matrix& X0, const KernelHyperparams& theta) {
    Matrix K = gram(X0, X0, theta);
    K.diagonal().array() += theta.noise_var();
    return K;
}

}  // namespace

GPObservable::GPObservable(Matrix train_inputs, Vector virtual_targets,
                           KernelHyperparams theta, const SpdPolicy& policy)
    : X0_(std::move(train_inputs)),
      z_(std::move(virtual_targets)),
      theta_(std::move(theta)) {
    if (z_.size() != X0_.cols()) {
        throw DimensionMismatch("GPObservable: targets vs training inputs");
    }
    if (X0_.rows() != theta_.input_dim()) {
        throw DimensionMismatch("GPObservable: input dim vs lengthscale count");
    }
    factor_ = std::make_shared<CholeskyFactor>(noisy_gram(X0_, theta_), policy);
    alpha_ = factor_->solve(z_);
}

RowVector GPObservable::posterior_mean(const Matrix& Xq) const {
    const Matrix Kq = gram(Xq, X0_, theta_);  // m x n_T
    return (Kq * alpha_).transpose();
}

Vector GPObservable::posterior_var(const Matrix& Xq) const {
    const Matrix Kq = gram(Xq, X0_, theta_);        // m x n_T
    const Matrix W = factor_->solve(Kq.transpose());  // n_T x m
    Vector v(Xq.cols());
    for (Eigen::Index j = 0; j < Xq.cols(); ++j) {
        v(j) = theta_.signal_var() - Kq.row(j).dot(W.col(j));
    }
    return v.cwiseMax(0.0);
}

double nlml(const KernelHyperparams& theta, const Matrix& X0, const Vector& z,
            const SpdPolicy& policy) {
    if (z.size() != X0.cols()) {
        throw DimensionMismatch("nlml: targets vs training inputs");
    }
    CholeskyFactor factor(noisy_gram(X0, theta), policy);
    const Vector alpha = factor.solve(z);
    const double n = static_cast<double>(z.size());
    return 0.5 * (z.dot(alpha) + factor.log_det() +
                  n * std::log(2.0 * std::numbers::pi));
}

Vector nlml_grad(const KernelHyperparams& theta, const Matrix& X0, const Vector& z,
                 const SpdPolicy& policy) {
    if (z.size() != X0.cols()) {
        throw DimensionMismatch("nlml_grad: targets vs training inputs");
    }
    const Eigen::Index n = X0.cols();
    CholeskyFactor factor(noisy_gram(X0, theta), policy);
    const Vector alpha = factor.solve(z);
    const Matrix Ainv = factor.solve(Matrix::Identity(n, n));
    // dL/dtheta_j = 1/2 tr((A^{-1} - alpha alpha^T) dA/dtheta_j)
    const Matrix W = Ainv - alpha * alpha.transpose();
    const auto dK = gram_grad_hyper(X0, theta);
    Vector g(theta.param_count());
    for (std::size_t j = 0; j < dK.size(); ++j) {
        g(static_cast<Eigen::Index>(j)) = 0.5 * W.cwiseProduct(dK[j]).sum();
    }
    return g;
}

}  // namespace igpk
