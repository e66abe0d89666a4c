#include "igpk/kernels.hpp"

#include <cmath>

namespace igpk {

Vector KernelHyperparams::pack() const {
    Vector p(param_count());
    p.head(log_lengthscales.size()) = log_lengthscales;
    p(p.size() - 2) = log_signal_var;
    p(p.size() - 1) = log_noise_var;
    return p;
}

KernelHyperparams KernelHyperparams::unpack(const Vector& packed) {
    if (packed.size() < 3) {
        throw DimensionMismatch("KernelHyperparams::unpack: need at least 3 entries");
    }
    KernelHyperparams theta;
    theta.log_lengthscales = packed.head(packed.size() - 2);
    theta.log_signal_var = packed(packed.size() - 2);
    theta.log_noise_var = packed(packed.size() - 1);
    return theta;
}

double rbf_eval(const Vector& x, const Vector& x2, const KernelHyperparams& theta) {
    if (x.size() != x2.size() || x.size() != theta.input_dim()) {
        throw DimensionMismatch("rbf_eval: input dimension mismatch");
    }
    const Vector inv_l2 = (-2.0 * theta.log_lengthscales).array().exp();
    const double q = ((x - x2).array().square() * inv_l2.array()).sum();
    return theta.signal_var() * std::exp(-0.5 * q);
}

Matrix gram(const Matrix& Xa, const Matrix& Xb, const KernelHyperparams& theta) {
    if (Xa.rows() != theta.input_dim() || Xb.rows() != theta.input_dim()) {
        throw DimensionMismatch("gram: input dimension mismatch");
    }
    require_finite(Xa, "gram");
    require_finite(Xb, "gram");
    const Vector inv_l = (-theta.log_lengthscales).array().exp();
    // Scale inputs so the squared distance matrix gives the ARD exponent.
    const Matrix Sa = inv_l.asDiagonal() * Xa;
    const Matrix Sb = inv_l.asDiagonal() * Xb;
    const Vector na = Sa.colwise().squaredNorm();
    const Vector nb = Sb.colwise().squaredNorm();
    Matrix D = -2.0 * (Sa.transpose() * Sb);
    D.colwise() += na;
    D.rowwise() += nb.transpose();
    return theta.signal_var() * (-0.5 * D.cwiseMax(0.0)).array().exp();
}

std::vector<Matrix> gram_grad_hyper(const Matrix& X0, const KernelHyperparams& theta) {
    const Eigen::Index d = theta.input_dim();
    if (X0.rows() != d) {
        throw DimensionMismatch("gram_grad_hyper: input dimension mismatch");
    }
    const Eigen::Index n = X0.cols();
    const Matrix K = gram(X0, X0, theta);

    std::vector<Matrix> grads;
    grads.reserve(static_cast<std::size_t>(d) + 2);
    for (Eigen::Index dim = 0; dim < d; ++dim) {
        const double inv_l2 = std::exp(-2.0 * theta.log_lengthscales(dim));
        Matrix D2(n, n);
        for (Eigen::Index j = 0; j < n; ++j) {
            D2.col(j) =
                (X0.row(dim).transpose().array() - X0(dim, j)).square().matrix();
        }
        // d k / d log(l_d) = k * (x_d - x'_d)^2 / l_d^2
        grads.push_back(K.cwiseProduct(D2) * inv_l2);
    }
    grads.push_back(K);  // d/d log_signal_var
    grads.push_back(theta.noise_var() * Matrix::Identity(n, n));
    return grads;
}

}  // namespace igpk
