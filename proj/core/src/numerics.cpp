#include "igpk/numerics.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace igpk {

void require_finite(const Matrix& A, const char* what) {
    if (!A.allFinite()) {
        throw NonFiniteInput(std::string(what) + ": non-finite entries");
    }
}

namespace {

// Attempts LLT of A + j*I for j = 0, jitter, 2*jitter, ... Returns the jitter
// that succeeded through `jitter_out`.
Eigen::LLT<Matrix> llt_with_jitter(const Matrix& A, const SpdPolicy& policy,
                                   double& jitter_out) {
    Eigen::LLT<Matrix> llt(A);
    if (llt.info() == Eigen::Success) {
        jitter_out = 0.0;
        return llt;
    }
    double j = policy.jitter;
    for (int k = 0; k <= policy.max_jitter_doublings; ++k, j *= 2.0) {
        Matrix Aj = A;
        Aj.diagonal().array() += j;
        llt.compute(Aj);
        if (llt.info() == Eigen::Success) {
            jitter_out = j;
            return llt;
        }
    }
    throw NotSpd("cholesky: jitter schedule exhausted");
}

double llt_log_det(const Eigen::LLT<Matrix>& llt) {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace

CholeskyFactor::CholeskyFactor(const Matrix& A, const SpdPolicy& policy) {
    require_finite(A, "CholeskyFactor");
    if (A.rows() != A.cols()) {
        throw DimensionMismatch("CholeskyFactor: matrix not square");
    }
    if (policy.jitter <= 0.0) {
        throw InvalidConfig("SpdPolicy: jitter must be positive");
    }
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw DimensionMismatch("CholeskyFactor: matrix not symmetric");
    }
    llt_ = llt_with_jitter(A, policy, jitter_used_);
    log_det_ = llt_log_det(llt_);
}

Matrix CholeskyFactor::solve(const Matrix& B) const {
    if (B.rows() != dim()) {
        throw DimensionMismatch("CholeskyFactor::solve: row count mismatch");
    }
    return llt_.solve(B);
}

CholeskySolveResult cholesky_solve(const Matrix& A, const Matrix& B,
                                   const SpdPolicy& policy) {
    require_finite(B, "cholesky_solve");
    CholeskyFactor factor(A, policy);
    return {factor.solve(B), factor.log_det(), factor.jitter_used()};
}

Matrix pinv_svd(const Matrix& A, double rank_tol_factor) {
    require_finite(A, "pinv_svd");
    if (rank_tol_factor < 0.0) {
        rank_tol_factor = std::numeric_limits<double>::epsilon();
    }
    Eigen::BDCSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0) return Matrix::Zero(A.cols(), A.rows());
    const double tol =
        rank_tol_factor * static_cast<double>(std::max(A.rows(), A.cols())) * sv(0);
    Vector inv_sv = Vector::Zero(sv.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > tol) inv_sv(i) = 1.0 / sv(i);
    }
    return svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
}

Matrix ridge_solve_right(const Matrix& B, const Matrix& A, double lambda) {
    require_finite(A, "ridge_solve_right");
    require_finite(B, "ridge_solve_right");
    if (B.cols() != A.cols()) {
        throw DimensionMismatch("ridge_solve_right: column count mismatch");
    }
    Matrix G = A * A.transpose();
    G.diagonal().array() += lambda;
    Eigen::LLT<Matrix> llt(G);
    if (llt.info() != Eigen::Success) {
        throw NotSpd("ridge_solve_right: Gram matrix not positive definite");
    }
    // M^T = (A A^T + lambda I)^{-1} A B^T
    return llt.solve(A * B.transpose()).transpose();
}

}  // namespace igpk
