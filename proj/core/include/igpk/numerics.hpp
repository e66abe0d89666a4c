#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "igpk/errors.hpp"

namespace igpk {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Numerical policy for factorizing symmetric positive (semi-)definite
/// matrices: jitter-doubling schedule applied to the diagonal until the
/// Cholesky factorization succeeds.
struct SpdPolicy {
    double jitter = 1e-8;
    int max_jitter_doublings = 10;
};

/// Cached Cholesky factorization of A + jitter*I, where jitter is the
/// smallest value from the policy schedule (starting at zero) that makes
/// the matrix positive definite.
class CholeskyFactor {
public:
    CholeskyFactor(const Matrix& A, const SpdPolicy& policy = {});

    Matrix solve(const Matrix& B) const;

    double log_det() const { return log_det_; }
    double jitter_used() const { return jitter_used_; }
    Eigen::Index dim() const { return llt_.matrixL().rows(); }
    const Eigen::LLT<Matrix>& llt() const { return llt_; }

private:
    Eigen::LLT<Matrix> llt_;
    double log_det_ = 0.0;
    double jitter_used_ = 0.0;
};

struct CholeskySolveResult {
    Matrix X;
    double log_det;
    double jitter_used;
};

/// Solves (A + jI) X = B for symmetric A with the jitter-doubling schedule.
CholeskySolveResult cholesky_solve(const Matrix& A, const Matrix& B,
                                   const SpdPolicy& policy = {});

/// Moore-Penrose pseudo-inverse via SVD. Singular values below
/// rank_tol_factor * max(rows, cols) * sigma_max are truncated to zero.
Matrix pinv_svd(const Matrix& A, double rank_tol_factor = -1.0);

/// M = B A^T (A A^T + lambda I)^{-1}, the minimizer of
/// ||B - M A||_F^2 + lambda ||M||_F^2.
Matrix ridge_solve_right(const Matrix& B, const Matrix& A, double lambda);

void require_finite(const Matrix& A, const char* what);

}  // namespace igpk
