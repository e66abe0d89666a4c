#pragma once

#include <cstdint>

#include "igpk/numerics.hpp"

namespace igpk {

/// All monomials of the state up to total degree `degree`, constant first,
/// graded-lexicographic order.
struct PolyDictionary {
    int degree;
    int n_x;

    Eigen::Index feature_count() const;
};

/// Thin-plate spline features r^2 ln r around k centers, optionally
/// prepended with a constant-1 row and the raw state rows.
struct RbfDictionary {
    Matrix centers;  // n_x x k
    bool include_state = true;
    bool include_constant = true;

    Eigen::Index feature_count() const {
        return centers.cols() + (include_state ? centers.rows() : 0) +
               (include_constant ? 1 : 0);
    }
};

Matrix poly_lift(const Matrix& X, int degree);

/// Lloyd's algorithm with k-means++ seeding; deterministic for a fixed seed.
/// Empty clusters are re-seeded to the point farthest from its center.
Matrix kmeans(const Matrix& X, int k, std::uint64_t seed, int max_iters = 100);

Matrix thinplate_lift(const Matrix& X, const RbfDictionary& dict);

}  // namespace igpk
