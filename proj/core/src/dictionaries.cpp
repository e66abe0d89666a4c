#include "igpk/dictionaries.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "igpk/rng.hpp"

namespace igpk {

namespace {

std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    }
    return r;
}

void enumerate_exponents(int n_x, int remaining, int dim, std::vector<int>& cur,
                         std::vector<std::vector<int>>& out) {
    if (dim == n_x - 1) {
        cur[static_cast<std::size_t>(dim)] = remaining;
        out.push_back(cur);
        return;
    }
    for (int e = remaining; e >= 0; --e) {
        cur[static_cast<std::size_t>(dim)] = e;
        enumerate_exponents(n_x, remaining - e, dim + 1, cur, out);
    }
}

}  // namespace

Eigen::Index PolyDictionary::feature_count() const {
    return static_cast<Eigen::Index>(binomial(n_x + degree, degree));
}

Matrix poly_lift(const Matrix& X, int degree) {
    if (degree < 1) throw InvalidConfig("poly_lift: degree must be >= 1");
    require_finite(X, "poly_lift");
    const int n_x = static_cast<int>(X.rows());
    const Eigen::Index m = X.cols();

    std::vector<std::vector<int>> exponents;
    std::vector<int> cur(static_cast<std::size_t>(n_x), 0);
    for (int g = 0; g <= degree; ++g) {
        enumerate_exponents(n_x, g, 0, cur, exponents);
    }

    Matrix Z(static_cast<Eigen::Index>(exponents.size()), m);
    for (Eigen::Index r = 0; r < Z.rows(); ++r) {
        const auto& e = exponents[static_cast<std::size_t>(r)];
        for (Eigen::Index j = 0; j < m; ++j) {
            double v = 1.0;
            for (int d = 0; d < n_x; ++d) {
                for (int p = 0; p < e[static_cast<std::size_t>(d)]; ++p) {
                    v *= X(d, j);
                }
            }
            Z(r, j) = v;
        }
    }
    return Z;
}

Matrix kmeans(const Matrix& X, int k, std::uint64_t seed, int max_iters) {
    const Eigen::Index m = X.cols();
    if (k < 1 || k > m) throw InvalidConfig("kmeans: need 1 <= k <= point count");
    require_finite(X, "kmeans");

    // DegenerateData if fewer than k distinct columns.
    {
        std::vector<Eigen::Index> distinct;
        for (Eigen::Index j = 0; j < m; ++j) {
            bool seen = false;
            for (Eigen::Index d : distinct) {
                if ((X.col(j) - X.col(d)).cwiseAbs().maxCoeff() == 0.0) {
                    seen = true;
                    break;
                }
            }
            if (!seen) distinct.push_back(j);
            if (distinct.size() >= static_cast<std::size_t>(k)) break;
        }
        if (distinct.size() < static_cast<std::size_t>(k)) {
            throw DegenerateData("kmeans: fewer distinct points than clusters");
        }
    }

    std::mt19937_64 rng(seed);
    Matrix centers(X.rows(), k);

    // k-means++ seeding
    centers.col(0) = X.col(static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(m)));
    Vector d2 = (X.colwise() - centers.col(0)).colwise().squaredNorm().transpose();
    for (int c = 1; c < k; ++c) {
        const double total = d2.sum();
        Eigen::Index pick = 0;
        if (total > 0.0) {
            const double target = uniform01(rng) * total;
            double acc = 0.0;
            for (Eigen::Index j = 0; j < m; ++j) {
                acc += d2(j);
                if (acc >= target) {
                    pick = j;
                    break;
                }
            }
        } else {
            pick = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(m));
        }
        centers.col(c) = X.col(pick);
        d2 = d2.cwiseMin((X.colwise() - centers.col(c)).colwise().squaredNorm().transpose());
    }

    std::vector<int> assign(static_cast<std::size_t>(m), -1);
    for (int it = 0; it < max_iters; ++it) {
        bool changed = false;
        for (Eigen::Index j = 0; j < m; ++j) {
            int best = 0;
            double best_d = (X.col(j) - centers.col(0)).squaredNorm();
            for (int c = 1; c < k; ++c) {
                const double d = (X.col(j) - centers.col(c)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (assign[static_cast<std::size_t>(j)] != best) {
                assign[static_cast<std::size_t>(j)] = best;
                changed = true;
            }
        }
        if (!changed && it > 0) break;

        Matrix sums = Matrix::Zero(X.rows(), k);
        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (Eigen::Index j = 0; j < m; ++j) {
            sums.col(assign[static_cast<std::size_t>(j)]) += X.col(j);
            ++counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(j)])];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) {
                centers.col(c) = sums.col(c) / counts[static_cast<std::size_t>(c)];
            } else {
                // re-seed empty cluster to the farthest point from its center
                Eigen::Index far = 0;
                double far_d = -1.0;
                for (Eigen::Index j = 0; j < m; ++j) {
                    const int a = assign[static_cast<std::size_t>(j)];
                    const double d = (X.col(j) - centers.col(a)).squaredNorm();
                    if (d > far_d) {
                        far_d = d;
                        far = j;
                    }
                }
                centers.col(c) = X.col(far);
            }
        }
    }
    return centers;
}

Matrix thinplate_lift(const Matrix& X, const RbfDictionary& dict) {
    if (X.rows() != dict.centers.rows()) {
        throw DimensionMismatch("thinplate_lift: state dim vs centers");
    }
    require_finite(X, "thinplate_lift");
    const Eigen::Index m = X.cols();
    const Eigen::Index k = dict.centers.cols();
    Matrix Z(dict.feature_count(), m);
    Eigen::Index row = 0;
    if (dict.include_constant) {
        Z.row(row++).setOnes();
    }
    if (dict.include_state) {
        Z.middleRows(row, X.rows()) = X;
        row += X.rows();
    }
    for (Eigen::Index c = 0; c < k; ++c, ++row) {
        for (Eigen::Index j = 0; j < m; ++j) {
            const double r = (X.col(j) - dict.centers.col(c)).norm();
            Z(row, j) = (r > 0.0) ? r * r * std::log(r) : 0.0;
        }
    }
    return Z;
}

}  // namespace igpk
