#include <doctest.h>

#include <limits>
#include <random>

#include "igpk/dictionaries.hpp"

using namespace igpk;

namespace {

double wcss(const Matrix& X, const Matrix& centers) {
    double total = 0.0;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index c = 0; c < centers.cols(); ++c) {
            best = std::min(best, (X.col(j) - centers.col(c)).squaredNorm());
        }
        total += best;
    }
    return total;
}

}  // namespace

TEST_CASE("poly_lift powers of a scalar") {
    Matrix X(1, 1);
    X << 2.0;
    const Matrix Z = poly_lift(X, 2);
    REQUIRE(Z.rows() == 3);
    CHECK(Z(0, 0) == 1.0);
    CHECK(Z(1, 0) == 2.0);
    CHECK(Z(2, 0) == 4.0);
}

TEST_CASE("poly_lift degree-1 ordering") {
    Matrix X(2, 1);
    X << 3.0, 5.0;
    const Matrix Z = poly_lift(X, 1);
    REQUIRE(Z.rows() == 3);
    CHECK(Z(0, 0) == 1.0);
    CHECK(Z(1, 0) == 3.0);
    CHECK(Z(2, 0) == 5.0);
}

TEST_CASE("poly_lift feature counts match the binomial formula") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> dist;
    for (int n_x = 1; n_x <= 4; ++n_x) {
        for (int degree = 1; degree <= 5; ++degree) {
            const Matrix X = Matrix::NullaryExpr(n_x, 3, [&] { return dist(rng); });
            const Matrix Z = poly_lift(X, degree);
            const PolyDictionary dict{degree, n_x};
            CHECK(Z.rows() == dict.feature_count());
        }
    }
    // n_x = 2, degree = 3 -> C(5, 3) = 10
    CHECK((PolyDictionary{3, 2}).feature_count() == 10);
}

TEST_CASE("kmeans with k equal to point count returns the points") {
    Matrix X(2, 4);
    X << 0.0, 1.0, 5.0, -3.0, 0.0, 2.0, 1.0, 4.0;
    const Matrix centers = kmeans(X, 4, 99);
    for (Eigen::Index j = 0; j < 4; ++j) {
        bool found = false;
        for (Eigen::Index c = 0; c < 4; ++c) {
            if ((X.col(j) - centers.col(c)).norm() < 1e-12) found = true;
        }
        CHECK(found);
    }
}

TEST_CASE("kmeans separates two blobs") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> dist(0.0, 0.01);
    Matrix X(2, 60);
    Vector mu1(2), mu2(2);
    mu1 << -2.0, -2.0;
    mu2 << 3.0, 1.0;
    for (int j = 0; j < 30; ++j) {
        X.col(j) = mu1 + Vector::NullaryExpr(2, [&] { return dist(rng); });
        X.col(30 + j) = mu2 + Vector::NullaryExpr(2, [&] { return dist(rng); });
    }
    const Matrix centers = kmeans(X, 2, 3);
    const double d1 = std::min((centers.col(0) - mu1).norm(), (centers.col(1) - mu1).norm());
    const double d2 = std::min((centers.col(0) - mu2).norm(), (centers.col(1) - mu2).norm());
    CHECK(d1 < 0.1);
    CHECK(d2 < 0.1);
}

TEST_CASE("kmeans is deterministic per seed") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> dist;
    const Matrix X = Matrix::NullaryExpr(2, 40, [&] { return dist(rng); });
    const Matrix a = kmeans(X, 5, 42);
    const Matrix b = kmeans(X, 5, 42);
    CHECK((a.array() == b.array()).all());
}

TEST_CASE("kmeans objective non-increasing with more iterations") {
    std::mt19937_64 rng(20);
    std::normal_distribution<double> dist;
    const Matrix X = Matrix::NullaryExpr(2, 50, [&] { return dist(rng); });
    double prev = std::numeric_limits<double>::infinity();
    for (int iters = 1; iters <= 8; ++iters) {
        const double obj = wcss(X, kmeans(X, 4, 5, iters));
        CHECK(obj <= prev + 1e-9);
        prev = obj;
    }
}

TEST_CASE("kmeans rejects degenerate data") {
    Matrix X = Matrix::Zero(2, 5);  // five copies of one point
    CHECK_THROWS_AS(kmeans(X, 2, 1), DegenerateData);
}

TEST_CASE("thinplate_lift special radii") {
    Matrix centers(1, 1);
    centers << 0.0;
    RbfDictionary dict{centers, false, false};

    Matrix X(1, 3);
    X << 0.0, 1.0, std::exp(1.0);
    const Matrix Z = thinplate_lift(X, dict);
    REQUIRE(Z.rows() == 1);
    CHECK(Z(0, 0) == 0.0);  // r = 0 by continuous extension
    CHECK(Z(0, 1) == 0.0);  // ln 1 = 0
    CHECK(Z(0, 2) == doctest::Approx(std::exp(2.0)).epsilon(1e-12));
}

TEST_CASE("thinplate_lift continuity at zero radius") {
    Matrix centers(2, 1);
    centers << 0.5, -0.5;
    RbfDictionary dict{centers, false, false};
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1e-4);
    for (int t = 0; t < 20; ++t) {
        const double r = u(rng);
        Matrix X(2, 1);
        X << 0.5 + r, -0.5;
        CHECK(std::abs(thinplate_lift(X, dict)(0, 0)) < 1e-6);
    }
}

TEST_CASE("thinplate_lift prepends constant and state rows") {
    Matrix centers(2, 3);
    centers.setRandom();
    RbfDictionary dict{centers, true, true};
    Matrix X(2, 4);
    X.setRandom();
    const Matrix Z = thinplate_lift(X, dict);
    REQUIRE(Z.rows() == 1 + 2 + 3);
    CHECK((Z.row(0).array() == 1.0).all());
    CHECK((Z.middleRows(1, 2) - X).norm() == 0.0);
}
