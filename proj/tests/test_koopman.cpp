#include <doctest.h>

#include <filesystem>
#include <random>

#include "igpk/koopman.hpp"
#include "igpk/serialize.hpp"

using namespace igpk;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
    std::normal_distribution<double> dist;
    return Matrix::NullaryExpr(r, c, [&] { return dist(rng); });
}

KernelHyperparams theta1d(double log_nv) {
    KernelHyperparams theta;
    theta.log_lengthscales = Vector::Zero(1);
    theta.log_signal_var = 0.0;
    theta.log_noise_var = log_nv;
    return theta;
}

}  // namespace

TEST_CASE("edmd_fit identity and scalar dynamics") {
    const Matrix I3 = Matrix::Identity(3, 3);
    auto [K, C] = edmd_fit(I3, I3, I3);
    CHECK((K - I3).norm() < 1e-12);

    std::mt19937_64 rng(2);
    const Matrix Phi = random_matrix(2, 8, rng);
    auto [K2, C2] = edmd_fit(Phi, 2.0 * Phi, Phi);
    // K acts as 2I on the row space of Phi
    CHECK((K2 * Phi - 2.0 * Phi).norm() < 1e-10);
}

TEST_CASE("edmd_fit recovers a linear system through an identity+constant dictionary") {
    std::mt19937_64 rng(4);
    Matrix A(2, 2);
    A << 0.9, 0.1, -0.2, 0.7;
    const Matrix X = random_matrix(2, 50, rng);
    const Matrix XPlus = A * X;

    Matrix Phi(3, 50), PhiPlus(3, 50);
    Phi.row(0).setOnes();
    Phi.bottomRows(2) = X;
    PhiPlus.row(0).setOnes();
    PhiPlus.bottomRows(2) = XPlus;

    auto [K, C] = edmd_fit(Phi, PhiPlus, X);
    CHECK((K.bottomRightCorner(2, 2) - A).norm() < 1e-10);
    // C recovers the linear readout
    CHECK((C * Phi - X).norm() < 1e-10);
}

TEST_CASE("edmd_fit residual is a least-squares minimum") {
    std::mt19937_64 rng(6);
    const Matrix Phi = random_matrix(3, 20, rng);
    const Matrix PhiPlus = random_matrix(3, 20, rng);
    auto [K, C] = edmd_fit(Phi, PhiPlus, random_matrix(2, 20, rng));
    const double base = (PhiPlus - K * Phi).norm();
    for (int t = 0; t < 20; ++t) {
        Matrix dK = random_matrix(3, 3, rng);
        dK *= 1e-3 / dK.norm();
        CHECK((PhiPlus - (K + dK) * Phi).norm() >= base - 1e-12);
    }
}

TEST_CASE("lift_initial with a GPO bank") {
    Matrix X0(1, 4);
    X0 << -1.0, 0.0, 1.0, 2.0;
    GpoBank bank;
    Matrix Z(2, 4);
    Z << 0.5, -0.3, 0.8, 0.1, 1.0, 2.0, -1.0, 0.4;
    for (int i = 0; i < 2; ++i) {
        bank.emplace_back(X0, Z.row(i).transpose(), theta1d(std::log(1e-12)));
    }
    KoopmanModel model{Matrix::Identity(2, 2), Matrix::Zero(1, 2), bank};

    // at a training input: mean ~ virtual targets, tiny variance
    auto s = lift_initial(model, X0.col(1));
    CHECK(std::abs(s.mean(0) - Z(0, 1)) < 1e-6);
    CHECK(std::abs(s.mean(1) - Z(1, 1)) < 1e-6);
    CHECK(s.cov(0, 0) < 1e-6);
    CHECK(s.cov(1, 1) < 1e-6);

    // far away: prior variance, diagonal covariance exactly
    Vector far(1);
    far << 50.0;
    auto sf = lift_initial(model, far);
    CHECK(sf.cov(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(sf.cov(0, 1) == 0.0);
    CHECK(sf.cov(1, 0) == 0.0);
}

TEST_CASE("lift_initial with a deterministic dictionary has zero covariance") {
    KoopmanModel model;
    model.K = Matrix::Identity(3, 3);
    model.C = Matrix::Zero(1, 3);
    model.observables = DictionarySpec{PolyDictionary{2, 1}};
    Vector x0(1);
    x0 << 2.0;
    const auto s = lift_initial(model, x0);
    CHECK(s.mean(0) == 1.0);
    CHECK(s.mean(1) == 2.0);
    CHECK(s.mean(2) == 4.0);
    CHECK(s.cov.norm() == 0.0);
}

TEST_CASE("propagate constant and geometric cases") {
    KoopmanModel model{Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                       DictionarySpec{PolyDictionary{1, 2}}};
    GaussianState init{Vector::Ones(2), Matrix::Identity(2, 2)};
    const auto rollout = propagate(model, init, 5);
    REQUIRE(rollout.size() == 6);
    for (const auto& step : rollout) {
        CHECK((step.original.mean - Vector::Ones(2)).norm() < 1e-14);
        CHECK((step.original.cov - Matrix::Identity(2, 2)).norm() < 1e-14);
    }

    KoopmanModel half{0.5 * Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                      DictionarySpec{PolyDictionary{1, 1}}};
    GaussianState s0{Vector::Ones(1), Matrix::Identity(1, 1)};
    const auto geo = propagate(half, s0, 3);
    CHECK(geo[0].lifted.cov(0, 0) == doctest::Approx(1.0));
    CHECK(geo[1].lifted.cov(0, 0) == doctest::Approx(0.25));
    CHECK(geo[2].lifted.cov(0, 0) == doctest::Approx(0.0625));
    CHECK(geo[3].lifted.cov(0, 0) == doctest::Approx(0.015625));
}

TEST_CASE("propagate matches a naive recursion oracle and stays PSD") {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 5; ++trial) {
        Matrix K = random_matrix(3, 3, rng);
        K *= 0.9 / std::abs(K.eigenvalues().cwiseAbs().maxCoeff());
        const Matrix C = random_matrix(2, 3, rng);
        const Matrix L = random_matrix(3, 3, rng);
        const Matrix V0 = L * L.transpose();
        KoopmanModel model{K, C, DictionarySpec{PolyDictionary{1, 3}}};

        GaussianState init{random_matrix(3, 1, rng), V0};
        const auto rollout = propagate(model, init, 30);

        Vector z = init.mean;
        Matrix V = V0;
        for (std::size_t k = 0; k < rollout.size(); ++k) {
            CHECK((rollout[k].lifted.mean - z).norm() < 1e-9);
            CHECK((rollout[k].lifted.cov - V).norm() < 1e-9 * std::max(1.0, V.norm()));
            CHECK((rollout[k].original.mean - C * z).norm() < 1e-9);
            const Eigen::SelfAdjointEigenSolver<Matrix> eig(rollout[k].original.cov);
            CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
            z = K * z;
            V = K * V * K.transpose();
            V = 0.5 * (V + V.transpose()).eval();
        }
    }
}

TEST_CASE("propagate with zero covariance reproduces the deterministic eDMD rollout") {
    std::mt19937_64 rng(14);
    Matrix X0(1, 1);
    X0 << 0.4;
    KoopmanModel model;
    model.observables = DictionarySpec{PolyDictionary{2, 1}};
    // fit a poly-eDMD model on scalar data x+ = 0.8x
    Matrix X = random_matrix(1, 30, rng);
    Matrix XPlus = 0.8 * X;
    const auto& dict = std::get<DictionarySpec>(model.observables);
    std::tie(model.K, model.C) =
        edmd_fit(dictionary_lift(dict, X), dictionary_lift(dict, XPlus), X);

    GaussianState s = lift_initial(model, X0.col(0));
    const auto rollout = propagate(model, s, 10);
    // deterministic rollout directly in the lifted space
    Vector z = dictionary_lift(dict, X0).col(0);
    for (const auto& step : rollout) {
        CHECK((step.original.mean - model.C * z).norm() < 1e-12);
        CHECK(step.original.cov.norm() == 0.0);
        z = model.K * z;
    }
}

TEST_CASE("model serialization round-trips bit-exactly") {
    std::mt19937_64 rng(42);
    const auto tmp = std::filesystem::temp_directory_path() / "igpk_model_test.json";

    // GPO-bank model
    Matrix X0 = random_matrix(2, 5, rng);
    GpoBank bank;
    for (int i = 0; i < 3; ++i) {
        KernelHyperparams theta;
        theta.log_lengthscales = random_matrix(2, 1, rng);
        theta.log_signal_var = 0.17;
        theta.log_noise_var = -4.2;
        bank.emplace_back(X0, random_matrix(5, 1, rng), theta);
    }
    KoopmanModel model{random_matrix(3, 3, rng), random_matrix(2, 3, rng), bank};
    save_model(model, tmp);
    const auto loaded = load_model(tmp);

    CHECK((loaded.K.array() == model.K.array()).all());
    CHECK((loaded.C.array() == model.C.array()).all());
    const auto& lbank = std::get<GpoBank>(loaded.observables);
    REQUIRE(lbank.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK((lbank[i].train_inputs().array() == X0.array()).all());
        CHECK((lbank[i].virtual_targets().array() ==
               bank[i].virtual_targets().array())
                  .all());
        CHECK(lbank[i].theta().log_signal_var == bank[i].theta().log_signal_var);
    }
    // identical predictions after reload
    Vector x0(2);
    x0 << 0.3, -0.4;
    const auto a = lift_initial(model, x0);
    const auto b = lift_initial(loaded, x0);
    CHECK((a.mean.array() == b.mean.array()).all());
    CHECK((a.cov.array() == b.cov.array()).all());

    // dictionary model
    KoopmanModel poly{Matrix::Identity(3, 3), Matrix::Zero(1, 3),
                      DictionarySpec{PolyDictionary{2, 1}}};
    save_model(poly, tmp);
    const auto loaded_poly = load_model(tmp);
    CHECK(std::get<PolyDictionary>(std::get<DictionarySpec>(loaded_poly.observables))
              .degree == 2);
    std::filesystem::remove(tmp);
}
