#include <doctest.h>

#include <cmath>
#include <random>

#include "igpk/metrics.hpp"
#include "igpk/train.hpp"

using namespace igpk;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
    std::normal_distribution<double> dist;
    return Matrix::NullaryExpr(r, c, [&] { return dist(rng); });
}

std::vector<KernelHyperparams> random_thetas(int n_z, int n_x,
                                             std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    std::vector<KernelHyperparams> thetas;
    for (int i = 0; i < n_z; ++i) {
        KernelHyperparams theta;
        theta.log_lengthscales = Vector::NullaryExpr(n_x, [&] { return u(rng); });
        theta.log_signal_var = u(rng);
        theta.log_noise_var = u(rng) + std::log(1e-2);
        thetas.push_back(std::move(theta));
    }
    return thetas;
}

TrajectoryDataset random_dataset(int n_x, int n_T, int N, std::mt19937_64& rng) {
    TrajectoryDataset data;
    data.n_x = n_x;
    data.n_T = n_T;
    data.N = N;
    data.X0 = random_matrix(n_x, n_T, rng);
    data.X = random_matrix(n_x, static_cast<Eigen::Index>(N) * n_T, rng);
    data.XPlus = random_matrix(n_x, static_cast<Eigen::Index>(N) * n_T, rng);
    for (int j = 0; j < n_T; ++j) {
        data.X.col(static_cast<Eigen::Index>(j) * N) = data.X0.col(j);
    }
    return data;
}

TrajectoryDataset linear_scalar_dataset(double a, int n_T, int N,
                                        std::uint64_t seed) {
    const Matrix X0 = sample_initial_conditions({{-2.0, 2.0}}, n_T, seed);
    auto step = [a](const Vector& x) { return (a * x).eval(); };
    return simulate(step, X0, N);
}

}  // namespace

TEST_CASE("build_lifted_matrices interpolates the virtual targets at the ICs") {
    std::mt19937_64 rng(3);
    const int n_z = 3, n_T = 6;
    const Matrix X0 = random_matrix(2, n_T, rng);
    // X starts with a copy of the initial conditions
    Matrix X(2, n_T + 4);
    X.leftCols(n_T) = X0;
    X.rightCols(4) = random_matrix(2, 4, rng);
    const Matrix XPlus = random_matrix(2, n_T + 4, rng);

    std::vector<KernelHyperparams> thetas;
    for (int i = 0; i < n_z; ++i) {
        KernelHyperparams theta;
        theta.log_lengthscales = Vector::Zero(2);
        theta.log_signal_var = 0.0;
        theta.log_noise_var = std::log(1e-10);
        thetas.push_back(theta);
    }
    const Matrix Z = random_matrix(n_z, n_T, rng);
    const auto [Phi, PhiPlus] = build_lifted_matrices(Z, thetas, X0, X, XPlus);
    REQUIRE(Phi.rows() == n_z);
    REQUIRE(Phi.cols() == n_T + 4);
    CHECK((Phi.leftCols(n_T) - Z).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("build_lifted_matrices rows match the GP posterior mean") {
    std::mt19937_64 rng(9);
    const int n_z = 3, n_T = 5, M = 12;
    const Matrix X0 = random_matrix(2, n_T, rng);
    const Matrix X = random_matrix(2, M, rng);
    const Matrix XPlus = random_matrix(2, M, rng);
    const auto thetas = random_thetas(n_z, 2, rng);
    const Matrix Z = random_matrix(n_z, n_T, rng);

    const auto [Phi, PhiPlus] = build_lifted_matrices(Z, thetas, X0, X, XPlus);
    for (int i = 0; i < n_z; ++i) {
        GPObservable gpo(X0, Z.row(i).transpose(),
                         thetas[static_cast<std::size_t>(i)]);
        CHECK((Phi.row(i) - gpo.posterior_mean(X)).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((PhiPlus.row(i) - gpo.posterior_mean(XPlus)).cwiseAbs().maxCoeff() <
              1e-10);
    }
}

TEST_CASE("l1_cost at Z = 0 reduces to the data norm term") {
    std::mt19937_64 rng(15);
    const int n_z = 4;
    const auto data = random_dataset(2, 4, 3, rng);
    const auto thetas = random_thetas(n_z, 2, rng);
    const Matrix Z = Matrix::Zero(n_z, data.n_T);
    const double expected =
        data.X.squaredNorm() /
        (static_cast<double>(n_z) * static_cast<double>(data.X.cols()));
    CHECK(l1_cost(Z, thetas, data, 1e-8) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("l1_cost matches a dense-inverse ridge oracle") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 8; ++trial) {
        const int n_z = 2 + trial % 3;
        const auto data = random_dataset(1 + trial % 2, 4, 5, rng);
        const auto thetas = random_thetas(n_z, data.n_x, rng);
        const Matrix Z = random_matrix(n_z, data.n_T, rng);
        const double lambda = 1e-6;

        const auto [Phi, PhiPlus] =
            build_lifted_matrices(Z, thetas, data.X0, data.X, data.XPlus);
        const Matrix G =
            Phi * Phi.transpose() + lambda * Matrix::Identity(n_z, n_z);
        const Matrix Ginv = G.inverse();
        const Matrix Kfit = PhiPlus * Phi.transpose() * Ginv;
        const Matrix Cfit = data.X * Phi.transpose() * Ginv;
        const double c = static_cast<double>(n_z) * static_cast<double>(Phi.cols());
        const double expected = ((PhiPlus - Kfit * Phi).squaredNorm() +
                                 (data.X - Cfit * Phi).squaredNorm()) /
                                c;
        CHECK(l1_cost(Z, thetas, data, lambda) ==
              doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("l1_cost approaches the exact pseudo-inverse objective as lambda -> 0") {
    std::mt19937_64 rng(27);
    const int n_z = 3;
    const auto data = random_dataset(2, 5, 6, rng);
    const auto thetas = random_thetas(n_z, 2, rng);
    const Matrix Z = random_matrix(n_z, data.n_T, rng);

    const auto [Phi, PhiPlus] =
        build_lifted_matrices(Z, thetas, data.X0, data.X, data.XPlus);
    const Matrix PhiPinv = pinv_svd(Phi);
    const Matrix Kstar = PhiPlus * PhiPinv;
    const Matrix Cstar = data.X * PhiPinv;
    const double c = static_cast<double>(n_z) * static_cast<double>(Phi.cols());
    const double exact = ((PhiPlus - Kstar * Phi).squaredNorm() +
                          (data.X - Cstar * Phi).squaredNorm()) /
                         c;
    CHECK(std::abs(l1_cost(Z, thetas, data, 1e-8) - exact) <
          1e-5 * std::max(1.0, exact));
}

TEST_CASE("l1_grad_z matches central finite differences") {
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<int> pick_nz(1, 4), pick_nT(2, 5), pick_N(2, 10),
        pick_nx(1, 2);
    const double h = 1e-6;
    for (int trial = 0; trial < 20; ++trial) {
        const int n_z = pick_nz(rng);
        const auto data = random_dataset(pick_nx(rng), pick_nT(rng), pick_N(rng), rng);
        const auto thetas = random_thetas(n_z, data.n_x, rng);
        const Matrix Z = random_matrix(n_z, data.n_T, rng);
        const double lambda = 1e-8;

        const Matrix g = l1_grad_z(Z, thetas, data, lambda);
        Matrix g_fd(Z.rows(), Z.cols());
        for (Eigen::Index i = 0; i < Z.rows(); ++i) {
            for (Eigen::Index j = 0; j < Z.cols(); ++j) {
                Matrix lo = Z, hi = Z;
                lo(i, j) -= h;
                hi(i, j) += h;
                g_fd(i, j) = (l1_cost(hi, thetas, data, lambda) -
                              l1_cost(lo, thetas, data, lambda)) /
                             (2.0 * h);
            }
        }
        const double rel = (g - g_fd).norm() / std::max(g_fd.norm(), 1e-10);
        CHECK(rel < 1e-4);
    }
}

TEST_CASE("l1 directional derivative agrees with the gradient") {
    std::mt19937_64 rng(55);
    const int n_z = 3;
    const auto data = random_dataset(2, 4, 6, rng);
    const auto thetas = random_thetas(n_z, 2, rng);
    const Matrix Z = random_matrix(n_z, data.n_T, rng);
    const Matrix D = random_matrix(n_z, data.n_T, rng);
    const double lambda = 1e-8;
    const double h = 1e-6;

    const Matrix g = l1_grad_z(Z, thetas, data, lambda);
    const double fd = (l1_cost(Z + h * D, thetas, data, lambda) -
                       l1_cost(Z - h * D, thetas, data, lambda)) /
                      (2.0 * h);
    const double dot = (g.array() * D.array()).sum();
    CHECK(dot == doctest::Approx(fd).epsilon(1e-5));
}

TEST_CASE("l1 cost and gradient are equivariant under observable permutation") {
    std::mt19937_64 rng(61);
    const int n_z = 4;
    const auto data = random_dataset(2, 5, 4, rng);
    const auto thetas = random_thetas(n_z, 2, rng);
    const Matrix Z = random_matrix(n_z, data.n_T, rng);

    std::vector<int> perm{2, 0, 3, 1};
    std::vector<KernelHyperparams> thetas_p;
    Matrix Z_p(n_z, data.n_T);
    for (int i = 0; i < n_z; ++i) {
        thetas_p.push_back(thetas[static_cast<std::size_t>(perm[i])]);
        Z_p.row(i) = Z.row(perm[i]);
    }

    CHECK(l1_cost(Z, thetas, data, 1e-8) ==
          doctest::Approx(l1_cost(Z_p, thetas_p, data, 1e-8)).epsilon(1e-12));
    const Matrix g = l1_grad_z(Z, thetas, data, 1e-8);
    const Matrix g_p = l1_grad_z(Z_p, thetas_p, data, 1e-8);
    for (int i = 0; i < n_z; ++i) {
        CHECK((g_p.row(i) - g.row(perm[i])).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("mini-batch cost and gradient agree with the full batch on all columns") {
    std::mt19937_64 rng(71);
    const int n_z = 3;
    const auto data = random_dataset(2, 4, 5, rng);
    const auto thetas = random_thetas(n_z, 2, rng);
    const Matrix Z = random_matrix(n_z, data.n_T, rng);

    LiftedOperatorBank bank(thetas, data.X0, data.X, data.XPlus);
    std::vector<Eigen::Index> all(static_cast<std::size_t>(data.X.cols()));
    for (std::size_t j = 0; j < all.size(); ++j) all[j] = static_cast<Eigen::Index>(j);

    const auto [c_full, g_full] = bank.cost_and_grad(Z, data.X, 1e-8);
    const auto [c_batch, g_batch] = bank.cost_and_grad(Z, data.X, 1e-8, all);
    CHECK(c_batch == doctest::Approx(c_full).epsilon(1e-13));
    CHECK((g_batch - g_full).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("stage 1 with zero iterations returns the initialization") {
    std::mt19937_64 rng(81);
    const auto data = random_dataset(1, 4, 3, rng);
    IgpkConfig config;
    config.n_z = 3;
    config.stage1_iters = 0;
    config.seed = 5;
    const auto thetas = init_hyperparams(config, data);
    const auto result = optimize_virtual_targets(config, thetas, data);
    const Matrix Z0 = init_virtual_targets(config, data);
    CHECK((result.Z_star.array() == Z0.array()).all());
    CHECK(result.trace.empty());
}

TEST_CASE("stage 1 reduces the cost and keeps a finite trace") {
    const auto data = linear_scalar_dataset(0.9, 8, 6, 3);
    IgpkConfig config;
    config.n_z = 4;
    config.stage1_iters = 120;
    config.seed = 11;
    const auto thetas = init_hyperparams(config, data);
    const auto result = optimize_virtual_targets(config, thetas, data);
    REQUIRE(result.trace.size() == 120);

    const double init_cost =
        l1_cost(init_virtual_targets(config, data), thetas, data, config.ridge_lambda);
    const double best_cost =
        l1_cost(result.Z_star, thetas, data, config.ridge_lambda);
    CHECK(best_cost < init_cost);
    for (const auto& row : result.trace) {
        CHECK(std::isfinite(row.cost));
        CHECK(std::isfinite(row.grad_norm));
        CHECK(row.wall_time_s >= 0.0);
        CHECK(best_cost <= row.cost + 1e-12);  // returned iterate is the best seen
    }
}

TEST_CASE("stage 1 mini-batching still reduces the full cost") {
    const auto data = linear_scalar_dataset(0.9, 8, 6, 4);
    IgpkConfig config;
    config.n_z = 4;
    config.stage1_iters = 150;
    config.batch_size = 8;
    config.sgd_lr = 5e-3;
    config.seed = 13;
    const auto thetas = init_hyperparams(config, data);
    const auto result = optimize_virtual_targets(config, thetas, data);
    const double init_cost =
        l1_cost(init_virtual_targets(config, data), thetas, data, config.ridge_lambda);
    CHECK(l1_cost(result.Z_star, thetas, data, config.ridge_lambda) < init_cost);
}

TEST_CASE("stage 2 with zero iterations is a no-op") {
    std::mt19937_64 rng(91);
    const auto thetas = random_thetas(3, 1, rng);
    const Matrix X0 = random_matrix(1, 5, rng);
    const Matrix Z = random_matrix(3, 5, rng);
    IgpkConfig config;
    config.stage2_iters = 0;
    const auto out = optimize_hyperparameters(config, Z, X0, thetas);
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        CHECK((out[i].pack().array() == thetas[i].pack().array()).all());
    }
}

TEST_CASE("stage 2 never returns a worse marginal likelihood than the start") {
    std::mt19937_64 rng(95);
    const auto thetas = random_thetas(4, 2, rng);
    const Matrix X0 = random_matrix(2, 10, rng);
    const Matrix Z = random_matrix(4, 10, rng);
    IgpkConfig config;
    config.stage2_iters = 150;
    const auto out = optimize_hyperparameters(config, Z, X0, thetas);
    for (int i = 0; i < 4; ++i) {
        const Vector z = Z.row(i).transpose();
        CHECK(nlml(out[static_cast<std::size_t>(i)], X0, z) <=
              nlml(thetas[static_cast<std::size_t>(i)], X0, z) + 1e-10);
    }
}

TEST_CASE("stage 2 recovers a known lengthscale within a factor of two") {
    // draw targets from a GP with lengthscale 0.5 and near-zero noise
    std::mt19937_64 rng(123);
    const int n_T = 40;
    Matrix X0(1, n_T);
    for (int j = 0; j < n_T; ++j) {
        X0(0, j) = -2.0 + 4.0 * j / (n_T - 1);
    }
    KernelHyperparams truth;
    truth.log_lengthscales = Vector::Constant(1, std::log(0.5));
    truth.log_signal_var = 0.0;
    truth.log_noise_var = std::log(1e-6);
    Matrix K = gram(X0, X0, truth);
    K.diagonal().array() += 1e-8;
    const Eigen::LLT<Matrix> llt(K);
    std::normal_distribution<double> dist;
    const Vector eps = Vector::NullaryExpr(n_T, [&] { return dist(rng); });
    const Vector z = llt.matrixL() * eps;

    KernelHyperparams init;
    init.log_lengthscales = Vector::Zero(1);  // start at lengthscale 1
    init.log_signal_var = 0.0;
    init.log_noise_var = std::log(1e-2);
    IgpkConfig config;
    config.stage2_iters = 600;
    config.adam_lr = 2e-2;
    Matrix Z(1, n_T);
    Z.row(0) = z.transpose();
    const auto out = optimize_hyperparameters(config, Z, X0, {init});
    const double ls = std::exp(out[0].log_lengthscales(0));
    CHECK(ls > 0.25);
    CHECK(ls < 1.0);
}

TEST_CASE("train_igpk learns a linear scalar system") {
    const auto data = linear_scalar_dataset(0.9, 12, 8, 17);
    IgpkConfig config;
    config.n_z = 4;
    config.stage1_iters = 300;
    config.stage2_iters = 150;
    config.warm_start_identity = true;
    config.seed = 17;
    const auto result = train_igpk(config, data);
    CHECK(std::isfinite(result.final_cost));

    // held-out rollout accuracy
    Vector x0(1);
    x0 << 1.37;
    const int N = 12;
    const auto rollout = propagate(result.model, lift_initial(result.model, x0), N);
    Matrix truth(1, N + 1), pred(1, N + 1);
    double x = x0(0);
    for (int k = 0; k <= N; ++k) {
        truth(0, k) = x;
        pred(0, k) = rollout[static_cast<std::size_t>(k)].original.mean(0);
        x *= 0.9;
    }
    CHECK(nrmse_pct(truth, pred) < 1.0);
}

TEST_CASE("train_igpk is deterministic per seed") {
    const auto data = linear_scalar_dataset(0.8, 6, 5, 23);
    IgpkConfig config;
    config.n_z = 3;
    config.stage1_iters = 40;
    config.stage2_iters = 30;
    config.seed = 99;
    const auto a = train_igpk(config, data);
    const auto b = train_igpk(config, data);
    CHECK((a.model.K.array() == b.model.K.array()).all());
    CHECK((a.model.C.array() == b.model.C.array()).all());
    const auto& bank_a = std::get<GpoBank>(a.model.observables);
    const auto& bank_b = std::get<GpoBank>(b.model.observables);
    for (std::size_t i = 0; i < bank_a.size(); ++i) {
        CHECK((bank_a[i].virtual_targets().array() ==
               bank_b[i].virtual_targets().array())
                  .all());
        CHECK((bank_a[i].theta().pack().array() ==
               bank_b[i].theta().pack().array())
                  .all());
    }
}

TEST_CASE("train_igpk operators satisfy the least-squares normal equations") {
    const auto data = linear_scalar_dataset(0.9, 8, 6, 31);
    IgpkConfig config;
    config.n_z = 3;
    config.stage1_iters = 80;
    config.stage2_iters = 60;
    config.seed = 7;
    const auto result = train_igpk(config, data);
    const auto& bank = std::get<GpoBank>(result.model.observables);

    Matrix Phi(config.n_z, data.X.cols()), PhiPlus(config.n_z, data.X.cols());
    for (int i = 0; i < config.n_z; ++i) {
        Phi.row(i) = bank[static_cast<std::size_t>(i)].posterior_mean(data.X);
        PhiPlus.row(i) = bank[static_cast<std::size_t>(i)].posterior_mean(data.XPlus);
    }
    const Matrix rK = (PhiPlus - result.model.K * Phi) * Phi.transpose();
    const Matrix rC = (data.X - result.model.C * Phi) * Phi.transpose();
    CHECK(rK.cwiseAbs().maxCoeff() < 1e-6 * std::max(1.0, PhiPlus.norm()));
    CHECK(rC.cwiseAbs().maxCoeff() < 1e-6 * std::max(1.0, data.X.norm()));
}

TEST_CASE("train_igpk input validation") {
    TrajectoryDataset empty;
    IgpkConfig config;
    CHECK_THROWS_AS(train_igpk(config, empty), InvalidConfig);
    config.n_z = 0;
    CHECK_THROWS_AS(train_igpk(config, empty), InvalidConfig);
}
