#include <benchmark/benchmark.h>

#include <random>

#include "igpk/train.hpp"

using namespace igpk;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
    std::normal_distribution<double> dist;
    return Matrix::NullaryExpr(r, c, [&] { return dist(rng); });
}

KernelHyperparams default_theta(int n_x) {
    KernelHyperparams theta;
    theta.log_lengthscales = Vector::Zero(n_x);
    theta.log_noise_var = std::log(1e-2);
    return theta;
}

void bm_gram(benchmark::State& state) {
    const auto n = static_cast<Eigen::Index>(state.range(0));
    std::mt19937_64 rng(1);
    const Matrix X = random_matrix(2, n, rng);
    const auto theta = default_theta(2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(gram(X, X, theta));
    }
    state.SetComplexityN(state.range(0));
}

void bm_cholesky_solve(benchmark::State& state) {
    const auto n = static_cast<Eigen::Index>(state.range(0));
    std::mt19937_64 rng(2);
    const Matrix X = random_matrix(2, n, rng);
    const auto theta = default_theta(2);
    Matrix A = gram(X, X, theta);
    A.diagonal().array() += theta.noise_var();
    const Matrix B = random_matrix(n, 4, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(cholesky_solve(A, B));
    }
    state.SetComplexityN(state.range(0));
}

void bm_l1_cost_and_grad(benchmark::State& state) {
    const int n_T = static_cast<int>(state.range(0));
    const int n_z = 10, N = 20;
    std::mt19937_64 rng(3);
    TrajectoryDataset data;
    data.n_x = 2;
    data.n_T = n_T;
    data.N = N;
    data.X0 = random_matrix(2, n_T, rng);
    data.X = random_matrix(2, static_cast<Eigen::Index>(N) * n_T, rng);
    data.XPlus = random_matrix(2, static_cast<Eigen::Index>(N) * n_T, rng);
    std::vector<KernelHyperparams> thetas(n_z, default_theta(2));
    const LiftedOperatorBank bank(thetas, data.X0, data.X, data.XPlus);
    const Matrix Z = random_matrix(n_z, n_T, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(bank.cost_and_grad(Z, data.X, 1e-8));
    }
    state.SetComplexityN(state.range(0));
}

void bm_rollout(benchmark::State& state) {
    const int steps = static_cast<int>(state.range(0));
    const int n_z = 20, n_x = 2;
    std::mt19937_64 rng(4);
    Matrix K = random_matrix(n_z, n_z, rng);
    K *= 0.95 / K.eigenvalues().cwiseAbs().maxCoeff();
    const Matrix C = random_matrix(n_x, n_z, rng);
    const Matrix L = random_matrix(n_z, n_z, rng);
    const KoopmanModel model{K, C, DictionarySpec{PolyDictionary{1, n_x}}};
    const GaussianState init{random_matrix(n_z, 1, rng), L * L.transpose()};
    for (auto _ : state) {
        benchmark::DoNotOptimize(propagate(model, init, steps));
    }
    state.SetComplexityN(state.range(0));
}

BENCHMARK(bm_gram)->RangeMultiplier(2)->Range(64, 1024)->Complexity();
BENCHMARK(bm_cholesky_solve)->RangeMultiplier(2)->Range(64, 512)->Complexity();
BENCHMARK(bm_l1_cost_and_grad)->RangeMultiplier(2)->Range(16, 128)->Complexity();
BENCHMARK(bm_rollout)->RangeMultiplier(2)->Range(25, 400)->Complexity();

}  // namespace

BENCHMARK_MAIN();
