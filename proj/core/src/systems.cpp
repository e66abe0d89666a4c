#include "igpk/systems.hpp"

#include <cmath>
#include <random>

#include "igpk/rng.hpp"

namespace igpk {

Matrix TrajectoryDataset::trajectory(int j) const {
    if (j < 0 || j >= n_T) throw DimensionMismatch("trajectory: index out of range");
    Matrix T(n_x, N + 1);
    T.leftCols(N) = X.middleCols(static_cast<Eigen::Index>(j) * N, N);
    T.col(N) = XPlus.col(static_cast<Eigen::Index>(j) * N + N - 1);
    return T;
}

std::string noise_kind_name(NoiseKind k) {
    switch (k) {
        case NoiseKind::none: return "none";
        case NoiseKind::gaussian: return "gaussian";
        case NoiseKind::uniform: return "uniform";
    }
    return "none";
}

NoiseKind noise_kind_from_name(const std::string& name) {
    if (name == "none") return NoiseKind::none;
    if (name == "gaussian") return NoiseKind::gaussian;
    if (name == "uniform") return NoiseKind::uniform;
    throw InvalidConfig("unknown noise kind: " + name);
}

double scalar_map_step(double x) {
    return -x + 3.0 / (1.0 + x * x) + 0.5 * std::sin(2.0 * x);
}

Vector predator_prey_rhs(const Vector& state, const PredatorPreyParams& p) {
    if (state.size() != 2) throw DimensionMismatch("predator_prey_rhs: need [P, Q]");
    const double P = state(0);
    const double Q = state(1);
    const double predation = p.a * P * P / (1.0 + p.h * std::pow(P, p.n)) * Q;
    Vector d(2);
    d(0) = p.r * P * (1.0 - P / p.K_cap) - predation;
    d(1) = p.eta * predation - p.d * Q;
    return d;
}

Vector rk4_step(const RhsFn& rhs, const Vector& state, double dt) {
    if (dt <= 0.0) throw InvalidConfig("rk4_step: dt must be positive");
    const Vector k1 = rhs(state);
    const Vector k2 = rhs(state + 0.5 * dt * k1);
    const Vector k3 = rhs(state + 0.5 * dt * k2);
    const Vector k4 = rhs(state + dt * k3);
    return state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

StepFn make_scalar_map_stepper() {
    return [](const Vector& x) {
        Vector out(1);
        out(0) = scalar_map_step(x(0));
        return out;
    };
}

StepFn make_predator_prey_stepper(const PredatorPreyParams& params, double dt) {
    return [params, dt](const Vector& x) {
        return rk4_step([&params](const Vector& s) { return predator_prey_rhs(s, params); },
                        x, dt);
    };
}

Matrix sample_initial_conditions(const std::vector<std::pair<double, double>>& bounds,
                                 int n_T, std::uint64_t seed) {
    const auto n_x = static_cast<Eigen::Index>(bounds.size());
    if (n_x == 0 || n_T < 1) throw InvalidConfig("sample_initial_conditions: empty spec");
    for (const auto& [lo, hi] : bounds) {
        if (lo > hi) throw InvalidConfig("sample_initial_conditions: lo > hi");
    }
    std::mt19937_64 rng(seed);
    Matrix X0(n_x, n_T);
    for (int j = 0; j < n_T; ++j) {
        for (Eigen::Index d = 0; d < n_x; ++d) {
            const auto& [lo, hi] = bounds[static_cast<std::size_t>(d)];
            X0(d, j) = lo + (hi - lo) * uniform01(rng);
        }
    }
    return X0;
}

TrajectoryDataset simulate(const StepFn& step, const Matrix& X0_cols, int N) {
    if (N < 1) throw InvalidConfig("simulate: N must be >= 1");
    require_finite(X0_cols, "simulate");
    TrajectoryDataset data;
    data.n_x = static_cast<int>(X0_cols.rows());
    data.n_T = static_cast<int>(X0_cols.cols());
    data.N = N;
    data.X0 = X0_cols;
    data.X.resize(data.n_x, static_cast<Eigen::Index>(N) * data.n_T);
    data.XPlus.resize(data.n_x, static_cast<Eigen::Index>(N) * data.n_T);

    for (int j = 0; j < data.n_T; ++j) {
        Vector x = X0_cols.col(j);
        for (int k = 0; k < N; ++k) {
            data.X.col(static_cast<Eigen::Index>(j) * N + k) = x;
            x = step(x);
            if (!x.allFinite() || x.cwiseAbs().maxCoeff() > 1e12) {
                throw NonFiniteTrajectory("simulate: trajectory left finite range");
            }
            data.XPlus.col(static_cast<Eigen::Index>(j) * N + k) = x;
        }
    }
    return data;
}

TrajectoryDataset add_noise(const TrajectoryDataset& data, const NoiseSpec& spec) {
    if (spec.intensity_pct < 0.0) throw InvalidConfig("add_noise: negative intensity");
    if (spec.kind == NoiseKind::none || spec.intensity_pct == 0.0) return data;

    // per-dimension scale from the clean X
    Vector s(data.n_x);
    for (int d = 0; d < data.n_x; ++d) {
        const auto row = data.X.row(d);
        const double mean = row.mean();
        const double var = (row.array() - mean).square().sum() /
                           static_cast<double>(row.size() - 1);
        s(d) = std::sqrt(var);
    }
    const Vector sigma = (spec.intensity_pct / 100.0) * s;

    TrajectoryDataset out = data;
    const int N = data.N;
    for (int j = 0; j < data.n_T; ++j) {
        std::mt19937_64 rng(spec.seed ^ static_cast<std::uint64_t>(j));
        // one perturbation per underlying snapshot (steps 0..N)
        Matrix noise(data.n_x, N + 1);
        for (int k = 0; k <= N; ++k) {
            for (int d = 0; d < data.n_x; ++d) {
                if (spec.kind == NoiseKind::gaussian) {
                    noise(d, k) = sigma(d) * gaussian01(rng);
                } else {
                    const double w = std::sqrt(3.0) * sigma(d);
                    noise(d, k) = w * (2.0 * uniform01(rng) - 1.0);
                }
            }
        }
        out.X0.col(j) += noise.col(0);
        for (int k = 0; k < N; ++k) {
            out.X.col(static_cast<Eigen::Index>(j) * N + k) += noise.col(k);
            out.XPlus.col(static_cast<Eigen::Index>(j) * N + k) += noise.col(k + 1);
        }
    }
    return out;
}

}  // namespace igpk
