#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "igpk/numerics.hpp"

namespace igpk {

/// Snapshot matrices per trajectory-stacked layout: X holds steps 0..N-1 of
/// every trajectory, XPlus the corresponding successors, X0 the initial
/// conditions (first column of each trajectory block).
struct TrajectoryDataset {
    Matrix X0;     // n_x x n_T
    Matrix X;      // n_x x (N * n_T)
    Matrix XPlus;  // n_x x (N * n_T)
    int n_x = 0;
    int n_T = 0;
    int N = 0;

    /// Full snapshot sequence (steps 0..N) of trajectory j, n_x x (N+1).
    Matrix trajectory(int j) const;
};

struct PredatorPreyParams {
    double r = 1.0;
    double K_cap = 5.0;
    double a = 1.0;
    double h = 1.0;
    double n = 2.0;
    double eta = 0.5;
    double d = 0.3;
};

enum class NoiseKind { none, gaussian, uniform };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::none;
    double intensity_pct = 0.0;
    std::uint64_t seed = 0;
};

std::string noise_kind_name(NoiseKind k);
NoiseKind noise_kind_from_name(const std::string& name);

/// x+ = -x + 3/(1 + x^2) + 1/2 sin(2x)
double scalar_map_step(double x);

/// Inhibited-predation Lotka-Volterra right-hand side.
Vector predator_prey_rhs(const Vector& state, const PredatorPreyParams& params);

using RhsFn = std::function<Vector(const Vector&)>;
using StepFn = std::function<Vector(const Vector&)>;

/// Classical 4-stage Runge-Kutta update.
Vector rk4_step(const RhsFn& rhs, const Vector& state, double dt);

StepFn make_scalar_map_stepper();
StepFn make_predator_prey_stepper(const PredatorPreyParams& params, double dt);

/// I.i.d. uniform columns within per-dimension bounds, deterministic per seed.
Matrix sample_initial_conditions(const std::vector<std::pair<double, double>>& bounds,
                                 int n_T, std::uint64_t seed);

/// Rolls each initial condition forward N steps and assembles the
/// time-shifted snapshot matrices.
TrajectoryDataset simulate(const StepFn& step, const Matrix& X0_cols, int N);

/// Perturbs every underlying snapshot once; X0, X, XPlus reuse the perturbed
/// snapshots wherever a snapshot appears. Intensity is a percentage of the
/// per-dimension clean-signal standard deviation, variance-matched between
/// gaussian and uniform kinds.
TrajectoryDataset add_noise(const TrajectoryDataset& data, const NoiseSpec& spec);

}  // namespace igpk
