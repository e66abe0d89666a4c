#pragma once

#include <utility>
#include <vector>

#include "igpk/numerics.hpp"

namespace igpk {

/// One probabilistic open-loop rollout in the original state space: means
/// and covariances for steps 0..N.
struct RolloutPrediction {
    std::vector<Vector> means;
    std::vector<Matrix> covs;

    std::size_t length() const { return means.size(); }
};

/// RMSE of the state-error norm over steps 0..N, normalized by the range of
/// the ground-truth per-step Euclidean norm (the raw signed value for scalar
/// states), as a percentage.
double nrmse_pct(const Matrix& truth, const Matrix& pred_means);

/// Per-dimension variant: each dimension normalized by its own range.
Vector nrmse_pct_per_dim(const Matrix& truth, const Matrix& pred_means);

/// Cumulative %-NRMSE up to each step k. With truncated_range the
/// normalization uses the range over steps 0..k, otherwise the full range.
Vector cumulative_nrmse_pct(const Matrix& truth, const Matrix& pred_means,
                            bool truncated_range = true);

/// Mean over steps of the negative Gaussian log-density of the truth under
/// the predictive distribution, with jitter added to each covariance.
double nlpd(const Matrix& truth, const RolloutPrediction& pred,
            double jitter = 1e-9);

/// Central-interval empirical coverage pooled over dimensions, steps and
/// trajectories, one (nominal, empirical) pair per requested level.
std::vector<std::pair<double, double>> calibration_curve(
    const std::vector<Matrix>& truths, const std::vector<RolloutPrediction>& preds,
    const std::vector<double>& levels);

/// (mean, sample standard deviation); std is 0 by convention for n = 1.
std::pair<double, double> summarize(const std::vector<double>& values);

/// Quantile of the standard normal distribution.
double normal_quantile(double p);

}  // namespace igpk
