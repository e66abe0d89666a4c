#include "igpk/metrics.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace igpk {

namespace {

void check_lengths(const Matrix& truth, const Matrix& pred) {
    if (truth.rows() != pred.rows() || truth.cols() != pred.cols()) {
        throw DimensionMismatch("metrics: truth/prediction shape mismatch");
    }
    if (truth.cols() < 2) {
        throw DimensionMismatch("metrics: need at least 2 steps");
    }
}

// Normalization series: per-step Euclidean norm for vector states; the raw
// signed value for scalar states, where max - min needs no disambiguation.
Vector range_series(const Matrix& truth) {
    if (truth.rows() == 1) return truth.row(0).transpose();
    return truth.colwise().norm().transpose();
}

}  // namespace

double nrmse_pct(const Matrix& truth, const Matrix& pred_means) {
    check_lengths(truth, pred_means);
    const Vector norms = range_series(truth);
    const double range = norms.maxCoeff() - norms.minCoeff();
    if (range <= 0.0) throw DegenerateRange("nrmse_pct: zero ground-truth range");
    const double mse =
        (truth - pred_means).colwise().squaredNorm().mean();
    return std::sqrt(mse) / range * 100.0;
}

Vector nrmse_pct_per_dim(const Matrix& truth, const Matrix& pred_means) {
    check_lengths(truth, pred_means);
    Vector out(truth.rows());
    for (Eigen::Index d = 0; d < truth.rows(); ++d) {
        const double range = truth.row(d).maxCoeff() - truth.row(d).minCoeff();
        if (range <= 0.0) throw DegenerateRange("nrmse_pct_per_dim: zero range");
        const double mse = (truth.row(d) - pred_means.row(d)).array().square().mean();
        out(d) = std::sqrt(mse) / range * 100.0;
    }
    return out;
}

Vector cumulative_nrmse_pct(const Matrix& truth, const Matrix& pred_means,
                            bool truncated_range) {
    check_lengths(truth, pred_means);
    const Eigen::Index n = truth.cols();
    const Vector norms = range_series(truth);
    const double full_range = norms.maxCoeff() - norms.minCoeff();
    const Vector sq_err =
        (truth - pred_means).colwise().squaredNorm().transpose();

    Vector out(n);
    double acc = 0.0;
    double lo = norms(0), hi = norms(0);
    for (Eigen::Index k = 0; k < n; ++k) {
        acc += sq_err(k);
        lo = std::min(lo, norms(k));
        hi = std::max(hi, norms(k));
        const double range = truncated_range ? (hi - lo) : full_range;
        const double rmse = std::sqrt(acc / static_cast<double>(k + 1));
        out(k) = (range > 0.0) ? rmse / range * 100.0
                               : (rmse > 0.0 ? std::numeric_limits<double>::infinity()
                                             : 0.0);
    }
    return out;
}

double nlpd(const Matrix& truth, const RolloutPrediction& pred, double jitter) {
    if (pred.means.size() != pred.covs.size() ||
        truth.cols() != static_cast<Eigen::Index>(pred.means.size())) {
        throw DimensionMismatch("nlpd: length mismatch");
    }
    const Eigen::Index n_x = truth.rows();
    const double log2pi = std::log(2.0 * std::numbers::pi);
    double total = 0.0;
    for (std::size_t k = 0; k < pred.means.size(); ++k) {
        Matrix V = pred.covs[k];
        V.diagonal().array() += jitter;
        Eigen::LLT<Matrix> llt(V);
        if (llt.info() != Eigen::Success) {
            throw NotSpd("nlpd: covariance not positive definite after jitter");
        }
        const Vector e = truth.col(static_cast<Eigen::Index>(k)) - pred.means[k];
        const double quad = e.dot(llt.solve(e));
        const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
        total += 0.5 * (quad + logdet + static_cast<double>(n_x) * log2pi);
    }
    return total / static_cast<double>(pred.means.size());
}

std::vector<std::pair<double, double>> calibration_curve(
    const std::vector<Matrix>& truths, const std::vector<RolloutPrediction>& preds,
    const std::vector<double>& levels) {
    if (truths.size() != preds.size()) {
        throw DimensionMismatch("calibration_curve: trajectory count mismatch");
    }
    std::vector<std::pair<double, double>> out;
    out.reserve(levels.size());
    for (const double p : levels) {
        if (p <= 0.0 || p >= 1.0) {
            throw InvalidConfig("calibration_curve: levels must be in (0,1)");
        }
        const double z = normal_quantile(0.5 * (1.0 + p));
        std::size_t inside = 0, total = 0;
        for (std::size_t t = 0; t < truths.size(); ++t) {
            const Matrix& truth = truths[t];
            const auto& pred = preds[t];
            for (std::size_t k = 0; k < pred.means.size(); ++k) {
                for (Eigen::Index d = 0; d < truth.rows(); ++d) {
                    const double half =
                        z * std::sqrt(std::max(0.0, pred.covs[k](d, d)));
                    const double err = std::abs(
                        truth(d, static_cast<Eigen::Index>(k)) - pred.means[k](d));
                    if (err <= half) ++inside;  // closed interval
                    ++total;
                }
            }
        }
        out.emplace_back(p, total ? static_cast<double>(inside) /
                                        static_cast<double>(total)
                                  : 0.0);
    }
    return out;
}

std::pair<double, double> summarize(const std::vector<double>& values) {
    if (values.empty()) throw EmptyInput("summarize: empty input");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    if (values.size() == 1) return {mean, 0.0};
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

double normal_quantile(double p) {
    if (p <= 0.0 || p >= 1.0) throw InvalidConfig("normal_quantile: p in (0,1)");
    // Acklam's rational approximation, then one Halley refinement.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // Halley step against the exact CDF
    const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

}  // namespace igpk
