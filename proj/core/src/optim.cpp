#include "igpk/optim.hpp"

#include <cmath>

namespace igpk {

SgdOptimizer::SgdOptimizer(Eigen::Index dim, double lr, double momentum)
    : velocity_(Vector::Zero(dim)), lr_(lr), momentum_(momentum) {
    if (lr <= 0.0 || momentum < 0.0 || momentum >= 1.0) {
        throw InvalidConfig("SgdOptimizer: lr > 0 and momentum in [0,1) required");
    }
}

void SgdOptimizer::step(Vector& params, const Vector& grad) {
    if (params.size() != velocity_.size() || grad.size() != velocity_.size()) {
        throw DimensionMismatch("SgdOptimizer::step: dimension mismatch");
    }
    velocity_ = momentum_ * velocity_ - lr_ * grad;
    params += velocity_;
}

AdamOptimizer::AdamOptimizer(Eigen::Index dim, double lr, double beta1,
                             double beta2, double eps)
    : m_(Vector::Zero(dim)),
      v_(Vector::Zero(dim)),
      lr_(lr),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps) {
    if (lr <= 0.0 || eps <= 0.0) {
        throw InvalidConfig("AdamOptimizer: lr and eps must be positive");
    }
}

void AdamOptimizer::step(Vector& params, const Vector& grad) {
    if (params.size() != m_.size() || grad.size() != m_.size()) {
        throw DimensionMismatch("AdamOptimizer::step: dimension mismatch");
    }
    ++t_;
    m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
    v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    const Vector m_hat = m_ / bc1;
    const Vector v_hat = v_ / bc2;
    params.array() -= lr_ * m_hat.array() / (v_hat.array().sqrt() + eps_);
}

void clip_grad_norm(Vector& grad, double threshold) {
    const double n = grad.norm();
    if (n > threshold && n > 0.0) {
        grad *= threshold / n;
    }
}

}  // namespace igpk
