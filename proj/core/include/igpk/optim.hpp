#pragma once

#include "igpk/numerics.hpp"

namespace igpk {

/// Momentum SGD: v <- momentum * v - lr * grad; p <- p + v.
class SgdOptimizer {
public:
    SgdOptimizer(Eigen::Index dim, double lr = 1e-2, double momentum = 0.9);

    void step(Vector& params, const Vector& grad);

    const Vector& velocity() const { return velocity_; }
    double lr() const { return lr_; }

private:
    Vector velocity_;
    double lr_;
    double momentum_;
};

/// Adam with bias correction, per Kingma & Ba defaults.
class AdamOptimizer {
public:
    AdamOptimizer(Eigen::Index dim, double lr = 1e-2, double beta1 = 0.9,
                  double beta2 = 0.999, double eps = 1e-8);

    void step(Vector& params, const Vector& grad);

    long t() const { return t_; }

private:
    Vector m_, v_;
    long t_ = 0;
    double lr_, beta1_, beta2_, eps_;
};

/// Scales grad down to `threshold` in l2 norm when it exceeds it.
void clip_grad_norm(Vector& grad, double threshold);

}  // namespace igpk
