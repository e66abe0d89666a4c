#include "igpk/koopman.hpp"

namespace igpk {

std::pair<Matrix, Matrix> edmd_fit(const Matrix& Phi, const Matrix& PhiPlus,
                                   const Matrix& X) {
    if (Phi.cols() != PhiPlus.cols() || Phi.cols() != X.cols()) {
        throw DimensionMismatch("edmd_fit: snapshot column counts differ");
    }
    if (Phi.rows() != PhiPlus.rows()) {
        throw DimensionMismatch("edmd_fit: lifted dimensions differ");
    }
    const Matrix Phi_pinv = pinv_svd(Phi);
    return {PhiPlus * Phi_pinv, X * Phi_pinv};
}

Matrix dictionary_lift(const DictionarySpec& dict, const Matrix& X) {
    return std::visit(
        [&](const auto& d) -> Matrix {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, PolyDictionary>) {
                return poly_lift(X, d.degree);
            } else {
                return thinplate_lift(X, d);
            }
        },
        dict);
}

GaussianState lift_initial(const KoopmanModel& model, const Vector& x0) {
    if (x0.size() != model.state_dim()) {
        throw DimensionMismatch("lift_initial: state dimension mismatch");
    }
    const Eigen::Index n_z = model.lifted_dim();
    GaussianState s;
    s.mean.resize(n_z);
    s.cov = Matrix::Zero(n_z, n_z);
    if (const auto* bank = std::get_if<GpoBank>(&model.observables)) {
        if (static_cast<Eigen::Index>(bank->size()) != n_z) {
            throw DimensionMismatch("lift_initial: GPO bank size vs K");
        }
        const Matrix xq = x0;
        for (Eigen::Index i = 0; i < n_z; ++i) {
            const auto& gpo = (*bank)[static_cast<std::size_t>(i)];
            s.mean(i) = gpo.posterior_mean(xq)(0);
            s.cov(i, i) = gpo.posterior_var(xq)(0);
        }
    } else {
        const auto& dict = std::get<DictionarySpec>(model.observables);
        const Matrix z = dictionary_lift(dict, x0);
        if (z.rows() != n_z) {
            throw DimensionMismatch("lift_initial: dictionary size vs K");
        }
        s.mean = z.col(0);
    }
    return s;
}

std::vector<RolloutStep> propagate(const KoopmanModel& model,
                                   const GaussianState& init, int steps) {
    if (steps < 0) throw InvalidConfig("propagate: steps must be >= 0");
    if (init.mean.size() != model.lifted_dim()) {
        throw DimensionMismatch("propagate: lifted dimension mismatch");
    }
    std::vector<RolloutStep> out;
    out.reserve(static_cast<std::size_t>(steps) + 1);

    GaussianState z = init;
    for (int k = 0;; ++k) {
        GaussianState x;
        x.mean = model.C * z.mean;
        x.cov = model.C * z.cov * model.C.transpose();
        x.cov = 0.5 * (x.cov + x.cov.transpose()).eval();
        out.push_back({z, x});
        if (k == steps) break;
        z.mean = model.K * z.mean;
        z.cov = model.K * z.cov * model.K.transpose();
        // symmetrize against round-off drift over long rollouts
        z.cov = 0.5 * (z.cov + z.cov.transpose()).eval();
    }
    return out;
}

}  // namespace igpk
