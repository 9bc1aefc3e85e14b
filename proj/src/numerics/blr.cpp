#include "ihf/numerics/blr.hpp"

#include <stdexcept>

namespace ihf::num {

BayesLinReg BayesLinReg::prior(int dim, double prior_var, double noise_var) {
    if (dim <= 0 || prior_var <= 0.0 || noise_var <= 0.0)
        throw std::invalid_argument("BayesLinReg::prior: dimension and variances must be positive");
    BayesLinReg m;
    m.mean = Vector::Zero(dim);
    m.covariance = prior_var * Matrix::Identity(dim, dim);
    m.precision = Matrix::Identity(dim, dim) / prior_var;
    m.shift = Vector::Zero(dim);
    m.noise_var = noise_var;
    m.prior_var = prior_var;
    return m;
}

BayesLinReg blr_update(const BayesLinReg& model, const Matrix& features, const Vector& targets) {
    if (features.cols() != model.dim())
        throw std::invalid_argument("blr_update: feature dimension mismatch");
    if (features.rows() != targets.size())
        throw std::invalid_argument("blr_update: feature/target count mismatch");

    BayesLinReg out = model;
    if (features.rows() == 0) return out;

    out.precision.noalias() += features.transpose() * features / model.noise_var;
    out.precision = symmetrize(out.precision);
    out.shift.noalias() += features.transpose() * targets / model.noise_var;

    Eigen::LLT<Matrix> llt(out.precision);
    if (llt.info() != Eigen::Success) throw std::domain_error("blr_update: precision is not positive definite");
    out.covariance = symmetrize(llt.solve(Matrix::Identity(model.dim(), model.dim())));
    out.mean = llt.solve(out.shift);
    return out;
}

Matrix blr_factor(const BayesLinReg& model) {
    Eigen::LLT<Matrix> llt(model.covariance);
    if (llt.info() != Eigen::Success) throw std::domain_error("blr_sample: covariance is not positive definite");
    return llt.matrixL();
}

Vector blr_sample(const BayesLinReg& model, std::mt19937_64& rng) { return blr_sample(model, blr_factor(model), rng); }

Vector blr_sample(const BayesLinReg& model, const Matrix& factor, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector z(model.dim());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
    return model.mean + factor.triangularView<Eigen::Lower>() * z;
}

}  // namespace ihf::num
