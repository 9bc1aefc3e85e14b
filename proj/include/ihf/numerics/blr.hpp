#pragma once

#include <random>

#include "ihf/numerics/linalg.hpp"

namespace ihf::num {

/// Conjugate Gaussian posterior over linear weights w with prior N(0, lambda I)
/// and observation noise variance sigma2.
///
/// The natural parameters (precision and precision-weighted mean) are kept
/// alongside mean/covariance so that successive updates compose exactly:
/// updating on A then B equals updating once on A and B stacked.
struct BayesLinReg {
    Vector mean;
    Matrix covariance;
    Matrix precision;
    Vector shift;  // Phi^T y / sigma2 accumulated
    double noise_var = 1.0;
    double prior_var = 1.0;

    static BayesLinReg prior(int dim, double prior_var, double noise_var);
    int dim() const { return static_cast<int>(mean.size()); }
};

/// Sigma^-1 = Sigma_prev^-1 + Phi^T Phi / sigma2,  mu = Sigma (shift_prev + Phi^T y / sigma2).
/// `features` has one row per observation.
BayesLinReg blr_update(const BayesLinReg& model, const Matrix& features, const Vector& targets);

/// Draw w ~ N(mean, covariance) through the Cholesky factor of the covariance.
/// Throws std::domain_error if the covariance is not positive definite.
Vector blr_sample(const BayesLinReg& model, std::mt19937_64& rng);

/// Lower Cholesky factor of the covariance. Throws std::domain_error if not positive definite.
Matrix blr_factor(const BayesLinReg& model);

/// Same draw as blr_sample, reusing a factor from blr_factor.
Vector blr_sample(const BayesLinReg& model, const Matrix& factor, std::mt19937_64& rng);

}  // namespace ihf::num
