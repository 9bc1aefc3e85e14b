#pragma once

#include <Eigen/Dense>

namespace ihf::num {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Eigen-decomposition of a real symmetric matrix.
/// `values` are ascending; column i of `vectors` pairs with values(i).
struct SymEig {
    Vector values;
    Matrix vectors;
};

bool is_symmetric(const Matrix& a, double tol = 1e-9);

/// Cyclic Jacobi rotations with a per-sweep threshold. Throws
/// std::invalid_argument if `a` is not square or not symmetric to `sym_tol`
/// (relative to the largest magnitude entry).
SymEig sym_eig(const Matrix& a, double sym_tol = 1e-9);

/// f(A) = V diag(f(w)) V^T for symmetric A.
template <typename F>
Matrix sym_apply(const SymEig& eig, F&& f) {
    Vector mapped(eig.values.size());
    for (Eigen::Index i = 0; i < eig.values.size(); ++i) mapped(i) = f(eig.values(i));
    return eig.vectors * mapped.asDiagonal() * eig.vectors.transpose();
}

/// Principal matrix logarithm of an SPD matrix. Throws std::domain_error
/// when an eigenvalue is not strictly positive.
Matrix spd_log(const Matrix& a);
/// Matrix exponential of a symmetric matrix.
Matrix sym_exp(const Matrix& a);
/// A^p for SPD A.
Matrix spd_pow(const Matrix& a, double p);

/// Affine-invariant distance ||log(A^{-1/2} B A^{-1/2})||_F.
double riemann_distance(const Matrix& a, const Matrix& b);
/// ||log A - log B||_F.
double log_euclid_distance(const Matrix& a, const Matrix& b);

/// (1 - rho) C + rho * tr(C)/d * I
Matrix shrink(const Matrix& c, double rho);

Matrix symmetrize(const Matrix& a);

}  // namespace ihf::num
