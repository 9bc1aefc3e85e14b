#include "ihf/numerics/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace ihf::num {

bool is_symmetric(const Matrix& a, double tol) {
    if (a.rows() != a.cols()) return false;
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    return (a - a.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

SymEig sym_eig(const Matrix& input, double sym_tol) {
    if (input.rows() != input.cols()) throw std::invalid_argument("sym_eig: matrix is not square");
    if (!is_symmetric(input, sym_tol)) throw std::invalid_argument("sym_eig: matrix is not symmetric");

    const Eigen::Index n = input.rows();
    Matrix a = symmetrize(input);
    Matrix v = Matrix::Identity(n, n);
    Vector d = a.diagonal();
    Vector b = d;
    Vector z = Vector::Zero(n);

    constexpr int kMaxSweeps = 100;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) off += std::abs(a(p, q));
        if (off == 0.0) break;

        // Large rotations only during the first sweeps.
        const double thresh = sweep < 3 ? 0.2 * off / static_cast<double>(n * n) : 0.0;

        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double g = 100.0 * std::abs(a(p, q));
                if (sweep > 3 && std::abs(d(p)) + g == std::abs(d(p)) &&
                    std::abs(d(q)) + g == std::abs(d(q))) {
                    a(p, q) = 0.0;
                    continue;
                }
                if (std::abs(a(p, q)) <= thresh) continue;

                const double h = d(q) - d(p);
                double t;
                if (std::abs(h) + g == std::abs(h)) {
                    t = a(p, q) / h;
                } else {
                    const double theta = 0.5 * h / a(p, q);
                    t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                    if (theta < 0.0) t = -t;
                }
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                const double tau = s / (1.0 + c);
                const double hh = t * a(p, q);
                z(p) -= hh;
                z(q) += hh;
                d(p) -= hh;
                d(q) += hh;
                a(p, q) = 0.0;

                auto rotate = [&](Eigen::Index i, Eigen::Index j, Eigen::Index k, Eigen::Index l) {
                    const double gg = a(i, j);
                    const double hv = a(k, l);
                    a(i, j) = gg - s * (hv + gg * tau);
                    a(k, l) = hv + s * (gg - hv * tau);
                };
                for (Eigen::Index j = 0; j < p; ++j) rotate(j, p, j, q);
                for (Eigen::Index j = p + 1; j < q; ++j) rotate(p, j, j, q);
                for (Eigen::Index j = q + 1; j < n; ++j) rotate(p, j, q, j);
                for (Eigen::Index j = 0; j < n; ++j) {
                    const double gg = v(j, p);
                    const double hv = v(j, q);
                    v(j, p) = gg - s * (hv + gg * tau);
                    v(j, q) = hv + s * (gg - hv * tau);
                }
            }
        }
        b += z;
        d = b;
        z.setZero();
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return d(i) < d(j); });

    SymEig out{Vector(n), Matrix(n, n)};
    for (Eigen::Index k = 0; k < n; ++k) {
        out.values(k) = d(order[static_cast<std::size_t>(k)]);
        out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
    }
    return out;
}

Matrix spd_log(const Matrix& a) {
    const SymEig eig = sym_eig(a);
    if (eig.values.minCoeff() <= 0.0) throw std::domain_error("spd_log: matrix is not positive definite");
    return sym_apply(eig, [](double w) { return std::log(w); });
}

Matrix sym_exp(const Matrix& a) {
    return sym_apply(sym_eig(a), [](double w) { return std::exp(w); });
}

Matrix spd_pow(const Matrix& a, double p) {
    const SymEig eig = sym_eig(a);
    if (eig.values.minCoeff() <= 0.0) throw std::domain_error("spd_pow: matrix is not positive definite");
    return sym_apply(eig, [p](double w) { return std::pow(w, p); });
}

double riemann_distance(const Matrix& a, const Matrix& b) {
    const Matrix isq = spd_pow(a, -0.5);
    const SymEig eig = sym_eig(symmetrize(isq * b * isq));
    double acc = 0.0;
    for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
        if (eig.values(i) <= 0.0) throw std::domain_error("riemann_distance: matrix is not positive definite");
        const double l = std::log(eig.values(i));
        acc += l * l;
    }
    return std::sqrt(acc);
}

double log_euclid_distance(const Matrix& a, const Matrix& b) {
    return (spd_log(a) - spd_log(b)).norm();
}

Matrix shrink(const Matrix& c, double rho) {
    const auto d = static_cast<double>(c.rows());
    Matrix out = (1.0 - rho) * c;
    out.diagonal().array() += rho * c.trace() / d;
    return out;
}

}  // namespace ihf::num
