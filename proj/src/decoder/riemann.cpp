#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ihf/decoder.hpp"

namespace ihf::decoder {

using num::Matrix;
using num::Vector;

namespace {

Matrix class_mean(const std::vector<Epoch>& epochs, bool errp) {
    Matrix sum;
    int count = 0;
    for (const auto& e : epochs) {
        if (e.errp != errp) continue;
        if (count == 0) sum = Matrix::Zero(e.channels(), e.length());
        sum += e.samples;
        ++count;
    }
    return sum / count;
}

// Row-centred X X^T / T.
Matrix sample_cov(const Matrix& x) {
    const Matrix centred = x.colwise() - x.rowwise().mean();
    return centred * centred.transpose() / static_cast<double>(x.cols());
}

}  // namespace

SpatialFilterBank fit_xdawn(const std::vector<Epoch>& train, int nfilter, double rho) {
    if (train.empty()) throw std::invalid_argument("xdawn: empty training set");
    const int channels = train.front().channels();
    const int length = train.front().length();
    if (nfilter < 1 || nfilter > channels) throw std::invalid_argument("xdawn: nfilter must be in [1, channels]");
    int positives = 0;
    for (const auto& e : train) {
        if (e.channels() != channels || e.length() != length) throw std::invalid_argument("xdawn: mixed epoch geometry");
        positives += e.errp ? 1 : 0;
    }
    if (positives == 0 || positives == static_cast<int>(train.size()))
        throw std::invalid_argument("xdawn: both classes are required");

    Matrix signal = Matrix::Zero(channels, channels);
    for (const auto& e : train) signal += e.samples * e.samples.transpose() / static_cast<double>(length);
    signal /= static_cast<double>(train.size());
    if (rho > 0.0) signal = num::shrink(signal, rho);
    const Eigen::LLT<Matrix> llt(signal);
    if (llt.info() != Eigen::Success) throw std::domain_error("xdawn: signal covariance is not positive definite");
    const Matrix l = llt.matrixL();
    const Matrix l_inv = l.triangularView<Eigen::Lower>().solve(Matrix::Identity(channels, channels));

    SpatialFilterBank bank;
    bank.nfilter = nfilter;
    bank.filters.resize(2 * nfilter, channels);
    for (int cls = 0; cls < 2; ++cls) {
        const Matrix proto = class_mean(train, cls == 1);
        const Matrix evoked = proto * proto.transpose() / static_cast<double>(length);
        const num::SymEig eig = num::sym_eig(num::symmetrize(l_inv * evoked * l_inv.transpose()));
        Matrix w(nfilter, channels);
        for (int f = 0; f < nfilter; ++f) {
            Vector v = l_inv.transpose() * eig.vectors.col(channels - 1 - f);
            v.normalize();
            Eigen::Index big = 0;
            v.cwiseAbs().maxCoeff(&big);
            if (v(big) < 0.0) v = -v;  // fixed sign so fits are reproducible
            w.row(f) = v.transpose();
        }
        bank.filters.middleRows(cls * nfilter, nfilter) = w;
        bank.prototypes.push_back(w * proto);
    }
    return bank;
}

Matrix super_trial_cov_raw(const Epoch& epoch, const SpatialFilterBank& bank) {
    if (epoch.channels() != bank.filters.cols() || epoch.length() != bank.prototypes.front().cols())
        throw std::invalid_argument("super_trial_cov: epoch geometry does not match the filter bank");
    const int nf = bank.nfilter;
    Matrix stacked(bank.stacked_dim(), epoch.length());
    stacked.topRows(nf) = bank.prototypes[0];
    stacked.middleRows(nf, nf) = bank.prototypes[1];
    stacked.bottomRows(2 * nf) = bank.filters * epoch.samples;
    return num::symmetrize(sample_cov(stacked));
}

Matrix super_trial_cov(const Epoch& epoch, const SpatialFilterBank& bank, double rho) {
    return num::shrink(super_trial_cov_raw(epoch, bank), rho);
}

Matrix log_euclid_mean(const std::vector<Matrix>& covs) {
    if (covs.empty()) throw std::invalid_argument("log_euclid_mean: no matrices");
    Matrix acc = Matrix::Zero(covs.front().rows(), covs.front().cols());
    for (const auto& c : covs) acc += num::spd_log(c);
    return num::sym_exp(acc / static_cast<double>(covs.size()));
}

Matrix restrict(const Matrix& cov, const std::vector<int>& keep) {
    const auto k = static_cast<Eigen::Index>(keep.size());
    Matrix out(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j) out(i, j) = cov(keep[static_cast<std::size_t>(i)], keep[static_cast<std::size_t>(j)]);
    return out;
}

std::vector<int> select_channels(const std::vector<Matrix>& class0, const std::vector<Matrix>& class1, int nelec) {
    if (class0.empty() || class1.empty()) throw std::invalid_argument("select_channels: both classes are required");
    const int d = static_cast<int>(class0.front().rows());
    if (nelec < 1 || nelec > d) throw std::invalid_argument("select_channels: nelec must be in [1, dim]");
    std::vector<int> keep(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) keep[static_cast<std::size_t>(i)] = i;

    auto mean_on = [](const std::vector<Matrix>& covs, const std::vector<int>& subset) {
        std::vector<Matrix> r;
        r.reserve(covs.size());
        for (const auto& c : covs) r.push_back(restrict(c, subset));
        return log_euclid_mean(r);
    };
    while (static_cast<int>(keep.size()) > nelec) {
        std::size_t drop = 0;
        double best = -1.0;
        for (std::size_t j = 0; j < keep.size(); ++j) {
            std::vector<int> subset = keep;
            subset.erase(subset.begin() + static_cast<std::ptrdiff_t>(j));
            const double dist = num::riemann_distance(mean_on(class0, subset), mean_on(class1, subset));
            if (dist > best) {
                best = dist;
                drop = j;
            }
        }
        keep.erase(keep.begin() + static_cast<std::ptrdiff_t>(drop));
    }
    return keep;
}

Vector tangent_project(const Matrix& cov, const Matrix& reference) {
    if (cov.rows() != reference.rows() || cov.cols() != reference.cols())
        throw std::invalid_argument("tangent_project: size mismatch");
    const Matrix diff = num::spd_log(cov) - num::spd_log(reference);
    const Eigen::Index d = cov.rows();
    Vector out(d * (d + 1) / 2);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = i; j < d; ++j) out(k++) = i == j ? diff(i, i) : std::numbers::sqrt2 * diff(i, j);
    return out;
}

Vector l1_normalize(const Vector& x) {
    const double norm = x.cwiseAbs().sum();
    return norm > 0.0 ? Vector(x / norm) : x;
}

}  // namespace ihf::decoder
