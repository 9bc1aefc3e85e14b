#include "ihf/numerics/mlp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ihf::num {

MlpGradients& MlpGradients::operator+=(const MlpGradients& other) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        weights[l] += other.weights[l];
        biases[l] += other.biases[l];
    }
    return *this;
}

MlpGradients& MlpGradients::operator*=(double s) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        weights[l] *= s;
        biases[l] *= s;
    }
    return *this;
}

void MlpGradients::set_zero() {
    for (auto& w : weights) w.setZero();
    for (auto& b : biases) b.setZero();
}

Mlp::Mlp(std::vector<int> sizes, Activation output) : sizes_(std::move(sizes)), output_(output) {
    if (sizes_.size() < 2) throw std::invalid_argument("Mlp: need at least input and output sizes");
    for (int s : sizes_)
        if (s <= 0) throw std::invalid_argument("Mlp: layer sizes must be positive");
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        weights_.push_back(Matrix::Zero(sizes_[l + 1], sizes_[l]));
        biases_.push_back(Vector::Zero(sizes_[l + 1]));
    }
}

Mlp Mlp::glorot(std::vector<int> sizes, std::mt19937_64& rng, Activation output) {
    Mlp net(std::move(sizes), output);
    for (std::size_t l = 0; l < net.weights_.size(); ++l) {
        const double limit = std::sqrt(6.0 / static_cast<double>(net.sizes_[l] + net.sizes_[l + 1]));
        std::uniform_real_distribution<double> dist(-limit, limit);
        Matrix& w = net.weights_[l];
        for (Eigen::Index j = 0; j < w.cols(); ++j)
            for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = dist(rng);
    }
    return net;
}

Vector Mlp::forward(const Vector& x) const {
    Matrix out = forward_batch(x);
    return out.col(0);
}

Matrix Mlp::forward_batch(const Matrix& x) const {
    if (x.rows() != input_size())
        throw std::invalid_argument("Mlp::forward: expected input of size " + std::to_string(input_size()) +
                                    ", got " + std::to_string(x.rows()));
    Matrix h = x;
    const std::size_t last = weights_.size() - 1;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        Matrix z = weights_[l] * h;
        z.colwise() += biases_[l];
        if (l < last || output_ == Activation::Relu) z = z.cwiseMax(0.0);
        h = std::move(z);
    }
    return h;
}

Matrix Mlp::forward_batch(const Matrix& x, Cache& cache) const {
    if (x.rows() != input_size())
        throw std::invalid_argument("Mlp::forward: expected input of size " + std::to_string(input_size()) +
                                    ", got " + std::to_string(x.rows()));
    cache.inputs.assign(weights_.size(), Matrix{});
    cache.pre.assign(weights_.size(), Matrix{});
    Matrix h = x;
    const std::size_t last = weights_.size() - 1;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        cache.inputs[l] = h;
        Matrix z = weights_[l] * h;
        z.colwise() += biases_[l];
        cache.pre[l] = z;
        if (l < last || output_ == Activation::Relu) z = z.cwiseMax(0.0);
        h = std::move(z);
    }
    return h;
}

MlpGradients Mlp::backward(const Cache& cache, const Matrix& upstream) const {
    if (cache.pre.size() != weights_.size())
        throw std::invalid_argument("Mlp::backward: forward cache missing");
    if (upstream.rows() != output_size() || upstream.cols() != cache.pre.back().cols())
        throw std::invalid_argument("Mlp::backward: upstream gradient shape mismatch");

    MlpGradients grad;
    grad.weights.resize(weights_.size());
    grad.biases.resize(weights_.size());

    const std::size_t last = weights_.size() - 1;
    Matrix delta = upstream;
    for (std::size_t l = weights_.size(); l-- > 0;) {
        if (l < last || output_ == Activation::Relu)
            delta = delta.cwiseProduct((cache.pre[l].array() > 0.0).cast<double>().matrix());
        grad.weights[l] = delta * cache.inputs[l].transpose();
        grad.biases[l] = delta.rowwise().sum();
        if (l > 0) delta = weights_[l].transpose() * delta;
    }
    return grad;
}

MlpGradients Mlp::zero_gradients() const {
    MlpGradients g;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        g.weights.push_back(Matrix::Zero(weights_[l].rows(), weights_[l].cols()));
        g.biases.push_back(Vector::Zero(biases_[l].size()));
    }
    return g;
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l)
        n += static_cast<std::size_t>(weights_[l].size() + biases_[l].size());
    return n;
}

std::vector<double> Mlp::flat_parameters() const {
    std::vector<double> flat;
    flat.reserve(parameter_count());
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        flat.insert(flat.end(), weights_[l].data(), weights_[l].data() + weights_[l].size());
        flat.insert(flat.end(), biases_[l].data(), biases_[l].data() + biases_[l].size());
    }
    return flat;
}

void Mlp::set_flat_parameters(std::span<const double> flat) {
    if (flat.size() != parameter_count())
        throw std::invalid_argument("Mlp::set_flat_parameters: size mismatch");
    std::size_t k = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        for (Eigen::Index i = 0; i < weights_[l].size(); ++i) weights_[l].data()[i] = flat[k++];
        for (Eigen::Index i = 0; i < biases_[l].size(); ++i) biases_[l].data()[i] = flat[k++];
    }
}

bool Mlp::operator==(const Mlp& other) const {
    if (sizes_ != other.sizes_ || output_ != other.output_) return false;
    for (std::size_t l = 0; l < weights_.size(); ++l)
        if (weights_[l] != other.weights_[l] || biases_[l] != other.biases_[l]) return false;
    return true;
}

}  // namespace ihf::num
