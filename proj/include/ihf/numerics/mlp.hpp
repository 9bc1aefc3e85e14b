#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "ihf/numerics/linalg.hpp"

namespace ihf::num {

enum class Activation { Linear, Relu };

/// Per-layer parameter-shaped storage. Used for gradients and for optimizer
/// moments, so it mirrors the weight/bias layout of an Mlp exactly.
struct MlpGradients {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;

    MlpGradients& operator+=(const MlpGradients& other);
    MlpGradients& operator*=(double s);
    void set_zero();
};

/// Fully connected feed-forward network. Batches are column-major: each
/// column of an input matrix is one sample.
class Mlp {
public:
    struct Cache {
        std::vector<Matrix> inputs;       // input to layer l (post-activation of l-1)
        std::vector<Matrix> pre;          // affine output of layer l
    };

    Mlp() = default;
    /// Zero-initialised network with the given layer sizes (input first).
    explicit Mlp(std::vector<int> sizes, Activation output = Activation::Linear);

    /// Uniform(+-sqrt(6/(fan_in+fan_out))) weights, zero biases.
    static Mlp glorot(std::vector<int> sizes, std::mt19937_64& rng,
                      Activation output = Activation::Linear);

    const std::vector<int>& sizes() const { return sizes_; }
    int input_size() const { return sizes_.front(); }
    int output_size() const { return sizes_.back(); }
    std::size_t layer_count() const { return weights_.size(); }
    Activation output_activation() const { return output_; }

    Matrix& weight(std::size_t l) { return weights_[l]; }
    const Matrix& weight(std::size_t l) const { return weights_[l]; }
    Vector& bias(std::size_t l) { return biases_[l]; }
    const Vector& bias(std::size_t l) const { return biases_[l]; }

    Vector forward(const Vector& x) const;
    Matrix forward_batch(const Matrix& x) const;
    Matrix forward_batch(const Matrix& x, Cache& cache) const;

    /// Reverse-mode parameter gradients of <upstream, output>, summed over the
    /// batch. `cache` must come from forward_batch on the same parameters.
    MlpGradients backward(const Cache& cache, const Matrix& upstream) const;

    MlpGradients zero_gradients() const;

    std::size_t parameter_count() const;
    std::vector<double> flat_parameters() const;
    void set_flat_parameters(std::span<const double> flat);

    bool operator==(const Mlp& other) const;

private:
    std::vector<int> sizes_;
    std::vector<Matrix> weights_;
    std::vector<Vector> biases_;
    Activation output_ = Activation::Linear;
};

}  // namespace ihf::num
