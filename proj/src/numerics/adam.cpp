#include "ihf/numerics/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace ihf::num {

AdamState::AdamState(const Mlp& net, AdamConfig cfg)
    : config(cfg), m(net.zero_gradients()), v(net.zero_gradients()) {}

void adam_step(Mlp& net, const MlpGradients& grad, AdamState& state) {
    if (grad.weights.size() != net.layer_count() || state.m.weights.size() != net.layer_count())
        throw std::invalid_argument("adam_step: gradient/moment shape mismatch");

    const AdamConfig& c = state.config;
    ++state.step;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));

    auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
        m = c.beta1 * m + (1.0 - c.beta1) * g;
        v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
        param.array() -= c.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + c.eps);
    };
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        update(net.weight(l), grad.weights[l], state.m.weights[l], state.v.weights[l]);
        update(net.bias(l), grad.biases[l], state.m.biases[l], state.v.biases[l]);
    }
}

}  // namespace ihf::num
