#pragma once

#include "ihf/numerics/mlp.hpp"

namespace ihf::num {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    AdamConfig config;
    MlpGradients m;
    MlpGradients v;
    long step = 0;

    AdamState() = default;
    AdamState(const Mlp& net, AdamConfig cfg);
};

/// One bias-corrected Adam descent step: params -= lr * m_hat / (sqrt(v_hat) + eps).
void adam_step(Mlp& net, const MlpGradients& grad, AdamState& state);

}  // namespace ihf::num
