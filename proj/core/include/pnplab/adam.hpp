#pragma once

#include <cstdint>

#include "pnplab/vector_field_net.hpp"

namespace pnp {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adaptive-moment optimizer state; moments mirror the parameter tensors.
struct OptimizerState {
    AdamConfig config;
    ParameterSet first_moment;
    ParameterSet second_moment;
    std::uint64_t step = 0;
};

OptimizerState make_optimizer_state(const ParameterSet& params, AdamConfig config = {});

/// Bias-corrected Adam update in place. Throws ConfigError on any shape mismatch.
void optimizer_step(OptimizerState& state, ParameterSet& params, const ParameterSet& gradients);

inline void optimizer_step(OptimizerState& state, VectorFieldNet& net, const ParameterSet& gradients) {
    optimizer_step(state, net.parameters(), gradients);
}

}  // namespace pnp
